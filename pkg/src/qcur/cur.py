"""Sampled CUR factorization of quaternion matrices.

Columns and rows are drawn from either squared-column-norm ("length") or
uniform distributions, without replacement, and the middle factor solves

    min_U || X - C U R ||_F        =>        U = pinv(C) X pinv(R),

so C U R equals the two-sided projection C C^+ X R^+ R of X.  For a rank-k
matrix whose sampled rows and columns keep that rank, the factorization is
exact.  Under additive noise E the error of the projection built from the
noisy matrix is controlled by two computable bounds: with C, R taken from
the clean matrix and E_J, E_I the sampled noise blocks,

    || X - Ct Ct^+ Xt Rt^+ Rt ||_2
        <= ||E_I||_2 ||X R^+||_2 + ||E_J||_2 ||C^+ X||_2 + 3 ||E||_2
        <= ||E||_2 (||pinv(W_k[I,:])||_2 + ||pinv(V_k[J,:])||_2 + 3),

where W_k, V_k are the leading singular factors of X.  The second form
follows from the first because restricting pinv targets to sampled singular
rows preserves the operator norms involved.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateDistributionError,
    DegenerateSamplingError,
    ParameterError,
    SamplingError,
    ShapeError,
)
from .linalg import numerical_rank, pseudoinverse, qsvd, spectral_norm
from .quat import QMatrix, qmat_frobenius_norm

__all__ = [
    "STRATEGIES",
    "SamplingPlan",
    "CURFactors",
    "PerturbationBounds",
    "length_distributions",
    "uniform_distributions",
    "default_sample_counts",
    "make_plan",
    "draw_indices",
    "plan_indices",
    "qmcur",
    "cur_reconstruct",
    "stabilized_reconstruct",
    "perturbation_bounds",
]

STRATEGIES = ("length", "uniform")


def _check_strategy(strategy: str) -> str:
    if strategy not in STRATEGIES:
        raise ParameterError(f"strategy must be one of {STRATEGIES}, got {strategy!r}")
    return strategy


def _check_probs(p: np.ndarray, name: str) -> np.ndarray:
    arr = np.asarray(p, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ShapeError(f"{name} must be a non-empty 1-D array")
    if np.any(arr < 0) or not np.all(np.isfinite(arr)):
        raise ParameterError(f"{name} must be finite and nonnegative")
    if abs(arr.sum() - 1.0) > 1e-12:
        raise ParameterError(f"{name} must sum to 1 (got {arr.sum()!r})")
    return arr


@dataclass(frozen=True)
class SamplingPlan:
    """Everything qmcur needs to draw indices reproducibly.

    num_cols and num_rows are the sample sizes |J| and |I|; both must be at
    least the target rank for the factorization to be able to keep it.
    """

    strategy: str
    rank: int
    num_rows: int
    num_cols: int
    seed: int
    row_probs: np.ndarray = field(repr=False)
    col_probs: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        _check_strategy(self.strategy)
        if self.rank < 1:
            raise ParameterError(f"rank must be positive, got {self.rank}")
        if self.num_rows < self.rank or self.num_cols < self.rank:
            raise ParameterError(
                f"sample counts ({self.num_rows}, {self.num_cols}) must be >= rank {self.rank}"
            )
        rp = _check_probs(self.row_probs, "row_probs")
        cp = _check_probs(self.col_probs, "col_probs")
        rp.setflags(write=False)
        cp.setflags(write=False)
        object.__setattr__(self, "row_probs", rp)
        object.__setattr__(self, "col_probs", cp)
        if self.num_rows > self.row_probs.size or self.num_cols > self.col_probs.size:
            raise ParameterError("sample counts exceed the available indices")


@dataclass(frozen=True)
class CURFactors:
    """Skeleton factors: C = X[:, J], R = X[I, :], U = pinv(C) X pinv(R)."""

    row_indices: np.ndarray
    col_indices: np.ndarray
    c: QMatrix
    u: QMatrix
    r: QMatrix

    def __post_init__(self) -> None:
        for name in ("row_indices", "col_indices"):
            idx = np.array(getattr(self, name), dtype=np.intp)
            idx.setflags(write=False)
            object.__setattr__(self, name, idx)
        if self.u.shape != (self.col_indices.size, self.row_indices.size):
            raise ShapeError(
                f"U has shape {self.u.shape}, expected "
                f"({self.col_indices.size}, {self.row_indices.size})"
            )


def length_distributions(x: QMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Squared-norm sampling weights: p_j over columns, q_i over rows.

    p_j = ||X[:, j]||^2 / ||X||_F^2 and q_i = ||X[i, :]||^2 / ||X||_F^2,
    where the squared column norm sums squared moduli of the entries.

    Raises
    ------
    DegenerateDistributionError
        For the zero matrix, whose weights cannot be normalized.
    """
    sq = sum(p * p for p in x.planes)
    total = float(sq.sum())
    if total <= 0.0:
        raise DegenerateDistributionError("all sampling weights vanish (zero matrix)")
    col = sq.sum(axis=0) / total
    row = sq.sum(axis=1) / total
    # kill accumulated rounding so downstream sum-to-1 checks stay exact
    return col / col.sum(), row / row.sum()


def uniform_distributions(m: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Flat weights 1/n per column and 1/m per row."""
    if m < 1 or n < 1:
        raise ParameterError(f"dimensions must be positive, got ({m}, {n})")
    return np.full(n, 1.0 / n), np.full(m, 1.0 / m)


def default_sample_counts(k: int, m: int, n: int) -> tuple[int, int]:
    """Sample sizes |I| = |J| = min(max(k, ceil(k ln k)), min(m, n)).

    The k ln k growth keeps rank-k column spaces representable with high
    probability; the clamp respects small matrices.
    """
    if k < 1:
        raise ParameterError(f"k must be positive, got {k}")
    if k > min(m, n):
        raise ParameterError(f"k={k} exceeds min(m, n)={min(m, n)}")
    grown = math.ceil(k * math.log(max(k, 2)))
    count = min(max(k, grown), min(m, n))
    return count, count


def make_plan(
    x: QMatrix,
    strategy: str,
    rank: int,
    seed: int,
    num_rows: int | None = None,
    num_cols: int | None = None,
) -> SamplingPlan:
    """Assemble a SamplingPlan for x with defaulted sample counts."""
    _check_strategy(strategy)
    m, n = x.shape
    d_rows, d_cols = default_sample_counts(rank, m, n)
    if strategy == "length":
        col_probs, row_probs = length_distributions(x)
    else:
        col_probs, row_probs = uniform_distributions(m, n)
    return SamplingPlan(
        strategy=strategy,
        rank=rank,
        num_rows=num_rows if num_rows is not None else d_rows,
        num_cols=num_cols if num_cols is not None else d_cols,
        seed=int(seed),
        row_probs=row_probs,
        col_probs=col_probs,
    )


def draw_indices(probs, count: int, seed) -> np.ndarray:
    """Draw ``count`` distinct indices by iterated weighted selection.

    Each draw removes the chosen index and renormalizes the remaining
    weights, so the result has no repeats and zero-weight indices are never
    selected.  ``seed`` may be an int or a numpy Generator (the latter lets
    a caller consume several draws from one stream).

    Raises
    ------
    SamplingError
        If ``count`` exceeds the number of strictly positive weights.
    """
    p = np.array(probs, dtype=np.float64, copy=True)
    if p.ndim != 1 or p.size == 0:
        raise ShapeError("probs must be a non-empty 1-D array")
    if np.any(p < 0) or not np.all(np.isfinite(p)):
        raise ParameterError("probs must be finite and nonnegative")
    count = int(count)
    if count < 1:
        raise ParameterError(f"count must be positive, got {count}")
    positive = int(np.count_nonzero(p > 0))
    if count > positive:
        raise SamplingError(
            f"cannot draw {count} distinct indices from {positive} positive weights"
        )
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(int(seed))
    chosen = np.empty(count, dtype=np.intp)
    for t in range(count):
        cum = np.cumsum(p)
        total = cum[-1]
        if total <= 0.0:
            raise SamplingError("remaining weights sum to zero mid-draw")
        u = rng.random() * total
        idx = int(np.searchsorted(cum, u, side="right"))
        idx = min(idx, p.size - 1)
        while p[idx] == 0.0:  # guard: u landed on a zero-width cell boundary
            idx -= 1
        chosen[t] = idx
        p[idx] = 0.0
    return chosen


def plan_indices(plan: SamplingPlan) -> tuple[np.ndarray, np.ndarray]:
    """Draw the (row, column) index sets a plan describes.

    Columns are drawn first, then rows, from one stream seeded by the plan,
    so a plan fully determines both sets.
    """
    rng = np.random.default_rng(plan.seed)
    col_indices = draw_indices(plan.col_probs, plan.num_cols, rng)
    row_indices = draw_indices(plan.row_probs, plan.num_rows, rng)
    return row_indices, col_indices


def qmcur(x: QMatrix, plan: SamplingPlan) -> CURFactors:
    """Sampled CUR factorization of x under the given plan."""
    m, n = x.shape
    if plan.col_probs.size != n or plan.row_probs.size != m:
        raise ShapeError(
            f"plan distributions sized ({plan.row_probs.size}, {plan.col_probs.size}) "
            f"do not match matrix shape ({m}, {n})"
        )
    row_indices, col_indices = plan_indices(plan)
    c = x.take_cols(col_indices)
    r = x.take_rows(row_indices)
    u = pseudoinverse(c) @ x @ pseudoinverse(r)
    return CURFactors(row_indices=row_indices, col_indices=col_indices, c=c, u=u, r=r)


def cur_reconstruct(factors: CURFactors) -> QMatrix:
    """C U R, the rank-limited approximation of the sampled matrix."""
    return factors.c @ factors.u @ factors.r


def stabilized_reconstruct(x: QMatrix, row_indices, col_indices) -> QMatrix:
    """Two-sided projection C C^+ X R^+ R for given index sets.

    Equals cur_reconstruct of a qmcur run that drew the same indices; the
    repeated-projection form is idempotent for fixed index sets.
    """
    c = x.take_cols(col_indices)
    r = x.take_rows(row_indices)
    u = pseudoinverse(c) @ x @ pseudoinverse(r)
    return c @ u @ r


@dataclass(frozen=True)
class PerturbationBounds:
    """Observed projection error and its two computable upper bounds.

    xrp_norm / cx_norm are ||X R^+||_2 and ||C^+ X||_2; wsub_pinv_norm /
    vsub_pinv_norm are the pinv norms of the sampled singular-factor rows,
    which match the former pair whenever the sampling kept rank.
    """

    lhs: float
    bound_a: float
    bound_b: float
    noise_norm: float
    xrp_norm: float
    cx_norm: float
    wsub_pinv_norm: float
    vsub_pinv_norm: float


def perturbation_bounds(
    x: QMatrix,
    e: QMatrix,
    row_indices,
    col_indices,
    k: int,
    norm: str = "spectral",
) -> PerturbationBounds:
    """Evaluate the projection-error bounds for X, noise E, and index sets.

    Parameters
    ----------
    x : QMatrix
        Clean matrix of numerical rank exactly k.
    e : QMatrix
        Additive noise; the projection is built from x + e.
    row_indices, col_indices : array_like
        Sampled index sets I and J (|I|, |J| >= k).
    k : int
        Target rank.
    norm : {"spectral", "frobenius"}
        Norm used throughout.  The guaranteed ordering lhs <= bound_a <=
        bound_b holds for the spectral norm; the Frobenius variant is
        offered for exploration only.

    Raises
    ------
    ParameterError
        If numerical_rank(x) != k or the shapes disagree.
    DegenerateSamplingError
        If the sampled singular-factor blocks lose rank, which voids the
        bounds.
    """
    if norm not in ("spectral", "frobenius"):
        raise ParameterError(f"norm must be 'spectral' or 'frobenius', got {norm!r}")
    if x.shape != e.shape:
        raise ShapeError(f"noise shape {e.shape} does not match matrix shape {x.shape}")
    row_indices = np.asarray(row_indices, dtype=np.intp)
    col_indices = np.asarray(col_indices, dtype=np.intp)
    if row_indices.size < k or col_indices.size < k:
        raise ParameterError("index sets must contain at least k entries")
    rank_x = numerical_rank(x)
    if rank_x != k:
        raise ParameterError(f"x has numerical rank {rank_x}, expected exactly {k}")

    nfun = spectral_norm if norm == "spectral" else qmat_frobenius_norm

    res = qsvd(x, k)
    w_sub = res.w.take_rows(row_indices)
    v_sub = res.v.take_rows(col_indices)
    if numerical_rank(w_sub) < k or numerical_rank(v_sub) < k:
        raise DegenerateSamplingError(
            "sampled rows of the singular factors lost rank; bounds are void"
        )

    xt = x + e
    lhs = nfun(x - stabilized_reconstruct(xt, row_indices, col_indices))

    c = x.take_cols(col_indices)
    r = x.take_rows(row_indices)
    e_rows = e.take_rows(row_indices)
    e_cols = e.take_cols(col_indices)
    noise = nfun(e)
    xrp = nfun(x @ pseudoinverse(r))
    cx = nfun(pseudoinverse(c) @ x)
    bound_a = nfun(e_rows) * xrp + nfun(e_cols) * cx + 3.0 * noise

    wsub_pinv = nfun(pseudoinverse(w_sub))
    vsub_pinv = nfun(pseudoinverse(v_sub))
    bound_b = noise * (wsub_pinv + vsub_pinv + 3.0)

    return PerturbationBounds(
        lhs=float(lhs),
        bound_a=float(bound_a),
        bound_b=float(bound_b),
        noise_norm=float(noise),
        xrp_norm=float(xrp),
        cx_norm=float(cx),
        wsub_pinv_norm=float(wsub_pinv),
        vsub_pinv_norm=float(vsub_pinv),
    )
