"""Low-rank completion of partially observed quaternion matrices.

The solver alternates two steps: build a rank-limited approximation of the
current iterate with the sampled CUR factorization, then overwrite the
observed positions with their known values.  Iteration stops when the
relative Frobenius change drops below a tolerance or an iteration budget
runs out.  Observed entries are copied, never recomputed, so they survive
every iteration bit-for-bit.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .bench import derive_seed
from .cur import (
    STRATEGIES,
    cur_reconstruct,
    make_plan,
    plan_indices,
    qmcur,
    stabilized_reconstruct,
)
from .errors import ParameterError, ShapeError
from .quat import QMatrix, qmat_frobenius_norm

__all__ = [
    "INDEX_POLICIES",
    "ObservationMask",
    "CompletionConfig",
    "CompletionResult",
    "random_mask",
    "project_observed",
    "complete",
]

log = logging.getLogger(__name__)

INDEX_POLICIES = ("resample_each_iter", "fixed")

# a vanished denominator counts as converged only if the step itself vanished
_ZERO_STEP = 1e-15


@dataclass(frozen=True)
class ObservationMask:
    """Boolean map of which entries of a matrix are known."""

    observed: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.observed)
        if arr.ndim != 2 or arr.size == 0:
            raise ShapeError("observed must be a non-empty 2-D array")
        if arr.dtype != np.bool_:
            raise ParameterError(f"observed must be boolean, got dtype {arr.dtype}")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "observed", arr)

    @property
    def rows(self) -> int:
        return self.observed.shape[0]

    @property
    def cols(self) -> int:
        return self.observed.shape[1]

    @property
    def num_observed(self) -> int:
        return int(np.count_nonzero(self.observed))

    @property
    def missing_ratio(self) -> float:
        return 1.0 - self.num_observed / self.observed.size


def random_mask(m: int, n: int, missing_ratio: float, seed: int) -> ObservationMask:
    """Mask with exactly round(missing_ratio * m * n) missing entries.

    Positions are drawn uniformly without replacement, so the realized
    ratio matches the request up to the rounding of a single entry.
    """
    if m < 1 or n < 1:
        raise ParameterError(f"dimensions must be positive, got ({m}, {n})")
    if not 0.0 <= missing_ratio < 1.0:
        raise ParameterError(f"missing_ratio must be in [0, 1), got {missing_ratio}")
    total = m * n
    count = round(missing_ratio * total)
    observed = np.ones(total, dtype=bool)
    if count:
        rng = np.random.default_rng(seed)
        observed[rng.permutation(total)[:count]] = False
    return ObservationMask(observed.reshape(m, n))


def project_observed(x: QMatrix, mask: ObservationMask, y: QMatrix) -> QMatrix:
    """Entrywise mix: known positions from y, the rest from x."""
    if x.shape != y.shape:
        raise ShapeError(f"shapes {x.shape} and {y.shape} disagree")
    if (mask.rows, mask.cols) != x.shape:
        raise ShapeError(
            f"mask shape ({mask.rows}, {mask.cols}) does not match {x.shape}"
        )
    return QMatrix(
        *(np.where(mask.observed, yp, xp) for xp, yp in zip(x.planes, y.planes))
    )


@dataclass(frozen=True)
class CompletionConfig:
    """Solver knobs: target rank, sampling strategy, stopping rule, seed.

    index_policy "resample_each_iter" redraws row/column indices from the
    current iterate every sweep; "fixed" draws once from the zero-filled
    start and keeps the same sets throughout.
    """

    rank: int
    strategy: str = "length"
    max_iters: int = 200
    rel_tol: float = 1e-4
    index_policy: str = "resample_each_iter"
    seed: int = 0

    def __post_init__(self) -> None:
        if self.rank < 1:
            raise ParameterError(f"rank must be positive, got {self.rank}")
        if self.strategy not in STRATEGIES:
            raise ParameterError(f"strategy must be one of {STRATEGIES}, got {self.strategy!r}")
        if self.max_iters < 1:
            raise ParameterError(f"max_iters must be >= 1, got {self.max_iters}")
        if not self.rel_tol > 0.0:
            raise ParameterError(f"rel_tol must be > 0, got {self.rel_tol}")
        if self.index_policy not in INDEX_POLICIES:
            raise ParameterError(
                f"index_policy must be one of {INDEX_POLICIES}, got {self.index_policy!r}"
            )


@dataclass(frozen=True)
class CompletionResult:
    x_star: QMatrix
    iterations_run: int
    rel_change_history: tuple
    converged: bool

    def __post_init__(self) -> None:
        if self.iterations_run != len(self.rel_change_history):
            raise ParameterError("iterations_run must match the history length")


def complete(
    y: QMatrix,
    mask: ObservationMask,
    cfg: CompletionConfig,
    iterate_hook: Callable[[int, QMatrix, float], None] | None = None,
) -> CompletionResult:
    """Fill the unobserved entries of y by alternating projection.

    Starts from y with missing entries zeroed.  Each sweep replaces the
    iterate with a low-rank reconstruction built from a few more than
    cfg.rank sampled rows and columns, restores the observed values, and
    measures the relative change.  iterate_hook, when
    given, is called after every sweep with (iteration, iterate,
    rel_change); it must not mutate the iterate.

    Degenerate situations propagate: a zero iterate under length sampling
    has no usable distribution and raises, while a zero denominator in the
    stopping test only counts as converged when the step is zero too.
    """
    m, n = y.shape
    if (mask.rows, mask.cols) != (m, n):
        raise ShapeError(f"mask shape ({mask.rows}, {mask.cols}) does not match {y.shape}")
    if cfg.rank > min(m, n):
        raise ParameterError(f"rank {cfg.rank} exceeds min(m, n) = {min(m, n)}")

    current = project_observed(QMatrix.zeros(m, n), mask, y)

    # rank+5 rows and columns per sweep: a few extra samples stabilize the
    # sampled subspaces, while the approximation default (k·ln k) keeps so
    # many that the loop loses the rank truncation it depends on.
    count = min(cfg.rank + 5, m, n)

    fixed_rows = fixed_cols = None
    if cfg.index_policy == "fixed":
        plan = make_plan(
            current,
            cfg.strategy,
            cfg.rank,
            derive_seed(cfg.seed, "draw"),
            num_rows=count,
            num_cols=count,
        )
        fixed_rows, fixed_cols = plan_indices(plan)

    history: list[float] = []
    converged = False
    for t in range(cfg.max_iters):
        started = time.perf_counter()
        if cfg.index_policy == "fixed":
            approx = stabilized_reconstruct(current, fixed_rows, fixed_cols)
        else:
            plan = make_plan(
                current,
                cfg.strategy,
                cfg.rank,
                derive_seed(cfg.seed, "sweep", t),
                num_rows=count,
                num_cols=count,
            )
            approx = cur_reconstruct(qmcur(current, plan))
        updated = project_observed(approx, mask, y)

        step = qmat_frobenius_norm(updated - current)
        scale = qmat_frobenius_norm(current)
        if scale > 0.0:
            rel_change = step / scale
        elif step <= _ZERO_STEP:
            rel_change = 0.0
        else:
            rel_change = float("inf")
        history.append(float(rel_change))
        log.debug(
            "sweep %d: rel_change=%.3e, %.3f s",
            t + 1,
            rel_change,
            time.perf_counter() - started,
        )
        if iterate_hook is not None:
            iterate_hook(t + 1, updated, float(rel_change))
        current = updated
        if rel_change <= cfg.rel_tol:
            converged = True
            break

    return CompletionResult(
        x_star=current,
        iterations_run=len(history),
        rel_change_history=tuple(history),
        converged=converged,
    )
