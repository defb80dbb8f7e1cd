"""Quaternion SVD, pseudoinverse, and norms through the complex adjoint.

A quaternion matrix A = A0 + A1*i + A2*j + A3*k splits as A = Aa + Ab*j with
complex planes Aa = A0 + A1*i and Ab = A2 + A3*i.  Its complex adjoint is the
2m-by-2n block matrix

    chi(A) = [[ Aa,        Ab       ],
              [-conj(Ab),  conj(Aa) ]]

which satisfies chi(AB) = chi(A) chi(B) and chi(A^H) = chi(A)^H.  Each
singular value of A appears exactly twice among the singular values of
chi(A), so the quaternion SVD can be recovered from a dense complex SVD:
take one value per pair and pull each singular vector back through the
column embedding [xa; -conj(xb)] <-> xa + xb*j.

Equal singular values are the delicate part.  Within a tied group the
complex SVD may hand back vectors that collapse onto a single quaternion
direction, so pair groups are detected, their mapped-back candidates are
re-orthonormalized with pivoted modified Gram-Schmidt, and both factors get
a final Gram-Schmidt polish.  The dense complex SVD itself is delegated to
LAPACK via numpy; everything quaternion-specific lives here.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, ShapeError
from .quat import QMatrix

__all__ = [
    "ComplexAdjoint",
    "QSVDResult",
    "to_complex_adjoint",
    "qsvd",
    "pseudoinverse",
    "spectral_norm",
    "numerical_rank",
    "lowrank_truncate",
    "orthonormalize_columns",
    "save_qsvd",
]

_EPS = float(np.finfo(np.float64).eps)


# ---------------------------------------------------------------------------
# Cayley-Dickson helpers: a quaternion matrix as the complex pair (Xa, Xb)
# ---------------------------------------------------------------------------

def _cd_from_qmat(x: QMatrix) -> tuple[np.ndarray, np.ndarray]:
    a0, a1, a2, a3 = x.planes
    return a0 + 1j * a1, a2 + 1j * a3


def _qmat_from_cd(xa: np.ndarray, xb: np.ndarray) -> QMatrix:
    return QMatrix._wrap(
        np.ascontiguousarray(xa.real),
        np.ascontiguousarray(xa.imag),
        np.ascontiguousarray(xb.real),
        np.ascontiguousarray(xb.imag),
    )


def _cd_matmul(aa, ab, ba, bb) -> tuple[np.ndarray, np.ndarray]:
    return aa @ ba - ab @ np.conj(bb), aa @ bb + ab @ np.conj(ba)


def _cd_conj_transpose(xa, xb) -> tuple[np.ndarray, np.ndarray]:
    return xa.conj().T, -xb.T


def _cd_dots(wa, wb, xa, xb) -> tuple[np.ndarray, np.ndarray]:
    """Quaternion inner products <w_c, x> for every column c of (wa, wb)."""
    qa = wa.conj().T @ xa + np.conj(wb.conj().T @ xb)
    qb = wa.conj().T @ xb - np.conj(wb.conj().T @ xa)
    return qa, qb


def _cd_subtract_combo(wa, wb, xa, xb, qa, qb) -> tuple[np.ndarray, np.ndarray]:
    """x minus sum_c w_c q_c."""
    return (
        xa - (wa @ qa - wb @ np.conj(qb)),
        xb - (wa @ qb + wb @ np.conj(qa)),
    )


def _cd_col_norm(xa, xb) -> float:
    return float(np.sqrt(np.sum(xa.real**2 + xa.imag**2 + xb.real**2 + xb.imag**2)))


class _OrthBuilder:
    """Accumulates quaternion-orthonormal columns with twice-applied MGS."""

    def __init__(self, dim: int, capacity: int):
        self.wa = np.zeros((dim, capacity), dtype=np.complex128)
        self.wb = np.zeros((dim, capacity), dtype=np.complex128)
        self.count = 0

    def residual(self, xa, xb) -> tuple[np.ndarray, np.ndarray, float]:
        for _ in range(2):
            if self.count:
                head_a = self.wa[:, : self.count]
                head_b = self.wb[:, : self.count]
                qa, qb = _cd_dots(head_a, head_b, xa, xb)
                xa, xb = _cd_subtract_combo(head_a, head_b, xa, xb, qa, qb)
        return xa, xb, _cd_col_norm(xa, xb)

    def push(self, xa, xb, norm: float) -> None:
        self.wa[:, self.count] = xa / norm
        self.wb[:, self.count] = xb / norm
        self.count += 1

    def matrices(self) -> tuple[np.ndarray, np.ndarray]:
        return self.wa[:, : self.count], self.wb[:, : self.count]


def _polish(wa: np.ndarray, wb: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """One full re-orthonormalization sweep, leading columns first."""
    dim, cols = wa.shape
    out = _OrthBuilder(dim, cols)
    for c in range(cols):
        xa, xb, nr = out.residual(wa[:, c].copy(), wb[:, c].copy())
        if nr <= 0.0:
            raise ParameterError("orthonormalization collapsed; columns are dependent")
        out.push(xa, xb, nr)
    return out.matrices()


# ---------------------------------------------------------------------------
# complex adjoint
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ComplexAdjoint:
    """The 2m-by-2n complex image of an m-by-n quaternion matrix."""

    matrix: np.ndarray
    source_rows: int
    source_cols: int

    def __post_init__(self) -> None:
        self.matrix.setflags(write=False)

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape


def to_complex_adjoint(a: QMatrix) -> ComplexAdjoint:
    """Build chi(A) with the exact block arithmetic from the module docstring.

    The lower blocks are the negated / plain conjugates of the upper ones,
    so the block relations hold bit-for-bit, not just to rounding.
    """
    aa, ab = _cd_from_qmat(a)
    m, n = a.shape
    chi = np.empty((2 * m, 2 * n), dtype=np.complex128)
    chi[:m, :n] = aa
    chi[:m, n:] = ab
    chi[m:, :n] = -np.conj(ab)
    chi[m:, n:] = np.conj(aa)
    return ComplexAdjoint(chi, m, n)


def _adjoint_array(a: QMatrix) -> np.ndarray:
    aa, ab = _cd_from_qmat(a)
    m, n = a.shape
    chi = np.empty((2 * m, 2 * n), dtype=np.complex128)
    chi[:m, :n] = aa
    chi[:m, n:] = ab
    chi[m:, :n] = -np.conj(ab)
    chi[m:, n:] = np.conj(aa)
    return chi


def _embedded_column(stack: np.ndarray, col: int, half: int) -> tuple[np.ndarray, np.ndarray]:
    """Pull one complex 2h-vector back to a quaternion h-vector (CD pair)."""
    return stack[:half, col].copy(), -np.conj(stack[half:, col])


# ---------------------------------------------------------------------------
# QSVD
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QSVDResult:
    """Economy quaternion SVD factors A ~ W diag(sigma) V^H."""

    w: QMatrix
    sigma: np.ndarray
    v: QMatrix

    def __post_init__(self) -> None:
        sig = np.array(self.sigma, dtype=np.float64, copy=True)
        sig.setflags(write=False)
        object.__setattr__(self, "sigma", sig)
        if sig.ndim != 1:
            raise ShapeError("sigma must be 1-D")
        if self.w.cols != sig.size or self.v.cols != sig.size:
            raise ShapeError("factor widths disagree with sigma length")

    @property
    def rank_used(self) -> int:
        return int(self.sigma.size)

    def reconstruct(self) -> QMatrix:
        return self.w.scale_columns(self.sigma) @ self.v.conj_transpose()


def _group_pairs(paired: np.ndarray, gap_tol: float, width_cap: float) -> list[list[int]]:
    """Cluster pair-deduplicated singular values into tied groups."""
    groups: list[list[int]] = []
    cur = [0]
    for p in range(1, paired.size):
        if paired[p - 1] - paired[p] <= gap_tol and paired[cur[0]] - paired[p] <= width_cap:
            cur.append(p)
        else:
            groups.append(cur)
            cur = [p]
    groups.append(cur)
    return groups


def qsvd(a: QMatrix, k: int | None = None) -> QSVDResult:
    """Quaternion singular value decomposition via the complex adjoint.

    Parameters
    ----------
    a : QMatrix
    k : int, optional
        If given, only the leading k triples are formed (1 <= k <= min(m, n));
        the result is then the best rank-k approximation.  Default: the full
        economy decomposition with min(m, n) triples.

    Returns
    -------
    QSVDResult
        W (m-by-r) and V (n-by-r) with quaternion-orthonormal columns and
        sigma sorted nonincreasing, r = k or min(m, n).
    """
    m, n = a.shape
    r_full = min(m, n)
    if k is None:
        k = r_full
    else:
        k = int(k)
        if not 1 <= k <= r_full:
            raise ParameterError(f"k={k} outside 1..min(m,n)={r_full}")

    chi = _adjoint_array(a)
    u_c, s_c, vh_c = np.linalg.svd(chi, full_matrices=False)
    v_c = vh_c.conj().T
    sigma = np.ascontiguousarray(s_c[0::2])

    if s_c[0] == 0.0:
        w = _qmat_from_cd(np.eye(m, k, dtype=np.complex128), np.zeros((m, k), np.complex128))
        v = _qmat_from_cd(np.eye(n, k, dtype=np.complex128), np.zeros((n, k), np.complex128))
        return QSVDResult(w, sigma[:k], v)

    smax = float(s_c[0])
    dim_factor = max(2 * m, 2 * n)
    gap_tol = 32.0 * dim_factor * _EPS * smax
    width_cap = 8.0 * gap_tol
    zero_tol = dim_factor * _EPS * smax

    paired = s_c.reshape(-1, 2).mean(axis=1)
    groups = _group_pairs(paired, gap_tol, width_cap)

    w_build = _OrthBuilder(m, k)
    v_build = _OrthBuilder(n, k)
    aha, ahb = _cd_conj_transpose(*_cd_from_qmat(a))

    for grp in groups:
        if w_build.count >= k:
            break
        sbar = float(paired[grp[0]])
        if sbar <= zero_tol:
            break
        cols = [2 * p + off for p in grp for off in (0, 1)]
        if len(grp) == 1:
            c = cols[0]
            xa, xb, nr = w_build.residual(*_embedded_column(u_c, c, m))
            w_build.push(xa, xb, nr)
            ya, yb, nv = v_build.residual(*_embedded_column(v_c, c, n))
            v_build.push(ya, yb, nv)
        else:
            # tied group: candidates can alias one quaternion direction, so
            # pick survivors by largest residual and derive V through A^H
            remaining = [_embedded_column(u_c, c, m) for c in cols]
            need = min(len(grp), k - w_build.count)
            for _ in range(need):
                residuals = [w_build.residual(xa.copy(), xb.copy()) for xa, xb in remaining]
                best = int(np.argmax([nr for _, _, nr in residuals]))
                xa, xb, nr = residuals[best]
                w_build.push(xa, xb, nr)
                remaining.pop(best)
                wa_new = w_build.wa[:, w_build.count - 1]
                wb_new = w_build.wb[:, w_build.count - 1]
                va, vb = _cd_matmul(aha, ahb, wa_new[:, None], wb_new[:, None])
                ya, yb, nv = v_build.residual(va[:, 0], vb[:, 0])
                v_build.push(ya, yb, nv)

    _complete_basis(w_build, u_c, m, k)
    _complete_basis(v_build, v_c, n, k)

    wa, wb = _polish(*w_build.matrices())
    va, vb = _polish(*v_build.matrices())
    return QSVDResult(_qmat_from_cd(wa, wb), sigma[:k], _qmat_from_cd(va, vb))


def _complete_basis(builder: _OrthBuilder, stack: np.ndarray, dim: int, k: int) -> None:
    """Fill remaining slots from leftover embedded columns, then unit vectors."""
    col = 0
    total = stack.shape[1]
    canonical = 0
    while builder.count < k:
        if col < total:
            xa, xb = _embedded_column(stack, col, dim)
            col += 1
        elif canonical < dim:
            xa = np.zeros(dim, np.complex128)
            xb = np.zeros(dim, np.complex128)
            xa[canonical] = 1.0
            canonical += 1
        else:
            raise ParameterError("failed to complete an orthonormal basis")
        ra, rb, nr = builder.residual(xa, xb)
        if nr > 1e-3:
            builder.push(ra, rb, nr)


# ---------------------------------------------------------------------------
# derived operations
# ---------------------------------------------------------------------------

def _default_cutoff(a: QMatrix, smax: float) -> float:
    return _EPS * max(a.shape) * smax


def _adjoint_singular_values(a: QMatrix) -> np.ndarray:
    return np.linalg.svd(_adjoint_array(a), compute_uv=False)


def pseudoinverse(a: QMatrix, tol: float | None = None) -> QMatrix:
    """Moore-Penrose pseudoinverse from the QSVD.

    Singular values at or below the cutoff are dropped.  The default cutoff
    is eps * max(m, n) * sigma_max, the usual dense-LAPACK convention.
    """
    res = qsvd(a)
    smax = float(res.sigma[0])
    if smax == 0.0:
        return QMatrix.zeros(a.cols, a.rows)
    cutoff = _default_cutoff(a, smax) if tol is None else float(tol)
    if cutoff < 0:
        raise ParameterError(f"tol must be nonnegative, got {tol}")
    keep = res.sigma > cutoff
    inv = np.zeros(res.sigma.shape)
    inv[keep] = 1.0 / res.sigma[keep]
    return res.v.scale_columns(inv) @ res.w.conj_transpose()


def spectral_norm(a: QMatrix) -> float:
    """Largest singular value (operator 2-norm over right scalar action)."""
    return float(_adjoint_singular_values(a)[0])


def numerical_rank(a: QMatrix, tol: float | None = None) -> int:
    """Number of singular values above the pseudoinverse cutoff."""
    sigma = _adjoint_singular_values(a)[0::2]
    smax = float(sigma[0])
    if smax == 0.0:
        return 0
    cutoff = _default_cutoff(a, smax) if tol is None else float(tol)
    return int(np.sum(sigma > cutoff))


def lowrank_truncate(a: QMatrix, k: int) -> QMatrix:
    """Best rank-k approximation W_k diag(sigma_k) V_k^H."""
    return qsvd(a, k).reconstruct()


def orthonormalize_columns(a: QMatrix) -> QMatrix:
    """Gram-Schmidt (applied twice) over the columns, right-module convention.

    Raises
    ------
    ParameterError
        If the columns are linearly dependent to working precision.
    """
    m, n = a.shape
    if n > m:
        raise ShapeError(f"cannot orthonormalize {n} columns in dimension {m}")
    xa, xb = _cd_from_qmat(a)
    builder = _OrthBuilder(m, n)
    scale = max(_cd_col_norm(xa, xb), 1.0)
    for c in range(n):
        ra, rb, nr = builder.residual(xa[:, c].copy(), xb[:, c].copy())
        if nr <= 1e-12 * scale:
            raise ParameterError(f"column {c} is numerically dependent on earlier columns")
        builder.push(ra, rb, nr)
    return _qmat_from_cd(*builder.matrices())


def save_qsvd(result: QSVDResult, directory) -> None:
    """Write W and V as .qmat files plus sigma as a plain-text list."""
    from pathlib import Path

    from .quat import write_qmat

    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    write_qmat(result.w, out / "w.qmat")
    write_qmat(result.v, out / "v.qmat")
    with open(out / "sigma.txt", "w") as fh:
        for s in result.sigma:
            fh.write(f"{s:.17g}\n")
