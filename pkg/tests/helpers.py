"""Shared fixtures-in-spirit: oracles and random generators for the suite.

The matmul oracle multiplies entry by entry with scalar Quaternion
arithmetic and never touches the plane kernels it is used to check.
"""
from __future__ import annotations

import numpy as np

from qcur import QMatrix, Quaternion


def random_qmatrix(rng: np.random.Generator, m: int, n: int, scale: float = 1.0) -> QMatrix:
    return QMatrix(*(scale * rng.standard_normal((m, n)) for _ in range(4)))


def random_unit_qvector(rng: np.random.Generator, m: int) -> QMatrix:
    v = random_qmatrix(rng, m, 1)
    return v * (1.0 / v.frobenius_norm())


def naive_matmul(a: QMatrix, b: QMatrix) -> QMatrix:
    """Scalar-loop reference product, O(m*n*p) Quaternion multiplies."""
    m, p = a.shape
    p2, n = b.shape
    assert p == p2
    planes = [np.zeros((m, n)) for _ in range(4)]
    for r in range(m):
        for c in range(n):
            acc = Quaternion()
            for t in range(p):
                acc = acc + a[r, t] * b[t, c]
            for s, val in enumerate(acc.components()):
                planes[s][r, c] = val
    return QMatrix(*planes)


def max_abs_diff(a: QMatrix, b: QMatrix) -> float:
    return max(float(np.max(np.abs(pa - pb))) for pa, pb in zip(a.planes, b.planes))


def rel_fro_err(approx: QMatrix, exact: QMatrix) -> float:
    return (approx - exact).frobenius_norm() / exact.frobenius_norm()


def orthonormality_defect(w: QMatrix) -> float:
    """max |W^H W - I| over all components."""
    gram = w.conj_transpose() @ w
    k = w.cols
    eye = QMatrix.eye(k)
    return max_abs_diff(gram, eye)


def random_lowrank_product(rng: np.random.Generator, m: int, n: int, r: int) -> QMatrix:
    """Exactly rank-r (generically) as a product of two Gaussian factors."""
    return random_qmatrix(rng, m, r) @ random_qmatrix(rng, r, n)
