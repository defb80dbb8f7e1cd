"""Quaternion scalars and dense quaternion matrices stored as real planes.

A quaternion a0 + a1*i + a2*j + a3*k follows the Hamilton convention

    i*i = j*j = k*k = -1,   i*j = k,   j*k = i,   k*i = j,

with the reversed products picking up a sign.  Matrices keep the four
components as separate real float64 planes so that products reduce to real
BLAS calls; see :func:`qmat_matmul`.

The ``.qmat`` container is a fixed little-endian layout: the 6-byte magic
``QMAT1\\x00``, two unsigned 64-bit dimensions (rows then columns), then the
four planes in component order, each row-major float64 with no padding.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import FileFormatError, ShapeError

__all__ = [
    "Quaternion",
    "QMatrix",
    "qmat_matmul",
    "qmat_conj_transpose",
    "qmat_frobenius_norm",
    "read_qmat",
    "write_qmat",
    "QMAT_MAGIC",
]

QMAT_MAGIC = b"QMAT1\x00"


@dataclass(frozen=True)
class Quaternion:
    """Immutable scalar quaternion with float64 components."""

    a0: float = 0.0
    a1: float = 0.0
    a2: float = 0.0
    a3: float = 0.0

    def __post_init__(self) -> None:
        for name in ("a0", "a1", "a2", "a3"):
            object.__setattr__(self, name, float(getattr(self, name)))

    def __add__(self, other: "Quaternion | float | int") -> "Quaternion":
        o = _as_quaternion(other)
        return Quaternion(self.a0 + o.a0, self.a1 + o.a1, self.a2 + o.a2, self.a3 + o.a3)

    __radd__ = __add__

    def __sub__(self, other: "Quaternion | float | int") -> "Quaternion":
        o = _as_quaternion(other)
        return Quaternion(self.a0 - o.a0, self.a1 - o.a1, self.a2 - o.a2, self.a3 - o.a3)

    def __rsub__(self, other: "Quaternion | float | int") -> "Quaternion":
        return _as_quaternion(other) - self

    def __neg__(self) -> "Quaternion":
        return Quaternion(-self.a0, -self.a1, -self.a2, -self.a3)

    def __mul__(self, other: "Quaternion | float | int") -> "Quaternion":
        o = _as_quaternion(other)
        a0, a1, a2, a3 = self.a0, self.a1, self.a2, self.a3
        b0, b1, b2, b3 = o.a0, o.a1, o.a2, o.a3
        return Quaternion(
            a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
            a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
            a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
            a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
        )

    def __rmul__(self, other: "float | int") -> "Quaternion":
        # real scalars commute; general quaternions must use the left factor's __mul__
        return _as_quaternion(other) * self

    def conjugate(self) -> "Quaternion":
        return Quaternion(self.a0, -self.a1, -self.a2, -self.a3)

    def modulus(self) -> float:
        return float(np.sqrt(self.a0**2 + self.a1**2 + self.a2**2 + self.a3**2))

    __abs__ = modulus

    def is_pure(self) -> bool:
        return self.a0 == 0.0

    def components(self) -> tuple[float, float, float, float]:
        return (self.a0, self.a1, self.a2, self.a3)


def _as_quaternion(value) -> Quaternion:
    if isinstance(value, Quaternion):
        return value
    if isinstance(value, (int, float, np.floating, np.integer)):
        return Quaternion(float(value))
    raise TypeError(f"cannot interpret {type(value).__name__} as a quaternion")


def _check_plane(arr: np.ndarray, name: str) -> None:
    if arr.ndim != 2:
        raise ShapeError(f"plane {name} must be 2-D, got ndim={arr.ndim}")


class QMatrix:
    """Dense m-by-n quaternion matrix held as four read-only float64 planes.

    Parameters
    ----------
    a0, a1, a2, a3 : array_like
        Real component planes, all with the same 2-D shape.  Values are
        converted to float64 and copied; instances never alias caller data.

    Raises
    ------
    ShapeError
        If the planes disagree in shape, are not 2-D, or either dimension
        is zero.  Empty matrices are rejected outright rather than being
        propagated into the linear algebra.
    """

    __slots__ = ("_a0", "_a1", "_a2", "_a3")

    def __init__(self, a0, a1, a2, a3):
        planes = []
        for name, p in zip("a0 a1 a2 a3".split(), (a0, a1, a2, a3)):
            arr = np.array(p, dtype=np.float64, order="C", copy=True)
            _check_plane(arr, name)
            planes.append(arr)
        shape = planes[0].shape
        for name, p in zip("a1 a2 a3".split(), planes[1:]):
            if p.shape != shape:
                raise ShapeError(f"plane {name} has shape {p.shape}, expected {shape}")
        if shape[0] == 0 or shape[1] == 0:
            raise ShapeError(f"degenerate matrix shape {shape}")
        for p in planes:
            p.setflags(write=False)
        self._a0, self._a1, self._a2, self._a3 = planes

    # trusted constructor: wraps freshly computed arrays without copying
    @classmethod
    def _wrap(cls, a0: np.ndarray, a1: np.ndarray, a2: np.ndarray, a3: np.ndarray) -> "QMatrix":
        self = object.__new__(cls)
        planes = []
        for p in (a0, a1, a2, a3):
            arr = np.ascontiguousarray(p, dtype=np.float64)
            if arr is p and arr.flags.writeable:
                pass  # freshly computed, safe to freeze in place
            arr.setflags(write=False)
            planes.append(arr)
        self._a0, self._a1, self._a2, self._a3 = planes
        return self

    @classmethod
    def zeros(cls, m: int, n: int) -> "QMatrix":
        if m < 1 or n < 1:
            raise ShapeError(f"degenerate matrix shape ({m}, {n})")
        z = np.zeros((m, n))
        return cls._wrap(z, z.copy(), z.copy(), z.copy())

    @classmethod
    def eye(cls, n: int) -> "QMatrix":
        if n < 1:
            raise ShapeError(f"degenerate matrix shape ({n}, {n})")
        return cls._wrap(np.eye(n), np.zeros((n, n)), np.zeros((n, n)), np.zeros((n, n)))

    @classmethod
    def from_real(cls, arr) -> "QMatrix":
        a = np.array(arr, dtype=np.float64, copy=True)
        _check_plane(a, "a0")
        z = np.zeros_like(a)
        return cls(a, z, z, z)

    @property
    def a0(self) -> np.ndarray:
        return self._a0

    @property
    def a1(self) -> np.ndarray:
        return self._a1

    @property
    def a2(self) -> np.ndarray:
        return self._a2

    @property
    def a3(self) -> np.ndarray:
        return self._a3

    @property
    def planes(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        return (self._a0, self._a1, self._a2, self._a3)

    @property
    def shape(self) -> tuple[int, int]:
        return self._a0.shape

    @property
    def rows(self) -> int:
        return self._a0.shape[0]

    @property
    def cols(self) -> int:
        return self._a0.shape[1]

    def __getitem__(self, key) -> Quaternion:
        i, j = key
        return Quaternion(self._a0[i, j], self._a1[i, j], self._a2[i, j], self._a3[i, j])

    def take_rows(self, indices) -> "QMatrix":
        idx = np.asarray(indices, dtype=np.intp)
        if idx.ndim != 1 or idx.size == 0:
            raise ShapeError("row selection must be a non-empty 1-D index list")
        return QMatrix._wrap(*(p[idx, :].copy() for p in self.planes))

    def take_cols(self, indices) -> "QMatrix":
        idx = np.asarray(indices, dtype=np.intp)
        if idx.ndim != 1 or idx.size == 0:
            raise ShapeError("column selection must be a non-empty 1-D index list")
        return QMatrix._wrap(*(p[:, idx].copy() for p in self.planes))

    def __add__(self, other: "QMatrix") -> "QMatrix":
        self._check_same_shape(other)
        return QMatrix._wrap(*(p + q for p, q in zip(self.planes, other.planes)))

    def __sub__(self, other: "QMatrix") -> "QMatrix":
        self._check_same_shape(other)
        return QMatrix._wrap(*(p - q for p, q in zip(self.planes, other.planes)))

    def __neg__(self) -> "QMatrix":
        return QMatrix._wrap(*(-p for p in self.planes))

    def __mul__(self, scalar: float) -> "QMatrix":
        s = float(scalar)
        return QMatrix._wrap(*(p * s for p in self.planes))

    __rmul__ = __mul__

    def __matmul__(self, other: "QMatrix") -> "QMatrix":
        return qmat_matmul(self, other)

    def conj_transpose(self) -> "QMatrix":
        return qmat_conj_transpose(self)

    def frobenius_norm(self) -> float:
        return qmat_frobenius_norm(self)

    def scale_columns(self, weights) -> "QMatrix":
        """Multiply column j by the real weight w_j (real scalars commute)."""
        w = np.asarray(weights, dtype=np.float64)
        if w.shape != (self.cols,):
            raise ShapeError(f"expected {self.cols} column weights, got shape {w.shape}")
        return QMatrix._wrap(*(p * w for p in self.planes))

    def to_array(self) -> np.ndarray:
        """Stack the planes into a fresh (4, m, n) float64 array."""
        return np.stack(self.planes).copy()

    def _check_same_shape(self, other: "QMatrix") -> None:
        if not isinstance(other, QMatrix):
            raise TypeError(f"expected QMatrix, got {type(other).__name__}")
        if self.shape != other.shape:
            raise ShapeError(f"shape mismatch: {self.shape} vs {other.shape}")

    def __repr__(self) -> str:
        return f"QMatrix(shape={self.shape})"


def qmat_matmul(a: QMatrix, b: QMatrix) -> QMatrix:
    """Quaternion matrix product via 16 real matrix products.

    The component planes combine with the Hamilton sign pattern; each of
    the 16 terms is a plain real matmul, so the kernel inherits BLAS
    performance and its determinism for a fixed thread count.

    Raises
    ------
    ShapeError
        If inner dimensions disagree.
    """
    if not isinstance(b, QMatrix):
        raise TypeError(f"expected QMatrix, got {type(b).__name__}")
    if a.cols != b.rows:
        raise ShapeError(f"inner dimensions disagree: {a.shape} @ {b.shape}")
    a0, a1, a2, a3 = a.planes
    b0, b1, b2, b3 = b.planes
    c0 = a0 @ b0 - a1 @ b1 - a2 @ b2 - a3 @ b3
    c1 = a0 @ b1 + a1 @ b0 + a2 @ b3 - a3 @ b2
    c2 = a0 @ b2 - a1 @ b3 + a2 @ b0 + a3 @ b1
    c3 = a0 @ b3 + a1 @ b2 - a2 @ b1 + a3 @ b0
    return QMatrix._wrap(c0, c1, c2, c3)


def qmat_conj_transpose(a: QMatrix) -> QMatrix:
    """Conjugate transpose: transpose the planes and negate the imaginary ones."""
    a0, a1, a2, a3 = a.planes
    return QMatrix._wrap(a0.T.copy(), -a1.T, -a2.T, -a3.T)


def qmat_frobenius_norm(a: QMatrix) -> float:
    """Frobenius norm: the Euclidean norm of all 4*m*n real components."""
    return float(np.sqrt(sum(np.sum(p * p) for p in a.planes)))


def write_qmat(a: QMatrix, path) -> None:
    """Serialize to the ``.qmat`` layout described in the module docstring."""
    m, n = a.shape
    with open(path, "wb") as fh:
        fh.write(QMAT_MAGIC)
        fh.write(struct.pack("<QQ", m, n))
        for p in a.planes:
            fh.write(np.ascontiguousarray(p, dtype="<f8").tobytes())


def read_qmat(path) -> QMatrix:
    """Read a ``.qmat`` file, validating magic and exact payload size."""
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < len(QMAT_MAGIC) + 16:
        raise FileFormatError(f"{path}: truncated header")
    if data[: len(QMAT_MAGIC)] != QMAT_MAGIC:
        raise FileFormatError(f"{path}: bad magic {data[:6]!r}")
    m, n = struct.unpack_from("<QQ", data, len(QMAT_MAGIC))
    if m < 1 or n < 1:
        raise FileFormatError(f"{path}: degenerate dimensions ({m}, {n})")
    expected = len(QMAT_MAGIC) + 16 + 4 * m * n * 8
    if len(data) != expected:
        raise FileFormatError(
            f"{path}: payload is {len(data)} bytes, layout requires {expected}"
        )
    raw = np.frombuffer(data, dtype="<f8", offset=len(QMAT_MAGIC) + 16)
    planes = raw.reshape(4, m, n)
    return QMatrix._wrap(*(planes[s].astype(np.float64) for s in range(4)))
