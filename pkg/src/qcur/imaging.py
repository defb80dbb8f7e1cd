"""RGB images as pure quaternion matrices, plus fidelity metrics and I/O.

A color image maps to a matrix whose real plane is identically zero and
whose three imaginary planes hold the red, green, and blue channels.  The
metrics (PSNR, single-scale SSIM, relative Frobenius error) follow the
standard 8-bit conventions: peak 255, mean squared error pooled over all
channel samples, SSIM with the reference 11x11 Gaussian window and then
averaged across channels.  File I/O covers 8-bit RGB PNG via Pillow and
binary PPM (P6) as a dependency-light fallback; both round-trip losslessly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from PIL import Image
from scipy.signal import convolve2d

from .errors import FileFormatError, ParameterError, ShapeError
from .quat import QMatrix, qmat_frobenius_norm

__all__ = [
    "RgbImage",
    "image_to_qmat",
    "qmat_to_image",
    "psnr",
    "ssim",
    "relative_error",
    "read_png",
    "write_png",
    "read_ppm",
    "write_ppm",
]

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
_C1 = (0.01 * 255.0) ** 2
_C2 = (0.03 * 255.0) ** 2


@dataclass(frozen=True)
class RgbImage:
    """Three 8-bit channel planes of equal shape."""

    r: np.ndarray
    g: np.ndarray
    b: np.ndarray

    def __post_init__(self) -> None:
        planes = []
        for name in ("r", "g", "b"):
            arr = np.asarray(getattr(self, name))
            if arr.dtype != np.uint8:
                raise ParameterError(f"channel {name} must be uint8, got {arr.dtype}")
            if arr.ndim != 2 or arr.size == 0:
                raise ShapeError(f"channel {name} must be a non-empty 2-D array")
            arr = arr.copy()
            arr.setflags(write=False)
            planes.append(arr)
        if not (planes[0].shape == planes[1].shape == planes[2].shape):
            raise ShapeError("channel shapes disagree")
        for name, arr in zip(("r", "g", "b"), planes):
            object.__setattr__(self, name, arr)

    @property
    def height(self) -> int:
        return self.r.shape[0]

    @property
    def width(self) -> int:
        return self.r.shape[1]

    def to_array(self) -> np.ndarray:
        """Interleaved height x width x 3 uint8 array."""
        return np.stack([self.r, self.g, self.b], axis=-1)


def image_to_qmat(img: RgbImage) -> QMatrix:
    """Encode channels into the imaginary planes; the real plane is zero."""
    shape = (img.height, img.width)
    return QMatrix(
        np.zeros(shape),
        img.r.astype(np.float64),
        img.g.astype(np.float64),
        img.b.astype(np.float64),
    )


def qmat_to_image(a: QMatrix) -> RgbImage:
    """Decode imaginary planes to 8-bit channels; the real plane is dropped.

    Values are clamped to [0, 255] first, then rounded half-to-even, so any
    real-valued reconstruction yields a valid image.
    """
    channels = [
        np.rint(np.clip(p, 0.0, 255.0)).astype(np.uint8)
        for p in (a.a1, a.a2, a.a3)
    ]
    return RgbImage(*channels)


def _check_same_size(ref: RgbImage, test: RgbImage) -> None:
    if (ref.height, ref.width) != (test.height, test.width):
        raise ShapeError(
            f"image sizes ({ref.height}, {ref.width}) and "
            f"({test.height}, {test.width}) disagree"
        )


def psnr(ref: RgbImage, test: RgbImage) -> float:
    """Peak signal-to-noise ratio in dB, peak 255, MSE pooled over channels.

    Identical images return positive infinity.
    """
    _check_same_size(ref, test)
    total = 0.0
    for a, b in zip(ref.to_array().transpose(2, 0, 1), test.to_array().transpose(2, 0, 1)):
        diff = a.astype(np.float64) - b.astype(np.float64)
        total += float(np.sum(diff * diff))
    mse = total / (3 * ref.height * ref.width)
    if mse == 0.0:
        return float("inf")
    return 10.0 * math.log10(255.0**2 / mse)


def _gaussian_window() -> np.ndarray:
    offsets = np.arange(SSIM_WINDOW) - (SSIM_WINDOW - 1) / 2.0
    g = np.exp(-(offsets**2) / (2.0 * SSIM_SIGMA**2))
    window = np.outer(g, g)
    return window / window.sum()


def _ssim_channel(x: np.ndarray, y: np.ndarray, window: np.ndarray) -> float:
    mu_x = convolve2d(x, window, mode="valid")
    mu_y = convolve2d(y, window, mode="valid")
    mu_xx = mu_x * mu_x
    mu_yy = mu_y * mu_y
    mu_xy = mu_x * mu_y
    var_x = convolve2d(x * x, window, mode="valid") - mu_xx
    var_y = convolve2d(y * y, window, mode="valid") - mu_yy
    cov = convolve2d(x * y, window, mode="valid") - mu_xy
    score = ((2.0 * mu_xy + _C1) * (2.0 * cov + _C2)) / (
        (mu_xx + mu_yy + _C1) * (var_x + var_y + _C2)
    )
    return float(score.mean())


def ssim(ref: RgbImage, test: RgbImage) -> float:
    """Single-scale structural similarity, averaged over the three channels.

    Uses the reference parameterization: 11x11 Gaussian window with std
    1.5, stabilizers (0.01*255)^2 and (0.03*255)^2, statistics over fully
    covered windows only.
    """
    _check_same_size(ref, test)
    if min(ref.height, ref.width) < SSIM_WINDOW:
        raise ParameterError(
            f"image must be at least {SSIM_WINDOW}x{SSIM_WINDOW} "
            f"for the SSIM window, got ({ref.height}, {ref.width})"
        )
    window = _gaussian_window()
    scores = [
        _ssim_channel(a.astype(np.float64), b.astype(np.float64), window)
        for a, b in zip((ref.r, ref.g, ref.b), (test.r, test.g, test.b))
    ]
    return float(np.mean(scores))


def relative_error(b: QMatrix, x: QMatrix) -> float:
    """Frobenius-relative distance of an approximation from its reference."""
    if b.shape != x.shape:
        raise ShapeError(f"shapes {b.shape} and {x.shape} disagree")
    scale = qmat_frobenius_norm(x)
    if scale == 0.0:
        raise ParameterError("reference matrix is zero; relative error undefined")
    return qmat_frobenius_norm(b - x) / scale


def read_png(path) -> RgbImage:
    """Load an 8-bit RGB PNG; anything else (grayscale, alpha) is refused."""
    with Image.open(path) as handle:
        if handle.mode != "RGB":
            raise FileFormatError(
                f"expected an 8-bit RGB image, got mode {handle.mode!r}"
            )
        data = np.asarray(handle, dtype=np.uint8)
    return RgbImage(data[:, :, 0], data[:, :, 1], data[:, :, 2])


def write_png(img: RgbImage, path) -> None:
    Image.fromarray(img.to_array(), mode="RGB").save(path, format="PNG")


def _read_ppm_token(data: bytes, pos: int) -> tuple[bytes, int]:
    """Next whitespace-delimited header token, skipping # comments."""
    while pos < len(data):
        ch = data[pos : pos + 1]
        if ch.isspace():
            pos += 1
        elif ch == b"#":
            while pos < len(data) and data[pos : pos + 1] != b"\n":
                pos += 1
        else:
            break
    start = pos
    while pos < len(data) and not data[pos : pos + 1].isspace():
        pos += 1
    if start == pos:
        raise FileFormatError("truncated header")
    return data[start:pos], pos


def read_ppm(path) -> RgbImage:
    """Load a binary (P6) PPM with 8-bit samples."""
    with open(path, "rb") as fh:
        data = fh.read()
    magic, pos = _read_ppm_token(data, 0)
    if magic != b"P6":
        raise FileFormatError(f"expected P6 magic, got {magic!r}")
    fields = []
    for _ in range(3):
        token, pos = _read_ppm_token(data, pos)
        if not token.isdigit():
            raise FileFormatError(f"non-numeric header field {token!r}")
        fields.append(int(token))
    width, height, maxval = fields
    if width < 1 or height < 1:
        raise FileFormatError(f"bad dimensions {width}x{height}")
    if maxval != 255:
        raise FileFormatError(f"only 8-bit samples supported, got maxval {maxval}")
    pos += 1  # single whitespace byte separates header from raster
    expected = 3 * width * height
    raster = data[pos : pos + expected]
    if len(raster) != expected:
        raise FileFormatError(
            f"raster holds {len(raster)} bytes, expected {expected}"
        )
    pixels = np.frombuffer(raster, dtype=np.uint8).reshape(height, width, 3)
    return RgbImage(pixels[:, :, 0], pixels[:, :, 1], pixels[:, :, 2])


def write_ppm(img: RgbImage, path) -> None:
    header = f"P6\n{img.width} {img.height}\n255\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(img.to_array().tobytes())
