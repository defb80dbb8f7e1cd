"""Image encoding, quality metrics, and file round-trips."""
import numpy as np
import pytest

from qcur.errors import FileFormatError, ParameterError, ShapeError
from qcur.imaging import (
    RgbImage,
    image_to_qmat,
    psnr,
    qmat_to_image,
    read_png,
    read_ppm,
    relative_error,
    ssim,
    write_png,
    write_ppm,
)
from qcur.quat import QMatrix, qmat_frobenius_norm

from helpers import random_qmatrix


def random_image(h, w, seed):
    rng = np.random.default_rng(seed)
    return RgbImage(*(rng.integers(0, 256, (h, w), dtype=np.uint8) for _ in range(3)))


def uniform_image(h, w, value):
    plane = np.full((h, w), value, dtype=np.uint8)
    return RgbImage(plane, plane.copy(), plane.copy())


class TestRgbImage:
    def test_dimensions(self):
        img = random_image(5, 7, seed=0)
        assert (img.height, img.width) == (5, 7)
        assert img.to_array().shape == (5, 7, 3)

    def test_channel_shape_mismatch(self):
        with pytest.raises(ShapeError):
            RgbImage(
                np.zeros((2, 2), dtype=np.uint8),
                np.zeros((2, 3), dtype=np.uint8),
                np.zeros((2, 2), dtype=np.uint8),
            )

    def test_dtype_enforced(self):
        with pytest.raises(ParameterError):
            RgbImage(np.zeros((2, 2)), np.zeros((2, 2)), np.zeros((2, 2)))

    def test_copies_and_freezes(self):
        src = np.zeros((2, 2), dtype=np.uint8)
        img = RgbImage(src, src.copy(), src.copy())
        src[0, 0] = 9
        assert img.r[0, 0] == 0
        with pytest.raises(ValueError):
            img.r[0, 0] = 1


class TestEncoding:
    def test_real_plane_zero(self):
        img = random_image(6, 4, seed=1)
        q = image_to_qmat(img)
        assert np.all(q.a0 == 0.0)
        assert np.array_equal(q.a1, img.r.astype(np.float64))

    def test_single_pixel(self):
        img = RgbImage(
            np.array([[10]], dtype=np.uint8),
            np.array([[20]], dtype=np.uint8),
            np.array([[30]], dtype=np.uint8),
        )
        entry = image_to_qmat(img)[0, 0]
        assert (entry.a0, entry.a1, entry.a2, entry.a3) == (0.0, 10.0, 20.0, 30.0)

    def test_energy_preserved(self):
        img = random_image(9, 9, seed=2)
        q = image_to_qmat(img)
        channel_energy = sum(
            float(np.sum(c.astype(np.float64) ** 2)) for c in (img.r, img.g, img.b)
        )
        assert qmat_frobenius_norm(q) ** 2 == pytest.approx(channel_energy, rel=1e-10)

    def test_round_trip_identity(self):
        for seed in range(5):
            img = random_image(8, 8, seed=seed)
            back = qmat_to_image(image_to_qmat(img))
            assert np.array_equal(back.to_array(), img.to_array())

    def test_clamp_and_round(self):
        q = QMatrix(
            np.array([[0.0]]),
            np.array([[300.0]]),
            np.array([[-5.0]]),
            np.array([[128.5]]),
        )
        img = qmat_to_image(q)
        assert (img.r[0, 0], img.g[0, 0], img.b[0, 0]) == (255, 0, 128)

    def test_half_to_even(self):
        q = QMatrix(
            np.array([[0.0, 0.0]]),
            np.array([[127.5, 126.5]]),
            np.array([[0.5, 1.5]]),
            np.array([[254.5, 2.5]]),
        )
        img = qmat_to_image(q)
        assert img.r.tolist() == [[128, 126]]
        assert img.g.tolist() == [[0, 2]]
        assert img.b.tolist() == [[254, 2]]

    def test_real_plane_discarded(self):
        q = QMatrix(
            np.array([[999.0]]),
            np.array([[1.0]]),
            np.array([[2.0]]),
            np.array([[3.0]]),
        )
        img = qmat_to_image(q)
        assert (img.r[0, 0], img.g[0, 0], img.b[0, 0]) == (1, 2, 3)


class TestPsnr:
    def test_identical_is_infinite(self):
        img = random_image(12, 12, seed=3)
        assert psnr(img, img) == float("inf")

    def test_full_swing_is_zero(self):
        assert psnr(uniform_image(8, 8, 0), uniform_image(8, 8, 255)) == 0.0

    def test_uniform_offset(self):
        got = psnr(uniform_image(16, 16, 100), uniform_image(16, 16, 110))
        assert got == pytest.approx(10.0 * np.log10(255.0**2 / 100.0), rel=1e-12)

    def test_symmetric(self):
        a = random_image(10, 10, seed=4)
        b = random_image(10, 10, seed=5)
        assert psnr(a, b) == psnr(b, a)

    def test_size_mismatch(self):
        with pytest.raises(ShapeError):
            psnr(uniform_image(8, 8, 0), uniform_image(8, 9, 0))


class TestSsim:
    def test_self_similarity(self):
        img = random_image(20, 20, seed=6)
        assert ssim(img, img) == pytest.approx(1.0, abs=1e-12)

    def test_constant_images_closed_form(self):
        c1 = (0.01 * 255.0) ** 2
        got = ssim(uniform_image(16, 16, 0), uniform_image(16, 16, 255))
        assert got == pytest.approx(c1 / (255.0**2 + c1), rel=1e-10)

    def test_symmetric(self):
        a = random_image(15, 18, seed=7)
        b = random_image(15, 18, seed=8)
        assert ssim(a, b) == pytest.approx(ssim(b, a), abs=1e-12)

    def test_bounded(self):
        for seed in range(4):
            a = random_image(14, 14, seed=seed)
            b = random_image(14, 14, seed=seed + 100)
            assert -1.0 <= ssim(a, b) <= 1.0

    def test_noise_degrades(self):
        rng = np.random.default_rng(9)
        base = rng.integers(60, 190, (24, 24), dtype=np.uint8)
        img = RgbImage(base, base.copy(), base.copy())
        noisy_plane = (base.astype(np.int64) + rng.integers(-40, 41, base.shape)).clip(
            0, 255
        ).astype(np.uint8)
        noisy = RgbImage(noisy_plane, base.copy(), base.copy())
        assert ssim(img, noisy) < 0.95

    def test_too_small_rejected(self):
        with pytest.raises(ParameterError):
            ssim(uniform_image(10, 40, 5), uniform_image(10, 40, 5))

    def test_size_mismatch(self):
        with pytest.raises(ShapeError):
            ssim(uniform_image(16, 16, 0), uniform_image(16, 17, 0))


class TestRelativeError:
    def test_exact_match(self):
        x = random_qmatrix(np.random.default_rng(10), 5, 4)
        assert relative_error(x, x) == 0.0

    def test_doubled(self):
        x = random_qmatrix(np.random.default_rng(11), 5, 4)
        assert relative_error(x + x, x) == pytest.approx(1.0, rel=1e-12)

    def test_known_perturbation(self):
        x = random_qmatrix(np.random.default_rng(12), 6, 6)
        e = random_qmatrix(np.random.default_rng(13), 6, 6, scale=1e-3)
        expect = qmat_frobenius_norm(e) / qmat_frobenius_norm(x)
        assert relative_error(x + e, x) == pytest.approx(expect, rel=1e-10)

    def test_zero_reference(self):
        x = random_qmatrix(np.random.default_rng(14), 3, 3)
        with pytest.raises(ParameterError):
            relative_error(x, QMatrix.zeros(3, 3))

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            relative_error(QMatrix.zeros(2, 3), QMatrix.zeros(3, 2))


class TestPngIO:
    def test_round_trip(self, tmp_path):
        img = random_image(13, 17, seed=15)
        path = tmp_path / "img.png"
        write_png(img, path)
        back = read_png(path)
        assert np.array_equal(back.to_array(), img.to_array())

    def test_grayscale_rejected(self, tmp_path):
        from PIL import Image

        path = tmp_path / "gray.png"
        Image.fromarray(np.zeros((8, 8), dtype=np.uint8), mode="L").save(path)
        with pytest.raises(FileFormatError):
            read_png(path)

    def test_alpha_rejected(self, tmp_path):
        from PIL import Image

        path = tmp_path / "rgba.png"
        Image.fromarray(np.zeros((8, 8, 4), dtype=np.uint8), mode="RGBA").save(path)
        with pytest.raises(FileFormatError):
            read_png(path)


class TestPpmIO:
    def test_round_trip(self, tmp_path):
        img = random_image(11, 9, seed=16)
        path = tmp_path / "img.ppm"
        write_ppm(img, path)
        back = read_ppm(path)
        assert np.array_equal(back.to_array(), img.to_array())

    def test_header_layout(self, tmp_path):
        img = uniform_image(2, 3, 7)
        path = tmp_path / "tiny.ppm"
        write_ppm(img, path)
        data = path.read_bytes()
        assert data.startswith(b"P6\n3 2\n255\n")
        assert len(data) == len(b"P6\n3 2\n255\n") + 18

    def test_comments_in_header(self, tmp_path):
        path = tmp_path / "commented.ppm"
        raster = bytes(range(12))
        path.write_bytes(b"P6 # binary pixmap\n2 # width\n2\n255\n" + raster)
        img = read_ppm(path)
        assert (img.height, img.width) == (2, 2)
        assert img.r[0, 0] == 0 and img.b[1, 1] == 11

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "ascii.ppm"
        path.write_bytes(b"P3\n1 1\n255\n0 0 0\n")
        with pytest.raises(FileFormatError):
            read_ppm(path)

    def test_wide_samples_rejected(self, tmp_path):
        path = tmp_path / "deep.ppm"
        path.write_bytes(b"P6\n1 1\n65535\n" + bytes(6))
        with pytest.raises(FileFormatError):
            read_ppm(path)

    def test_truncated_raster(self, tmp_path):
        path = tmp_path / "short.ppm"
        path.write_bytes(b"P6\n2 2\n255\n" + bytes(5))
        with pytest.raises(FileFormatError):
            read_ppm(path)
