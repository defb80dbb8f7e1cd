"""End-to-end command-line runs over temporary files."""
import subprocess
import sys
from argparse import Namespace

import numpy as np
import pytest

from qcur.bench import CSV_HEADER, SyntheticSpec, random_lowrank
from qcur.cli import RunConfig, main, read_mask_png, write_mask_png
from qcur.completion import random_mask
from qcur.imaging import RgbImage, psnr, read_png, write_png
from qcur.quat import write_qmat


def smooth_image(h, w):
    """Low-rank smooth gradients, one outer product per channel."""
    rows = np.linspace(0.0, 1.0, h)
    cols = np.linspace(0.0, 1.0, w)
    r = np.outer(np.sin(3 * rows) + 1.2, np.cos(2 * cols) + 1.2)
    g = np.outer(rows + 0.4, 1.6 - cols)
    b = np.outer(np.cos(rows) + 0.2, cols + 0.5)
    channels = []
    for plane in (r, g, b):
        span = plane.max() - plane.min()
        channels.append(
            np.rint(255 * (plane - plane.min()) / span).astype(np.uint8)
        )
    return RgbImage(*channels)


@pytest.fixture
def qmat_file(tmp_path):
    x, _ = random_lowrank(SyntheticSpec(10, 8, 2, seed=77))
    path = tmp_path / "input.qmat"
    write_qmat(x, path)
    return path


@pytest.fixture
def png_file(tmp_path):
    path = tmp_path / "input.png"
    write_png(smooth_image(24, 24), path)
    return path


class TestApprox:
    def test_exact_factorization(self, qmat_file, tmp_path, capsys):
        out = tmp_path / "out"
        code = main(["approx", str(qmat_file), "--rank", "2", "--seed", "3", "--out", str(out)])
        assert code == 0
        for name in ("C.qmat", "U.qmat", "R.qmat", "reconstruction.qmat", "metrics.csv"):
            assert (out / name).is_file()
        header, row = (out / "metrics.csv").read_text().splitlines()
        assert header == "rel_err_fro,err_spec,time_s"
        rel_err, _, elapsed = (float(v) for v in row.split(","))
        assert rel_err <= 1e-8
        assert elapsed == 0.0

    def test_byte_reproducible(self, qmat_file, tmp_path):
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        for out in (out_a, out_b):
            assert main(["approx", str(qmat_file), "--rank", "2", "--seed", "9", "--out", str(out)]) == 0
        for name in ("C.qmat", "U.qmat", "R.qmat", "reconstruction.qmat", "metrics.csv"):
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes()

    def test_timing_flag(self, qmat_file, tmp_path):
        out = tmp_path / "timed"
        assert main(["approx", str(qmat_file), "--rank", "2", "--time", "--out", str(out)]) == 0
        row = (out / "metrics.csv").read_text().splitlines()[1]
        assert float(row.split(",")[2]) > 0.0

    def test_infeasible_rank(self, qmat_file, tmp_path, capsys):
        code = main(["approx", str(qmat_file), "--rank", "99", "--out", str(tmp_path / "x")])
        assert code == 2
        assert "exceeds" in capsys.readouterr().err

    def test_malformed_input(self, tmp_path, capsys):
        bad = tmp_path / "bad.qmat"
        bad.write_bytes(b"not a matrix at all")
        assert main(["approx", str(bad), "--rank", "1"]) == 2
        assert "error:" in capsys.readouterr().err

    def test_missing_input(self, tmp_path, capsys):
        assert main(["approx", str(tmp_path / "ghost.qmat"), "--rank", "1"]) == 2


class TestCompress:
    def test_three_methods(self, png_file, tmp_path):
        out = tmp_path / "out"
        assert main(["compress", str(png_file), "--rank", "4", "--seed", "1", "--out", str(out)]) == 0
        lines = (out / "metrics.csv").read_text().splitlines()
        assert lines[0] == "method,h,w,k,rel_err_fro,time_s"
        methods = [line.split(",")[0] for line in lines[1:]]
        assert methods == ["qmcur_length", "qmcur_uniform", "qsvd_truncated"]
        for method in methods:
            img = read_png(out / f"recon_{method}.png")
            assert (img.height, img.width) == (24, 24)

    def test_full_rank_truncation_is_faithful(self, png_file, tmp_path):
        out = tmp_path / "full"
        assert main(["compress", str(png_file), "--rank", "24", "--out", str(out)]) == 0
        original = read_png(png_file)
        recon = read_png(out / "recon_qsvd_truncated.png")
        assert psnr(original, recon) >= 50.0

    def test_rank_too_large(self, png_file, tmp_path, capsys):
        assert main(["compress", str(png_file), "--rank", "25", "--out", str(tmp_path / "x")]) == 2
        assert "outside" in capsys.readouterr().err

    def test_unsupported_format(self, tmp_path, capsys):
        weird = tmp_path / "img.bmp"
        weird.write_bytes(b"BM")
        assert main(["compress", str(weird), "--rank", "2"]) == 2


class TestComplete:
    def test_zero_missing_ratio_identity(self, png_file, tmp_path):
        out = tmp_path / "out"
        code = main([
            "complete", str(png_file), "--rank", "3",
            "--missing-ratio", "0", "--seed", "4", "--out", str(out),
        ])
        assert code == 0
        original = read_png(png_file)
        recovered = read_png(out / "recovered.png")
        assert np.array_equal(recovered.to_array(), original.to_array())
        assert (out / "mask.png").is_file()
        header, row = (out / "metrics.csv").read_text().splitlines()
        assert header == (
            "psnr_observed,ssim_observed,psnr_recovered,ssim_recovered,iters,time_per_iter_s"
        )
        fields = row.split(",")
        assert fields[2] == "inf"
        assert int(fields[4]) == 1

    def test_inpainting_improves_psnr(self, png_file, tmp_path):
        out = tmp_path / "out"
        code = main([
            "complete", str(png_file), "--rank", "3",
            "--missing-ratio", "0.5", "--seed", "5", "--out", str(out),
        ])
        assert code == 0
        row = (out / "metrics.csv").read_text().splitlines()[1].split(",")
        psnr_observed, psnr_recovered = float(row[0]), float(row[2])
        assert psnr_recovered > psnr_observed + 3.0

    def test_explicit_mask_file(self, png_file, tmp_path):
        mask_path = tmp_path / "mask.png"
        write_mask_png(random_mask(24, 24, 0.4, seed=6), mask_path)
        out = tmp_path / "out"
        code = main([
            "complete", str(png_file), "--rank", "3",
            "--mask", str(mask_path), "--seed", "7", "--out", str(out),
        ])
        assert code == 0
        assert (out / "observed.png").is_file()
        assert not (out / "mask.png").exists()

    def test_mask_shape_mismatch(self, png_file, tmp_path, capsys):
        mask_path = tmp_path / "mask.png"
        write_mask_png(random_mask(10, 10, 0.4, seed=8), mask_path)
        code = main([
            "complete", str(png_file), "--rank", "3",
            "--mask", str(mask_path), "--out", str(tmp_path / "x"),
        ])
        assert code == 2
        assert "does not match" in capsys.readouterr().err

    def test_mask_and_ratio_conflict(self, png_file, tmp_path, capsys):
        with pytest.raises(SystemExit) as excinfo:
            main([
                "complete", str(png_file), "--rank", "3",
                "--missing-ratio", "0.5", "--mask", "whatever.png",
            ])
        assert excinfo.value.code == 2

    def test_reproducible(self, png_file, tmp_path):
        outs = []
        for name in ("a", "b"):
            out = tmp_path / name
            assert main([
                "complete", str(png_file), "--rank", "3",
                "--missing-ratio", "0.3", "--seed", "11", "--out", str(out),
            ]) == 0
            outs.append(out)
        for name in ("observed.png", "recovered.png", "mask.png", "metrics.csv"):
            assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()


class TestMaskIO:
    def test_round_trip(self, tmp_path):
        mask = random_mask(9, 13, 0.35, seed=12)
        path = tmp_path / "m.png"
        write_mask_png(mask, path)
        back = read_mask_png(path)
        assert np.array_equal(back.observed, mask.observed)

    def test_gray_levels_rejected(self, tmp_path):
        from PIL import Image

        path = tmp_path / "gray.png"
        Image.fromarray(np.full((4, 4), 128, dtype=np.uint8), mode="L").save(path)
        from qcur.errors import FileFormatError

        with pytest.raises(FileFormatError):
            read_mask_png(path)


class TestBenchCommands:
    def test_perturb_csv(self, tmp_path):
        out = tmp_path / "bench"
        code = main([
            "bench-perturb", "--dim", "20", "--rank", "2",
            "--sigmas", "1e-3", "--trials", "1", "--seed", "5", "--out", str(out),
        ])
        assert code == 0
        lines = (out / "perturbation.csv").read_text().splitlines()
        assert lines[0] == CSV_HEADER
        assert len(lines) == 2
        assert lines[1].startswith("qmcur_length,20,20,2,")

    def test_scale_csv(self, tmp_path):
        out = tmp_path / "bench"
        code = main([
            "bench-scale", "--dims", "16,20", "--rank", "2", "--seed", "6", "--out", str(out),
        ])
        assert code == 0
        lines = (out / "scaling.csv").read_text().splitlines()
        assert len(lines) == 7
        assert {line.split(",")[0] for line in lines[1:]} == {
            "qsvd_truncated", "qmcur_length", "qmcur_uniform",
        }

    def test_bench_reproducible(self, tmp_path):
        blobs = []
        for name in ("a", "b"):
            out = tmp_path / name
            assert main([
                "bench-perturb", "--dim", "16", "--rank", "2",
                "--sigmas", "1e-2,1e-4", "--trials", "2", "--seed", "8", "--out", str(out),
            ]) == 0
            blobs.append((out / "perturbation.csv").read_bytes())
        assert blobs[0] == blobs[1]

    def test_bad_sigma_list(self, tmp_path, capsys):
        with pytest.raises(SystemExit) as excinfo:
            main(["bench-perturb", "--sigmas", "1e-3,zebra"])
        assert excinfo.value.code == 2


class TestRunConfig:
    def test_policy_flag_mapping(self):
        ns = Namespace(command="complete", input="x.png", index_policy="fixed")
        assert RunConfig.from_namespace(ns).index_policy == "fixed"
        ns = Namespace(command="complete", input="x.png")
        assert RunConfig.from_namespace(ns).index_policy == "resample_each_iter"

    def test_defaults(self):
        cfg = RunConfig.from_namespace(Namespace(command="bench-scale"))
        assert cfg.seed == 0
        assert cfg.measure_time is False
        assert cfg.dims == tuple(range(50, 501, 50))


class TestConsoleScript:
    def test_installed_entry_point(self, tmp_path):
        proc = subprocess.run(
            [sys.executable, "-c", "import qcur.cli, sys; sys.exit(qcur.cli.main(['bench-scale', '--dims', '12', '--rank', '2', '--out', %r]))" % str(tmp_path)],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0, proc.stderr
        assert (tmp_path / "scaling.csv").is_file()
