"""Exit criteria. Each test records one PASS/FAIL line shown in the terminal summary."""
import csv
import math
import statistics
import time
from fractions import Fraction

import numpy as np

from fracscale.cli import DEFAULT_FACTORS, main, make_test_pattern
from fracscale.fcfs import ScaleJob, output_shape, scale
from fracscale.imageio import Image, decode_image, encode_image, read_image, write_image
from fracscale.kernels import Interpolation, build_bank, cubic_weight
from fracscale.metrics import compare, ssim, ssim_naive
from fracscale.oracle import direct_resize
from fracscale.tensor import pixelshuffle, pixelunshuffle

METHODS = list(Interpolation)
EQUIV_FACTORS = ["2/11", "1/2", "2/3", "3/2", "5/3", "2/1", "27/11"]


def test_ac1_oracle_equivalence(criterion):
    rng = np.random.default_rng(20261016)
    worst, cases = 0.0, 0
    t0 = time.perf_counter()
    for rank in (1, 2):
        for n in (3, 5, 8, 11, 16, 33, 64):
            for factor in EQUIV_FACTORS:
                for method in METHODS:
                    job = ScaleJob.uniform(factor, rank, method, "replicate")
                    for _ in range(10):
                        x = rng.random((n,) * rank)
                        a, b = scale(x, job, threads=1), direct_resize(x, job)
                        if a.shape != b.shape:
                            worst = math.inf
                        else:
                            worst = max(worst, float(np.max(np.abs(a - b))))
                        cases += 1
    elapsed = time.perf_counter() - t0
    criterion(worst <= 1e-9 and elapsed < 60.0,
              f"{cases} cases, max |fcfs - oracle| = {worst:.3g} (<= 1e-9), {elapsed:.1f} s (< 60 s)")


def test_ac2_five_by_five_shape(criterion):
    shapes = {m.value: scale(np.random.default_rng(0).random((5, 5)),
                             ScaleJob.uniform("3/2", 2, m)).shape for m in METHODS}
    ok = all(s == (9, 9) for s in shapes.values()) and output_shape((5, 5), ["3/2"] * 2) == (9, 9)
    criterion(ok, f"5x5 at 3/2 -> {shapes}")


def test_ac3_reference_kernel_values(criterion):
    bilinear = build_bank(["3/2", "3/2"], "bilinear")
    w11 = bilinear.kernel(bilinear.phase_for_fraction([Fraction(1, 3)] * 2)).weights
    w13 = bilinear.kernel(bilinear.phase_for_fraction([Fraction(1, 3), Fraction(2, 3)])).weights
    ref11 = np.array([[0.44, 0.22], [0.22, 0.11]])
    ref13 = np.array([[0.22, 0.44], [0.11, 0.22]])
    err = max(np.max(np.abs(w11 - ref11)), np.max(np.abs(w13 - ref13)))

    nearest = build_bank(["3/2", "3/2"], "nearest")
    n11 = nearest.window(nearest.phase_for_fraction([Fraction(1, 3)] * 2), (0, 0), (2, 2))
    n13 = nearest.window(nearest.phase_for_fraction([Fraction(1, 3), Fraction(2, 3)]), (0, 0), (2, 2))
    nearest_ok = (n11.tolist() == [[1.0, 0.0], [0.0, 0.0]]
                  and n13.tolist() == [[0.0, 1.0], [0.0, 0.0]])
    criterion(err <= 0.005 and nearest_ok,
              f"bilinear max deviation {err:.4f} (<= 0.005); nearest one-hot exact: {nearest_ok}")


def test_ac4_bicubic_formula(criterion):
    exact = cubic_weight(1.0, -0.5) == 0.0 and cubic_weight(0.0, -0.5) == 1.0
    worst = 0.0
    for factor in set(EQUIV_FACTORS) | set(DEFAULT_FACTORS) | {"1/1"}:
        for rank in (1, 2, 3):
            if rank == 3 and factor == "27/11":
                continue  # 27^3 phases; covered at rank <= 2
            bank = build_bank([factor] * rank, "bicubic")
            worst = max(worst, max(abs(k.weights.sum() - 1.0) for k in bank.kernels))
    criterion(exact and worst <= 1e-12,
              f"W(1)=0 and W(0)=1 exact: {exact}; max |sum - 1| over bicubic banks = {worst:.2g}")


def test_ac5_pixelshuffle_roundtrip(criterion):
    rng = np.random.default_rng(5)
    failures = 0
    for _ in range(200):
        rank = int(rng.integers(1, 4))
        factors = tuple(int(f) for f in rng.integers(1, 5, rank))
        spatial = tuple(int(n) for n in rng.integers(1, 9, rank))
        channels = rng.random((math.prod(factors),) + spatial)
        image = pixelshuffle(channels, factors)
        if not (np.array_equal(pixelunshuffle(image, factors), channels)
                and np.array_equal(pixelshuffle(pixelunshuffle(image, factors), factors), image)):
            failures += 1
    criterion(failures == 0, f"200 random cases, {failures} failures (bit-exact)")


def test_ac6_metric_saturation(criterion):
    x = make_test_pattern(128)
    worst_psnr, worst_ssim = math.inf, 1.0
    for factor in DEFAULT_FACTORS:
        for method in METHODS:
            rep = compare(x, ScaleJob.uniform(factor, 2, method), reps=1, max_value=255.0)
            worst_psnr = min(worst_psnr, rep.psnr_db)
            worst_ssim = min(worst_ssim, rep.ssim)
    ok = (math.isinf(worst_psnr) or worst_psnr >= 120.0) and worst_ssim >= 1 - 1e-9
    criterion(ok, f"36 cells, min PSNR {worst_psnr:.1f} dB (inf or >= 120), "
                  f"min SSIM {worst_ssim:.12f} (>= 1 - 1e-9)")


def test_ac7_timing_sanity(criterion, tmp_path):
    big = make_test_pattern(1024)
    job = ScaleJob.uniform("3/2", 2, "bilinear")
    t0 = time.perf_counter()
    out = scale(big, job, threads=1)
    t_big = time.perf_counter() - t0

    path = tmp_path / "bench.csv"
    code = main(["bench", "--sizes", "256", "--reps", "3", "--csv", str(path)])
    rows = list(csv.DictReader(path.open())) if code == 0 and path.exists() else []
    ratio = math.inf
    if len(rows) == 36:
        ratio = (statistics.median(float(r["t_fcfs_s"]) for r in rows)
                 / statistics.median(float(r["t_oracle_s"]) for r in rows))
    ok = out.shape == (1536, 1536) and t_big < 2.0 and len(rows) == 36 and ratio <= 25.0
    criterion(ok, f"1024^2 3/2 bilinear in {t_big:.3f} s (< 2 s); bench CSV rows {len(rows)}/36; "
                  f"median fcfs/oracle time ratio {ratio:.3f} (<= 25)")


def test_ac8_dual_ssim(criterion):
    rng = np.random.default_rng(8)
    worst = 0.0
    for i in range(20):
        a = rng.random((32, 32))
        b = a + 0.1 if i % 2 == 0 else np.clip(a + rng.normal(0, 0.2, a.shape), 0, 1)
        worst = max(worst, abs(ssim(a, b, 1.0) - ssim_naive(a, b, 1.0)))
    criterion(worst <= 1e-10, f"20 pairs, max |windowed - naive| = {worst:.2g} (<= 1e-10)")


def test_ac9_image_roundtrip(criterion, tmp_path):
    rng = np.random.default_rng(9)
    bad = 0
    for i in range(100):
        h, w = (int(v) for v in rng.integers(1, 40, 2))
        shape = (h, w) if i % 2 else (h, w, 3)
        img = Image.from_array(rng.integers(0, 256, shape, dtype=np.uint8))
        for fmt in ("pnm", "png"):
            if decode_image(encode_image(img, fmt)) != img:
                bad += 1

    src, dst = tmp_path / "in.ppm", tmp_path / "out.ppm"
    write_image(Image.from_array(rng.integers(0, 256, (17, 23, 3), dtype=np.uint8)), src)
    cli_ok = (main(["scale", "--factor", "1/1", "--method", "bicubic", str(src), str(dst)]) == 0
              and read_image(dst).samples == read_image(src).samples)
    criterion(bad == 0 and cli_ok,
              f"100 images x (PPM, PNG): {bad} mismatches; CLI 1/1 reproduces pixels: {cli_ok}")
