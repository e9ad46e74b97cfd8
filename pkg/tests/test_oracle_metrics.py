import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracscale.fcfs import ScaleJob
from fracscale.kernels import Interpolation
from fracscale.metrics import CSV_HEADER, compare, gaussian_window, psnr, ssim, ssim_naive
from fracscale.oracle import direct_resize, direct_resize_naive
from fracscale.tensor import PaddingError, PadMode, ShapeError

FACTORS = ["1/2", "2/3", "3/2", "2/1", "5/3", "2/11", "27/11"]


@pytest.mark.parametrize("method", list(Interpolation))
def test_oracle_identity(method):
    x = np.random.default_rng(0).random((5, 6))
    np.testing.assert_array_equal(direct_resize(x, ScaleJob.uniform("1/1", 2, method)), x)


def test_oracle_examples():
    assert direct_resize([10.0, 20.0], ScaleJob.uniform("2/1", 1, "nearest")).tolist() == [10, 10, 20, 20]
    out = direct_resize([0.0, 3.0], ScaleJob.uniform("3/2", 1, "bilinear"))
    np.testing.assert_allclose(out, [0.0, 2.0, 3.0], rtol=0, atol=1e-15)


@pytest.mark.parametrize("mode", list(PadMode))
@pytest.mark.parametrize("method", list(Interpolation))
@pytest.mark.parametrize("factor", FACTORS)
def test_vectorized_oracle_matches_loops(factor, method, mode):
    x = np.random.default_rng(1).random((7, 9))
    job = ScaleJob.uniform(factor, 2, method, mode)
    try:
        ref = direct_resize_naive(x, job)
    except PaddingError:
        with pytest.raises(PaddingError):
            direct_resize(x, job)
        return
    np.testing.assert_allclose(direct_resize(x, job), ref, rtol=0, atol=1e-13)


def test_psnr_examples():
    a = np.random.default_rng(2).integers(0, 200, (8, 8)).astype(float)
    assert psnr(a, a) == math.inf
    assert psnr(a, a + 1.0, 255.0) == pytest.approx(10 * math.log10(255.0**2), abs=1e-12)
    assert psnr(a, a + 1.0, 255.0) == pytest.approx(48.1308, abs=1e-4)
    assert psnr(a, a + 255.0, 255.0) == 0.0
    with pytest.raises(ShapeError):
        psnr(a, a[:4])
    with pytest.raises(ValueError):
        psnr(a, a, 0.0)


int_images = st.integers(0, 2**32 - 1).map(
    lambda seed: np.random.default_rng(seed).integers(0, 256, (2, 6, 7)).astype(float))


@given(int_images, st.integers(-1000, 1000))
def test_psnr_symmetry_and_shift(pair, c):
    a, b = pair
    assert psnr(a, b) == psnr(b, a)
    assert psnr(a + c, b + c) == psnr(a, b)


def test_gaussian_window():
    g = gaussian_window()
    assert g.shape == (11,)
    assert g.sum() == pytest.approx(1.0, abs=1e-15)
    np.testing.assert_allclose(g, g[::-1], rtol=0, atol=0)
    assert g[6] / g[5] == pytest.approx(math.exp(-1 / (2 * 1.5**2)), rel=1e-14)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(11, 24), st.integers(11, 24))
def test_ssim_self_is_one(seed, h, w):
    a = np.random.default_rng(seed).random((h, w)) * 255
    assert ssim(a, a) == 1.0


def test_ssim_inverted_is_lower():
    a = np.random.default_rng(3).random((16, 16))
    assert ssim(a, 1.0 - a, 1.0) < 1.0


def test_ssim_matches_naive_on_offset():
    a = np.random.default_rng(4).random((32, 32))
    b = a + 0.1
    assert abs(ssim(a, b, 1.0) - ssim_naive(a, b, 1.0)) <= 1e-10


def test_ssim_errors():
    with pytest.raises(ShapeError):
        ssim(np.ones((10, 20)), np.ones((10, 20)))
    with pytest.raises(ShapeError):
        ssim(np.ones(20), np.ones(20))
    with pytest.raises(ShapeError):
        ssim(np.ones((12, 12)), np.ones((12, 13)))


def test_compare_equivalent_outputs():
    x = np.random.default_rng(5).random((64, 64))
    rep = compare(x, ScaleJob.uniform("3/2", 2, "bilinear"), reps=2, max_value=1.0)
    assert rep.max_abs_diff <= 1e-9
    assert abs(rep.ssim - 1.0) <= 1e-9
    assert rep.psnr_db == math.inf or rep.psnr_db >= 120
    assert rep.elapsed_fcfs_s > 0 and rep.elapsed_oracle_s > 0


def test_compare_nearest_is_exact():
    x = np.random.default_rng(6).random((20, 20))
    rep = compare(x, ScaleJob.uniform("5/3", 2, "nearest"), reps=1, max_value=1.0)
    assert rep.psnr_db == math.inf
    assert rep.csv_row()[4] == "inf"


def test_compare_timer_is_median(monkeypatch):
    ticks = iter([0.0, 1.0, 1.0, 4.0, 4.0, 6.0, 6.0, 6.5, 6.5, 9.5,  # fcfs: 1, 3, 2, 0.5, 3
                  20.0, 21.0, 21.0, 22.0, 22.0, 23.0, 23.0, 24.0, 24.0, 25.0])
    monkeypatch.setattr("fracscale.metrics.time.perf_counter", lambda: next(ticks))
    rep = compare(np.ones((4, 4)), ScaleJob.uniform("2/1", 2, "nearest"), reps=5)
    assert rep.elapsed_fcfs_s == 2.0
    assert rep.elapsed_oracle_s == 1.0


def test_compare_rank1_has_nan_ssim():
    rep = compare(np.arange(10.0), ScaleJob.uniform("3/2", 1, "bicubic"), reps=1)
    assert math.isnan(rep.ssim)


def test_csv_row_layout():
    rep = compare(np.ones((12, 16)), ScaleJob.uniform("2/3", 2, "bicubic"), reps=1)
    row = rep.csv_row()
    assert len(row) == len(CSV_HEADER)
    assert row[:4] == ["2/3", "bicubic", "12", "16"]
