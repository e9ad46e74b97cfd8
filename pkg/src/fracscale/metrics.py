"""PSNR, SSIM and the FCFS-versus-oracle comparison harness."""
from __future__ import annotations

import math
import statistics
import time
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .fcfs import ScaleJob, scale
from .kernels import RationalScale, ScalingMethod
from .oracle import direct_resize
from .tensor import ShapeError, as_tensor

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03
SSIM_DESCRIPTION = (
    f"SSIM: {SSIM_WINDOW}x{SSIM_WINDOW} Gaussian window, sigma={SSIM_SIGMA}, "
    f"C1=({SSIM_K1}*max)^2, C2=({SSIM_K2}*max)^2, mean over valid window positions"
)


def _same_shape(a, b):
    a, b = as_tensor(a), as_tensor(b)
    if a.shape != b.shape:
        raise ShapeError(f"shape mismatch: {a.shape} vs {b.shape}")
    return a, b


def psnr(a, b, max_value: float = 255.0) -> float:
    """Peak signal-to-noise ratio in dB; ``inf`` when the inputs are identical."""
    a, b = _same_shape(a, b)
    if max_value <= 0:
        raise ValueError("max_value must be positive")
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(max_value**2 / mse)


def gaussian_window(size: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> np.ndarray:
    """Normalized 1D Gaussian taps; the 2D window is its outer product."""
    x = np.arange(size) - (size - 1) / 2.0
    g = np.exp(-(x**2) / (2.0 * sigma**2))
    return g / g.sum()


def _filter_valid(img: np.ndarray, g: np.ndarray) -> np.ndarray:
    k = len(g)
    rows = sliding_window_view(img, k, axis=0) @ g
    return sliding_window_view(rows, k, axis=1) @ g


def _check_ssim_inputs(a, b):
    a, b = _same_shape(a, b)
    if a.ndim != 2:
        raise ShapeError(f"ssim expects a 2D image, got shape {a.shape}")
    if min(a.shape) < SSIM_WINDOW:
        raise ShapeError(f"image {a.shape} smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} window")
    return a, b


def ssim(a, b, max_value: float = 255.0) -> float:
    """Mean structural similarity over all valid window positions."""
    a, b = _check_ssim_inputs(a, b)
    g = gaussian_window()
    c1 = (SSIM_K1 * max_value) ** 2
    c2 = (SSIM_K2 * max_value) ** 2

    mu_a = _filter_valid(a, g)
    mu_b = _filter_valid(b, g)
    mu_aa, mu_bb, mu_ab = mu_a * mu_a, mu_b * mu_b, mu_a * mu_b
    var_a = _filter_valid(a * a, g) - mu_aa
    var_b = _filter_valid(b * b, g) - mu_bb
    cov = _filter_valid(a * b, g) - mu_ab

    num = (2.0 * mu_ab + c1) * (2.0 * cov + c2)
    den = (mu_aa + mu_bb + c1) * (var_a + var_b + c2)
    return float(np.mean(num / den))


def ssim_naive(a, b, max_value: float = 255.0) -> float:
    """Double-loop SSIM over explicit windows. Reference for :func:`ssim`."""
    a, b = _check_ssim_inputs(a, b)
    g = gaussian_window()
    w = np.outer(g, g)
    c1 = (SSIM_K1 * max_value) ** 2
    c2 = (SSIM_K2 * max_value) ** 2
    k = SSIM_WINDOW
    rows, cols = a.shape[0] - k + 1, a.shape[1] - k + 1
    total = 0.0
    for i in range(rows):
        for j in range(cols):
            pa = a[i:i + k, j:j + k]
            pb = b[i:i + k, j:j + k]
            ma = float(np.sum(w * pa))
            mb = float(np.sum(w * pb))
            va = float(np.sum(w * (pa - ma) ** 2))
            vb = float(np.sum(w * (pb - mb) ** 2))
            cv = float(np.sum(w * (pa - ma) * (pb - mb)))
            total += ((2 * ma * mb + c1) * (2 * cv + c2)) / ((ma**2 + mb**2 + c1) * (va + vb + c2))
    return total / (rows * cols)


CSV_HEADER = ("factor", "method", "height", "width", "psnr_db", "ssim", "t_fcfs_s", "t_oracle_s")


@dataclass(frozen=True)
class QualityReport:
    factor: tuple[RationalScale, ...]
    method: ScalingMethod
    in_shape: tuple[int, ...]
    psnr_db: float
    ssim: float  # nan when the outputs are not 2D or smaller than the SSIM window
    elapsed_fcfs_s: float
    elapsed_oracle_s: float
    max_abs_diff: float

    def factor_string(self) -> str:
        names = [str(f) for f in self.factor]
        return names[0] if len(set(names)) == 1 else ",".join(names)

    def csv_row(self) -> list[str]:
        height = self.in_shape[0] if len(self.in_shape) > 1 else 1
        return [
            self.factor_string(),
            str(self.method),
            str(height),
            str(self.in_shape[-1]),
            "inf" if math.isinf(self.psnr_db) else repr(self.psnr_db),
            repr(self.ssim),
            repr(self.elapsed_fcfs_s),
            repr(self.elapsed_oracle_s),
        ]


def _median_time(fn, reps: int):
    result = fn()  # warm-up, untimed
    times = []
    for _ in range(reps):
        t0 = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - t0)
    return result, statistics.median(times)


def compare(x, job: ScaleJob, reps: int = 100, max_value: float = 255.0,
            threads: int | None = None) -> QualityReport:
    """Time FCFS and the oracle on ``x`` (median of ``reps`` runs) and score their agreement."""
    if reps < 1:
        raise ValueError("reps must be >= 1")
    x = as_tensor(x)
    fast, t_fast = _median_time(lambda: scale(x, job, threads=threads), reps)
    ref, t_ref = _median_time(lambda: direct_resize(x, job), reps)
    try:
        s = ssim(fast, ref, max_value)
    except ShapeError:
        s = math.nan
    return QualityReport(
        factor=job.factors,
        method=job.method,
        in_shape=x.shape,
        psnr_db=psnr(fast, ref, max_value),
        ssim=s,
        elapsed_fcfs_s=t_fast,
        elapsed_oracle_s=t_ref,
        max_abs_diff=float(np.max(np.abs(fast - ref))),
    )
