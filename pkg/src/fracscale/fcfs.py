"""Fractional scaling as pad -> strided multi-channel convolution -> pixelshuffle."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .kernels import MAX_RANK, KernelBank, RationalScale, ScalingMethod, build_bank
from .tensor import PadMode, ShapeError, as_tensor, pad, pixelshuffle, strided_conv, thread_count


@dataclass(frozen=True)
class ScaleJob:
    factors: tuple[RationalScale, ...]
    method: ScalingMethod
    padding_mode: PadMode = PadMode.REPLICATE

    def __post_init__(self):
        factors = tuple(RationalScale.coerce(f) for f in self.factors)
        if not 1 <= len(factors) <= MAX_RANK:
            raise ShapeError(f"supported ranks are 1..{MAX_RANK}, got {len(factors)}")
        object.__setattr__(self, "factors", factors)
        object.__setattr__(self, "method", ScalingMethod.coerce(self.method))
        object.__setattr__(self, "padding_mode", PadMode(self.padding_mode))

    @classmethod
    def uniform(cls, factor, ndim: int, method, padding_mode=PadMode.REPLICATE) -> ScaleJob:
        """Same factor along every one of ``ndim`` dimensions."""
        return cls((RationalScale.coerce(factor),) * ndim, method, padding_mode)

    @property
    def ndim(self) -> int:
        return len(self.factors)

    def bank(self) -> KernelBank:
        return build_bank(self.factors, self.method)


def _check_rank(in_shape: Sequence[int], factors: Sequence) -> None:
    if len(in_shape) != len(factors):
        raise ShapeError(f"input rank {len(in_shape)} != number of factors {len(factors)}")
    if any(n < 1 for n in in_shape):
        raise ShapeError(f"dimensions must be positive, got {tuple(in_shape)}")


def hidden_shape(in_shape: Sequence[int], factors: Sequence) -> tuple[int, tuple[int, ...]]:
    """``(prod(r), (ceil(N_d / s_d), ...))``: the shape between conv and shuffle."""
    factors = [RationalScale.coerce(f) for f in factors]
    _check_rank(in_shape, factors)
    return math.prod(f.r for f in factors), tuple(-(-n // f.s) for n, f in zip(in_shape, factors))


def output_shape(in_shape: Sequence[int], factors: Sequence) -> tuple[int, ...]:
    """``r_d * ceil(N_d / s_d)`` per dimension.

    The input is completed on the right to a multiple of ``s``, so a 5x5 image
    scaled by 3/2 becomes 9x9.
    """
    _, spatial = hidden_shape(in_shape, factors)
    return tuple(RationalScale.coerce(f).r * q for f, q in zip(factors, spatial))


def scale(x, job: ScaleJob, threads: int | None = None) -> np.ndarray:
    """Resize ``x`` by the job's factors.

    Output sample ``m`` along each dimension interpolates ``x`` at ``m * s / r``;
    samples beyond the input edge read the job's padding mode.
    """
    x = as_tensor(x)
    _check_rank(x.shape, job.factors)
    bank = job.bank()
    padded = pad(x, bank.required_pad(x.shape, job.padding_mode))
    hidden = strided_conv(padded, bank.stacked(), bank.stride,
                          threads=thread_count() if threads is None else threads)
    expected = hidden_shape(x.shape, job.factors)
    if hidden.shape != (expected[0],) + expected[1]:
        raise AssertionError(f"hidden layer {hidden.shape} != expected {expected}")
    return pixelshuffle(hidden, bank.upsample)


def resize(x, factor, method="bilinear", padding_mode=PadMode.REPLICATE) -> np.ndarray:
    """Convenience wrapper: scale every dimension of ``x`` by ``factor``."""
    x = np.asarray(x)
    return scale(x, ScaleJob.uniform(factor, x.ndim, method, padding_mode))
