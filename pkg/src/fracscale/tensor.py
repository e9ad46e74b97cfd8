"""Dense tensor primitives: padding, strided multi-channel convolution and
generalized ND pixelshuffle.

Tensors are plain ``float64`` numpy arrays. A "channel tensor" is an array of
shape ``(C, N1, ..., Nn)``. Every operation returns a new read-only array and
never touches its input.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


class ShapeError(ValueError):
    """Raised when tensor shapes are incompatible with an operation."""


class PaddingError(ValueError):
    """Raised when a padding request cannot be honoured for a given shape."""


class PadMode(str, Enum):
    REPLICATE = "replicate"
    REFLECT = "reflect"
    ZERO = "zero"


_NUMPY_PAD_MODE = {
    PadMode.REPLICATE: "edge",
    PadMode.REFLECT: "reflect",
    PadMode.ZERO: "constant",
}


@dataclass(frozen=True)
class PaddingSpec:
    """Per-dimension ``(left, right)`` pad amounts plus a border mode."""

    widths: tuple[tuple[int, int], ...]
    mode: PadMode = PadMode.REPLICATE

    def __post_init__(self):
        widths = tuple((int(lo), int(hi)) for lo, hi in self.widths)
        if any(lo < 0 or hi < 0 for lo, hi in widths):
            raise PaddingError(f"negative pad amount in {widths}")
        object.__setattr__(self, "widths", widths)
        object.__setattr__(self, "mode", PadMode(self.mode))

    @classmethod
    def symmetric(cls, amount: int, ndim: int, mode=PadMode.REPLICATE) -> PaddingSpec:
        return cls(((amount, amount),) * ndim, mode)

    def check(self, shape: Sequence[int]) -> None:
        if len(shape) != len(self.widths):
            raise ShapeError(
                f"padding has {len(self.widths)} dims, tensor has {len(shape)}"
            )
        if self.mode is PadMode.REFLECT:
            for d, ((lo, hi), n) in enumerate(zip(self.widths, shape)):
                if lo >= n or hi >= n:
                    raise PaddingError(
                        f"reflect pad ({lo}, {hi}) needs dim {d} longer than {max(lo, hi)}, got {n}"
                    )


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


def as_tensor(x) -> np.ndarray:
    """Validate ``x`` as a nonempty finite real tensor and return it as float64."""
    a = np.asarray(x, dtype=np.float64)
    if a.ndim == 0:
        raise ShapeError("tensor must have at least one dimension")
    if a.size == 0:
        raise ShapeError(f"empty tensor of shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("tensor contains NaN or Inf")
    return a


def pad(x, spec: PaddingSpec) -> np.ndarray:
    """Pad ``x`` per ``spec``.

    Reflect mirrors about the edge sample without repeating it
    (``[1, 2, 3] -> [2, 1, 2, 3, 2]``).
    """
    x = as_tensor(x)
    spec.check(x.shape)
    out = np.pad(x, spec.widths, mode=_NUMPY_PAD_MODE[spec.mode])
    return _frozen(out)


def conv_output_shape(
    in_shape: Sequence[int], extent: Sequence[int], stride: Sequence[int]
) -> tuple[int, ...]:
    if not (len(in_shape) == len(extent) == len(stride)):
        raise ShapeError(
            f"rank mismatch: input {tuple(in_shape)}, kernel {tuple(extent)}, stride {tuple(stride)}"
        )
    out = []
    for n, t, s in zip(in_shape, extent, stride):
        if s < 1:
            raise ShapeError(f"stride must be positive, got {s}")
        if t > n:
            raise ShapeError(f"kernel extent {t} exceeds input length {n}")
        out.append((n - t) // s + 1)
    return tuple(out)


def strided_conv(x, weights, stride: Sequence[int], threads: int = 1) -> np.ndarray:
    """Multi-output-channel strided cross-correlation.

    ``weights`` has shape ``(C, T1, ..., Tn)``; the result has shape
    ``(C, H1, ..., Hn)`` with ``H_d = (len_d - T_d) // s_d + 1`` and

        out[c, i] = sum_k x[i * s + k] * weights[c, k]

    Taps run forward from the window origin (no kernel flip). With
    ``threads > 1`` output channels are split across worker threads.
    """
    x = as_tensor(x)
    w = np.asarray(weights, dtype=np.float64)
    n = x.ndim
    if w.ndim != n + 1:
        raise ShapeError(f"weights must have rank {n + 1}, got shape {w.shape}")
    stride = tuple(int(s) for s in stride)
    hidden = conv_output_shape(x.shape, w.shape[1:], stride)

    windows = sliding_window_view(x, w.shape[1:])
    windows = windows[tuple(slice(None, h * s, s) for h, s in zip(hidden, stride))]
    axes = (list(range(1, n + 1)), list(range(n, 2 * n)))

    channels = w.shape[0]
    threads = max(1, min(int(threads), channels))
    if threads == 1:
        out = np.tensordot(w, windows, axes=axes)
    else:
        chunks = np.array_split(np.arange(channels), threads)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = pool.map(lambda idx: np.tensordot(w[idx], windows, axes=axes), chunks)
            out = np.concatenate(list(parts), axis=0)
    return _frozen(np.ascontiguousarray(out))


def _check_factors(factors: Sequence[int], ndim: int) -> tuple[int, ...]:
    factors = tuple(int(f) for f in factors)
    if len(factors) != ndim:
        raise ShapeError(f"{len(factors)} factors given for {ndim} spatial dims")
    if any(f < 1 for f in factors):
        raise ShapeError(f"factors must be positive, got {factors}")
    return factors


def pixelshuffle(x, factors: Sequence[int]) -> np.ndarray:
    """Rearrange a ``(prod(r), N1..Nn)`` channel tensor into ``(r1*N1, ..., rn*Nn)``.

    ``out[i1..in] = x[c, i1 // r1, ..., in // rn]`` where
    ``c = sum_d (i_d % r_d) * prod(r_{d+1..n})``: the first spatial dimension
    owns the slowest-varying part of the channel index.
    """
    x = as_tensor(x)
    n = x.ndim - 1
    if n < 1:
        raise ShapeError("pixelshuffle needs a channel axis plus at least one spatial dim")
    factors = _check_factors(factors, n)
    if x.shape[0] != math.prod(factors):
        raise ShapeError(
            f"channel count {x.shape[0]} != product of factors {factors}"
        )
    spatial = x.shape[1:]
    y = x.reshape(factors + spatial)
    # (r1..rn, N1..Nn) -> (N1, r1, N2, r2, ...)
    order = [a for d in range(n) for a in (n + d, d)]
    y = y.transpose(order).reshape(tuple(r * m for r, m in zip(factors, spatial)))
    return _frozen(np.ascontiguousarray(y))


def pixelunshuffle(x, factors: Sequence[int]) -> np.ndarray:
    """Inverse of :func:`pixelshuffle`."""
    x = as_tensor(x)
    n = x.ndim
    factors = _check_factors(factors, n)
    for d, (m, r) in enumerate(zip(x.shape, factors)):
        if m % r:
            raise ShapeError(f"dim {d} of length {m} not divisible by factor {r}")
    spatial = tuple(m // r for m, r in zip(x.shape, factors))
    interleaved = [a for q, r in zip(spatial, factors) for a in (q, r)]
    y = x.reshape(interleaved)
    order = [2 * d + 1 for d in range(n)] + [2 * d for d in range(n)]
    y = y.transpose(order).reshape((math.prod(factors),) + spatial)
    return _frozen(np.ascontiguousarray(y))


def thread_count() -> int:
    """Worker count from ``FRACSCALE_THREADS`` (unset -> 1, ``0`` -> all CPUs)."""
    raw = os.environ.get("FRACSCALE_THREADS", "").strip()
    if not raw:
        return 1
    n = int(raw)
    if n < 0:
        raise ValueError(f"FRACSCALE_THREADS must be >= 0, got {n}")
    return n or (os.cpu_count() or 1)
