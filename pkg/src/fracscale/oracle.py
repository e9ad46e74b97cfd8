"""Direct per-output-pixel resizer used as ground truth for the conv pipeline.

Nothing here convolves or shuffles: each output sample computes its source
coordinate ``m * s / r`` in exact integer arithmetic and gathers its taps from
the input, with borders handled by index arithmetic rather than a padded copy.
"""
from __future__ import annotations

from itertools import product

import numpy as np

from .fcfs import ScaleJob, output_shape
from .kernels import Interpolation, cubic_weight
from .tensor import PaddingError, PadMode, ShapeError, as_tensor


def _resolve(idx: np.ndarray, w: np.ndarray, n: int, mode: PadMode):
    """Map out-of-range tap indices back into ``[0, n)`` per border mode."""
    if mode is PadMode.REPLICATE:
        return np.clip(idx, 0, n - 1), w
    if mode is PadMode.ZERO:
        inside = (idx >= 0) & (idx < n)
        return np.clip(idx, 0, n - 1), np.where(inside, w, 0.0)
    mirrored = np.where(idx < 0, -idx, idx)
    mirrored = np.where(mirrored > n - 1, 2 * (n - 1) - mirrored, mirrored)
    if np.any((mirrored < 0) | (mirrored > n - 1)):
        raise PaddingError(f"reflect border needs more than one mirror of a length-{n} dim")
    return mirrored, w


def _axis_taps(out_len: int, r: int, s: int, n: int, job: ScaleJob):
    """Source indices and weights, each of shape ``(out_len, taps)``."""
    num = np.arange(out_len, dtype=np.int64) * s
    base, rem = np.divmod(num, r)
    kind = job.method.kind
    if kind is Interpolation.NEAREST:
        idx = ((2 * num + r - 1) // (2 * r))[:, None]  # round half down
        w = np.ones_like(idx, dtype=np.float64)
    elif kind is Interpolation.BILINEAR:
        idx = base[:, None] + np.arange(2)
        w = np.stack([(r - rem) / r, rem / r], axis=1)
    else:
        idx = base[:, None] + np.arange(-1, 3)
        f = rem / r
        a = job.method.a
        w = np.array([[cubic_weight(t + 1.0, a), cubic_weight(t, a),
                       cubic_weight(1.0 - t, a), cubic_weight(2.0 - t, a)] for t in f])
        w = w / w.sum(axis=1, keepdims=True)
    return _resolve(idx, w, n, job.padding_mode)


def direct_resize(x, job: ScaleJob) -> np.ndarray:
    """Gather-based resize with the same sampling convention as :func:`fracscale.fcfs.scale`."""
    x = as_tensor(x)
    if x.ndim != job.ndim:
        raise ShapeError(f"input rank {x.ndim} != number of factors {job.ndim}")
    out_shape = output_shape(x.shape, job.factors)
    taps = [_axis_taps(m, f.r, f.s, n, job) for m, f, n in zip(out_shape, job.factors, x.shape)]

    out = np.zeros(out_shape)
    for combo in product(*(range(idx.shape[1]) for idx, _ in taps)):
        index = np.ix_(*(idx[:, t] for (idx, _), t in zip(taps, combo)))
        weight = np.ones(())
        for (_, w), t in zip(taps, combo):
            weight = np.multiply.outer(weight, w[:, t])
        out += weight * x[index]
    return out


def _pixel_taps(m: int, r: int, s: int, n: int, job: ScaleJob) -> list[tuple[int, float]]:
    num = m * s
    base, rem = divmod(num, r)
    kind = job.method.kind
    if kind is Interpolation.NEAREST:
        raw = [((2 * num + r - 1) // (2 * r), 1.0)]
    elif kind is Interpolation.BILINEAR:
        raw = [(base, (r - rem) / r), (base + 1, rem / r)]
    else:
        f = rem / r
        a = job.method.a
        ws = [cubic_weight(f + 1.0, a), cubic_weight(f, a),
              cubic_weight(1.0 - f, a), cubic_weight(2.0 - f, a)]
        total = sum(ws)
        raw = [(base - 1 + k, wk / total) for k, wk in enumerate(ws)]

    taps = []
    for i, w in raw:
        if 0 <= i < n:
            taps.append((i, w))
        elif job.padding_mode is PadMode.REPLICATE:
            taps.append((min(max(i, 0), n - 1), w))
        elif job.padding_mode is PadMode.ZERO:
            continue
        else:
            j = -i if i < 0 else 2 * (n - 1) - i
            if not 0 <= j < n:
                raise PaddingError(f"reflect border needs more than one mirror of a length-{n} dim")
            taps.append((j, w))
    return taps


def direct_resize_naive(x, job: ScaleJob) -> np.ndarray:
    """Literal per-pixel loop version of :func:`direct_resize`. Slow; for small inputs."""
    x = as_tensor(x)
    if x.ndim != job.ndim:
        raise ShapeError(f"input rank {x.ndim} != number of factors {job.ndim}")
    out_shape = output_shape(x.shape, job.factors)
    out = np.zeros(out_shape)
    for pos in np.ndindex(*out_shape):
        per_dim = [_pixel_taps(m, f.r, f.s, n, job) for m, f, n in zip(pos, job.factors, x.shape)]
        acc = 0.0
        for combo in product(*per_dim):
            w = 1.0
            for _, wk in combo:
                w *= wk
            acc += w * x[tuple(i for i, _ in combo)]
        out[pos] = acc
    return out
