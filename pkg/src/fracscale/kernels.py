"""Per-phase interpolation kernels for rational scale factors.

Output sample ``m`` along a dimension scaled by ``r/s`` reads input coordinate
``u = m * s / r`` (origin aligned, no half-pixel shift). Writing
``m = q * r + j`` splits this into hidden position ``q`` (input origin
``q * s``) and phase ``j``, whose offset from that origin is ``j * s / r``.
Each phase gets one kernel; a bank holds all ``prod(r)`` of them.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import lru_cache, reduce
from itertools import product
from typing import Sequence

import numpy as np

from .tensor import PaddingSpec, PadMode, ShapeError

MAX_RANK = 3


@dataclass(frozen=True)
class RationalScale:
    """Scale factor ``r/s``, stored reduced."""

    r: int
    s: int

    def __post_init__(self):
        r, s = int(self.r), int(self.s)
        if r != self.r or s != self.s or r < 1 or s < 1:
            raise ValueError(f"scale terms must be positive integers, got {self.r}/{self.s}")
        g = math.gcd(r, s)
        object.__setattr__(self, "r", r // g)
        object.__setattr__(self, "s", s // g)

    @classmethod
    def parse(cls, text: str) -> RationalScale:
        """Parse ``"r/s"`` or a bare integer ``"r"``."""
        num, sep, den = text.strip().partition("/")
        try:
            return cls(int(num), int(den) if sep else 1)
        except ValueError:
            raise ValueError(f"invalid scale factor {text!r}") from None

    @classmethod
    def coerce(cls, value) -> RationalScale:
        if isinstance(value, RationalScale):
            return value
        if isinstance(value, str):
            return cls.parse(value)
        if isinstance(value, Fraction):
            return cls(value.numerator, value.denominator)
        if isinstance(value, int):
            return cls(value, 1)
        if isinstance(value, tuple) and len(value) == 2:
            return cls(*value)
        raise TypeError(f"cannot interpret {value!r} as a rational scale")

    def __str__(self):
        return f"{self.r}/{self.s}"

    def as_fraction(self) -> Fraction:
        return Fraction(self.r, self.s)


class Interpolation(str, Enum):
    NEAREST = "nearest"
    BILINEAR = "bilinear"
    BICUBIC = "bicubic"


@dataclass(frozen=True)
class ScalingMethod:
    kind: Interpolation
    a: float = -0.5  # Keys parameter, bicubic only

    def __post_init__(self):
        object.__setattr__(self, "kind", Interpolation(self.kind))
        if self.kind is Interpolation.BICUBIC and not -1.0 <= self.a <= 0.0:
            raise ValueError(f"bicubic parameter a must lie in [-1, 0], got {self.a}")

    @classmethod
    def coerce(cls, value) -> ScalingMethod:
        if isinstance(value, ScalingMethod):
            return value
        if isinstance(value, str):
            value = value.strip().lower()
        return cls(Interpolation(value))

    def __str__(self):
        return self.kind.value


def phase_fraction(j: int, scale: RationalScale) -> Fraction:
    """Sub-pixel offset ``(j * s mod r) / r`` sampled by phase ``j``."""
    if not 0 <= j < scale.r:
        raise ValueError(f"phase {j} out of range for {scale}")
    return Fraction(j * scale.s % scale.r, scale.r)


def phase_shift(j: int, scale: RationalScale) -> int:
    """Whole-pixel part ``floor(j * s / r)`` of phase ``j``'s offset."""
    return j * scale.s // scale.r


def cubic_weight(delta: float, a: float = -0.5) -> float:
    """Keys cubic convolution kernel with parameter ``a``."""
    t = abs(delta)
    if t <= 1.0:
        return (a + 2.0) * t**3 - (a + 3.0) * t**2 + 1.0
    if t < 2.0:
        return a * t**3 - 5.0 * a * t**2 + 8.0 * a * t - 4.0 * a
    return 0.0


def weights_1d(frac, method) -> tuple[np.ndarray, int]:
    """Taps interpolating at ``floor + frac`` and the first tap's offset from ``floor``.

    Extents are fixed per method (1, 2, 4) so that all phases of a bank
    share a uniform layout; on-grid samples keep zero-weight taps.
    """
    method = ScalingMethod.coerce(method)
    if not 0 <= frac < 1:
        raise ValueError(f"fractional offset must lie in [0, 1), got {frac}")
    if method.kind is Interpolation.NEAREST:
        # ties go to the lower pixel
        return np.ones(1), int(frac > Fraction(1, 2))
    f = float(frac)
    if method.kind is Interpolation.BILINEAR:
        return np.array([1.0 - f, f]), 0
    a = method.a
    w = np.array([cubic_weight(f + 1.0, a), cubic_weight(f, a),
                  cubic_weight(1.0 - f, a), cubic_weight(2.0 - f, a)])
    return w / w.sum(), -1


@dataclass(frozen=True)
class PhaseKernel:
    """One phase's weights and the offset of its first tap from the hidden origin."""

    phase: tuple[int, ...]
    weights: np.ndarray = field(compare=False)
    anchor: tuple[int, ...]

    @property
    def extent(self) -> tuple[int, ...]:
        return self.weights.shape


@dataclass(frozen=True, eq=False)
class KernelBank:
    """All per-phase kernels for one ``(factors, method)`` scaling job.

    ``kernels`` is ordered by channel: phase tuples in row-major order, which
    matches :func:`fracscale.tensor.pixelshuffle`.
    """

    factors: tuple[RationalScale, ...]
    method: ScalingMethod
    kernels: tuple[PhaseKernel, ...]

    @property
    def ndim(self) -> int:
        return len(self.factors)

    @property
    def stride(self) -> tuple[int, ...]:
        return tuple(f.s for f in self.factors)

    @property
    def upsample(self) -> tuple[int, ...]:
        return tuple(f.r for f in self.factors)

    @property
    def origin(self) -> tuple[int, ...]:
        """Lowest tap offset over all phases, per dim (always <= 0)."""
        return tuple(min(k.anchor[d] for k in self.kernels) for d in range(self.ndim))

    @property
    def extent(self) -> tuple[int, ...]:
        """Support box length shared by every channel of the dense weight stack."""
        lo = self.origin
        return tuple(
            max(k.anchor[d] + k.extent[d] for k in self.kernels) - lo[d]
            for d in range(self.ndim)
        )

    def kernel(self, phase: Sequence[int]) -> PhaseKernel:
        phase = tuple(phase)
        if len(phase) != self.ndim or any(not 0 <= j < f.r for j, f in zip(phase, self.factors)):
            raise ValueError(f"phase {phase} invalid for factors {self.factor_strings()}")
        return self.kernels[int(np.ravel_multi_index(phase, self.upsample))]

    def phase_for_fraction(self, fracs: Sequence) -> tuple[int, ...]:
        """Phase tuple whose sub-pixel offsets equal ``fracs``."""
        out = []
        for frac, f in zip(fracs, self.factors):
            frac = Fraction(frac)
            hits = [j for j in range(f.r) if phase_fraction(j, f) == frac]
            if not hits:
                raise ValueError(f"no phase of {f} samples offset {frac}")
            out.append(hits[0])
        return tuple(out)

    def window(self, phase: Sequence[int], start: Sequence[int], extent: Sequence[int]) -> np.ndarray:
        """Phase kernel embedded in a box starting ``start`` pixels from the
        phase's floor pixel ``floor(j * s / r)``."""
        k = self.kernel(phase)
        box = np.zeros(tuple(extent))
        for idx in np.ndindex(*k.extent):
            pos = tuple(
                k.anchor[d] - phase_shift(k.phase[d], self.factors[d]) + idx[d] - start[d]
                for d in range(self.ndim)
            )
            if any(p < 0 or p >= e for p, e in zip(pos, extent)):
                if k.weights[idx] != 0.0:
                    raise ValueError(f"nonzero tap at {pos} falls outside box of extent {tuple(extent)}")
                continue
            box[pos] = k.weights[idx]
        return box

    def stacked(self) -> np.ndarray:
        """Dense ``(C, T1..Tn)`` weights, each phase placed at its anchor in the shared box."""
        lo, ext = self.origin, self.extent
        out = np.zeros((len(self.kernels),) + ext)
        for c, k in enumerate(self.kernels):
            sl = tuple(slice(a - o, a - o + e) for a, o, e in zip(k.anchor, lo, k.extent))
            out[(c,) + sl] = k.weights
        out.flags.writeable = False
        return out

    def hidden_shape(self, in_shape: Sequence[int]) -> tuple[int, ...]:
        return tuple(-(-n // f.s) for n, f in zip(in_shape, self.factors))

    def required_pad(self, in_shape: Sequence[int], mode=PadMode.REPLICATE) -> PaddingSpec:
        """Padding that puts every tap of every phase in bounds for ``ceil(N/s)`` hidden positions."""
        if len(in_shape) != self.ndim:
            raise ShapeError(f"input rank {len(in_shape)} != bank rank {self.ndim}")
        widths = []
        for n, q, s, lo, t in zip(in_shape, self.hidden_shape(in_shape), self.stride,
                                  self.origin, self.extent):
            left = -lo
            right = max(0, (q - 1) * s + t - left - n)
            widths.append((left, right))
        return PaddingSpec(tuple(widths), mode)

    def factor_strings(self) -> list[str]:
        return [str(f) for f in self.factors]

    def to_dict(self) -> dict:
        return {
            "factors": self.factor_strings(),
            "method": str(self.method),
            **({"a": self.method.a} if self.method.kind is Interpolation.BICUBIC else {}),
            "stride": list(self.stride),
            "kernels": [
                {
                    "phase": list(k.phase),
                    "anchor": list(k.anchor),
                    "extent": list(k.extent),
                    "weights": k.weights.ravel().tolist(),
                }
                for k in self.kernels
            ],
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def _outer(vectors: Sequence[np.ndarray]) -> np.ndarray:
    return reduce(np.multiply.outer, vectors)


@lru_cache(maxsize=128)
def _build_bank(factors: tuple[RationalScale, ...], method: ScalingMethod) -> KernelBank:
    per_dim = []
    for f in factors:
        taps = []
        for j in range(f.r):
            w, anchor = weights_1d(phase_fraction(j, f), method)
            taps.append((w, phase_shift(j, f) + anchor))
        per_dim.append(taps)

    kernels = []
    for phase in product(*(range(f.r) for f in factors)):
        parts = [per_dim[d][j] for d, j in enumerate(phase)]
        weights = _outer([w for w, _ in parts])
        weights.flags.writeable = False
        kernels.append(PhaseKernel(phase, weights, tuple(a for _, a in parts)))
    return KernelBank(factors, method, tuple(kernels))


def build_bank(factors: Sequence, method) -> KernelBank:
    """Kernel bank for per-dimension ``factors`` (1 to 3 dims) and ``method``."""
    factors = tuple(RationalScale.coerce(f) for f in factors)
    if not 1 <= len(factors) <= MAX_RANK:
        raise ShapeError(f"supported ranks are 1..{MAX_RANK}, got {len(factors)}")
    return _build_bank(factors, ScalingMethod.coerce(method))
