"""Fractional image/tensor scaling by rational factors as pad, strided
convolution and pixelshuffle."""
from .fcfs import ScaleJob, hidden_shape, output_shape, resize, scale
from .kernels import (
    Interpolation,
    KernelBank,
    RationalScale,
    ScalingMethod,
    build_bank,
    cubic_weight,
    phase_fraction,
    weights_1d,
)
from .metrics import QualityReport, compare, psnr, ssim
from .oracle import direct_resize
from .tensor import PaddingSpec, PadMode, pad, pixelshuffle, pixelunshuffle, strided_conv

__all__ = [
    "Interpolation", "KernelBank", "PadMode", "PaddingSpec", "QualityReport", "RationalScale",
    "ScaleJob", "ScalingMethod", "build_bank", "compare", "cubic_weight", "direct_resize",
    "hidden_shape", "output_shape", "pad", "phase_fraction", "pixelshuffle", "pixelunshuffle",
    "psnr", "resize", "scale", "ssim", "strided_conv", "weights_1d",
]
