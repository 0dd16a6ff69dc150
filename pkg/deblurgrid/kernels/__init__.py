from .blur import apply_skip, center_crop, convolve, crop
from .export import tile_kernels
from .fixed_bank import FixedKernelBank
from .generator import KernelGenerator
from .grid import (
    BlurKernelGrid,
    delta_kernel,
    gaussian_log_density,
    init_gaussian,
    kernel_spread,
    lookup,
    lookup_normalized,
    normalize,
)

__all__ = [
    "BlurKernelGrid",
    "FixedKernelBank",
    "KernelGenerator",
    "apply_skip",
    "center_crop",
    "convolve",
    "crop",
    "delta_kernel",
    "gaussian_log_density",
    "init_gaussian",
    "kernel_spread",
    "lookup",
    "lookup_normalized",
    "normalize",
    "tile_kernels",
]
