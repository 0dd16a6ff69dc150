from .bench import KernelBenchResult, bench_kernel_generation, flatness, lookup_scaling
from .metrics import ImageScore, compare_directories, gaussian_window, psnr, ssim

__all__ = [
    "ImageScore",
    "KernelBenchResult",
    "bench_kernel_generation",
    "compare_directories",
    "flatness",
    "gaussian_window",
    "lookup_scaling",
    "psnr",
    "ssim",
]
