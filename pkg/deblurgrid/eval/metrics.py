"""Full-reference image metrics: PSNR and SSIM."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
from scipy.signal import convolve2d

from deblurgrid.config.constants import SSIM_K1, SSIM_K2, SSIM_SIGMA, SSIM_WINDOW
from deblurgrid.data.dataset import IMAGE_SUFFIXES, read_image
from deblurgrid.errors import DatasetError, ShapeError


def _as_array(image: np.ndarray | torch.Tensor) -> np.ndarray:
    if isinstance(image, torch.Tensor):
        image = image.detach().cpu().numpy()
    return np.asarray(image, dtype=np.float64)


def psnr(a: np.ndarray | torch.Tensor, b: np.ndarray | torch.Tensor) -> float:
    """10·log10(1 / MSE) for images in [0, 1]; identical images give +inf."""
    a, b = _as_array(a), _as_array(b)
    if a.shape != b.shape:
        raise ShapeError(f"psnr: {a.shape} vs {b.shape}")
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(1.0 / mse)


def gaussian_window(size: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> np.ndarray:
    r = np.arange(size) - (size - 1) / 2
    g = np.exp(-(r**2) / (2.0 * sigma**2))
    window = np.outer(g, g)
    return window / window.sum()


def _ssim_channel(a: np.ndarray, b: np.ndarray, window: np.ndarray) -> float:
    c1 = (SSIM_K1 * 1.0) ** 2
    c2 = (SSIM_K2 * 1.0) ** 2

    def filt(x: np.ndarray) -> np.ndarray:
        return convolve2d(x, window, mode="valid")

    mu_a, mu_b = filt(a), filt(b)
    var_a = filt(a * a) - mu_a**2
    var_b = filt(b * b) - mu_b**2
    cov = filt(a * b) - mu_a * mu_b
    num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)
    den = (mu_a**2 + mu_b**2 + c1) * (var_a + var_b + c2)
    return float(np.mean(num / den))


def ssim(a: np.ndarray | torch.Tensor, b: np.ndarray | torch.Tensor) -> float:
    """
    Mean local SSIM (11×11 Gaussian window, σ = 1.5, dynamic range 1) over valid windows,
    averaged over channels for (H, W, C) input.
    """
    a, b = _as_array(a), _as_array(b)
    if a.shape != b.shape:
        raise ShapeError(f"ssim: {a.shape} vs {b.shape}")
    if a.ndim not in (2, 3):
        raise ShapeError(f"ssim expects (H, W) or (H, W, C), got {a.shape}")
    if min(a.shape[:2]) < SSIM_WINDOW:
        raise ShapeError(f"ssim needs at least {SSIM_WINDOW} pixels per side, got {a.shape[:2]}")
    window = gaussian_window()
    if a.ndim == 2:
        return _ssim_channel(a, b, window)
    channels = [_ssim_channel(a[..., c], b[..., c], window) for c in range(a.shape[-1])]
    return float(np.mean(channels))


@dataclass
class ImageScore:
    name: str
    psnr: float
    ssim: float


def compare_directories(renders: Path, refs: Path) -> list[ImageScore]:
    """Score every render against the reference with the same file name."""
    renders, refs = Path(renders), Path(refs)
    if not renders.is_dir() or not refs.is_dir():
        raise DatasetError(f"both {renders} and {refs} must be directories")
    names = sorted(p.name for p in renders.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)
    if not names:
        raise DatasetError(f"no images in {renders}")
    scores = []
    for name in names:
        ref = refs / name
        if not ref.exists():
            raise DatasetError(f"no reference for '{name}' in {refs}")
        a, b = read_image(renders / name), read_image(ref)
        scores.append(ImageScore(name, psnr(a, b), ssim(a, b)))
    return scores
