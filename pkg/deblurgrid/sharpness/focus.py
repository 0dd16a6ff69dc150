"""Per-pixel focus measures: sum-modified-Laplacian and Tenengrad."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import ndimage

from deblurgrid.errors import ArgumentError

LUMA = np.array([0.299, 0.587, 0.114])


class PriorSource(str, Enum):
    SML       = "sml"        # sum-modified-Laplacian
    TENENGRAD = "tenengrad"  # windowed squared Sobel magnitude
    EXTERNAL  = "external"   # ingested defocus map, inverted
    RANDOM    = "random"     # ablation: uniformly random groups
    LOCAL     = "local"      # ablation: groups by image position


@dataclass
class SharpnessMap:
    """H×W non-negative scores, larger = sharper."""

    values: np.ndarray
    source: PriorSource

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise ArgumentError(f"sharpness map must be H×W, got shape {self.values.shape}")
        if not np.all(np.isfinite(self.values)):
            raise ArgumentError("sharpness map has non-finite values")
        if np.any(self.values < 0):
            raise ArgumentError("sharpness map has negative values")

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


def to_gray(image: np.ndarray) -> np.ndarray:
    image = np.asarray(image, dtype=np.float64)
    if image.ndim == 3 and image.shape[-1] >= 3:
        return image[..., :3] @ LUMA
    if image.ndim == 3:
        return image.mean(axis=-1)
    return image


def _check_window(window: int) -> None:
    if window < 1 or window % 2 == 0:
        raise ArgumentError(f"window must be an odd integer >= 1, got {window}")


def _window_sum(values: np.ndarray, window: int) -> np.ndarray:
    if window == 1:
        return values
    return ndimage.correlate(values, np.ones((window, window)), mode="mirror")


def _odd_pad(image: np.ndarray, width: int) -> np.ndarray:
    # Point-symmetric mirroring keeps linear ramps linear across the border.
    return np.pad(image, width, mode="reflect", reflect_type="odd")


def modified_laplacian(image: np.ndarray, step: int = 1) -> np.ndarray:
    """ML(x,y) = |2I − I(x−s,y) − I(x+s,y)| + |2I − I(x,y−s) − I(x,y+s)|."""
    s = step
    padded = _odd_pad(image, s)
    center = padded[s:-s, s:-s]
    ml_x = np.abs(2 * center - padded[s:-s, : -2 * s] - padded[s:-s, 2 * s :])
    ml_y = np.abs(2 * center - padded[: -2 * s, s:-s] - padded[2 * s :, s:-s])
    return ml_x + ml_y


def sml_map(image: np.ndarray, step: int = 1, window: int = 3) -> SharpnessMap:
    """Windowed sum of the modified Laplacian. Accepts grayscale or RGB images."""
    _check_window(window)
    if step < 1:
        raise ArgumentError(f"step must be >= 1, got {step}")
    ml = modified_laplacian(to_gray(image), step)
    return SharpnessMap(values=_window_sum(ml, window), source=PriorSource.SML)


def tenengrad_map(image: np.ndarray, window: int = 3) -> SharpnessMap:
    """Windowed sum of the squared 3×3 Sobel gradient magnitude."""
    _check_window(window)
    p = _odd_pad(to_gray(image), 1)
    # Sobel as explicit correlations on the padded image
    gx = (
        (p[:-2, 2:] - p[:-2, :-2])
        + 2 * (p[1:-1, 2:] - p[1:-1, :-2])
        + (p[2:, 2:] - p[2:, :-2])
    )
    gy = (
        (p[2:, :-2] - p[:-2, :-2])
        + 2 * (p[2:, 1:-1] - p[:-2, 1:-1])
        + (p[2:, 2:] - p[:-2, 2:])
    )
    values = _window_sum(gx**2 + gy**2, window)
    return SharpnessMap(values=np.maximum(values, 0.0), source=PriorSource.TENENGRAD)
