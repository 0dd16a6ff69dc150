"""Kernel grids as images, one tile per sharpness level."""

from __future__ import annotations

import math

import numpy as np
import torch

TILE_GAP = 1


def tile_kernels(weights: torch.Tensor, gap: int = TILE_GAP) -> np.ndarray:
    """
    (N_k, K, K, C) normalized kernels → one RGB mosaic in [0, 1], levels row-major.

    Each kernel is scaled by its own peak so wide kernels stay visible.
    """
    weights = weights.detach().cpu().double()
    n_levels, K, _, channels = weights.shape
    cols = math.ceil(math.sqrt(n_levels))
    rows = math.ceil(n_levels / cols)
    step = K + gap
    mosaic = np.zeros((rows * step - gap, cols * step - gap, 3))
    for level in range(n_levels):
        kernel = weights[level].numpy()
        peak = kernel.max()
        tile = kernel / peak if peak > 0 else kernel
        if channels == 1:
            tile = np.repeat(tile, 3, axis=-1)
        r, c = divmod(level, cols)
        mosaic[r * step : r * step + K, c * step : c * step + K] = tile
    return mosaic
