"""Patch cropping, skip substitution and the per-pixel blur convolution."""

from __future__ import annotations

import torch

from deblurgrid.errors import ShapeError

from .grid import delta_kernel


def crop(clean: torch.Tensor, K: int) -> torch.Tensor:
    """
    Stride-1 K×K windows of a clean patch: (…, P, P, C) → (…, P′, P′, K, K, C),
    P′ = P − K + 1, window (i, j) = clean[i : i + K, j : j + K].
    """
    P = clean.shape[-2]
    if clean.shape[-3] != P:
        raise ShapeError(f"crop expects square patches, got {tuple(clean.shape)}")
    if P < K:
        raise ShapeError(f"patch width {P} is smaller than kernel width {K}")
    lead = clean.dim() - 3
    windows = clean.unfold(lead, K, 1).unfold(lead + 1, K, 1)  # (…, P′, P′, C, K, K)
    return windows.movedim(-3, -1)


def apply_skip(weights: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
    """Replace the kernels of masked targets with the center delta; others pass through."""
    K, C = weights.shape[-2], weights.shape[-1]
    if mask.shape != weights.shape[:-3]:
        raise ShapeError(
            f"skip mask {tuple(mask.shape)} does not match targets {tuple(weights.shape[:-3])}"
        )
    delta = delta_kernel(K, C, dtype=weights.dtype)
    return torch.where(mask[..., None, None, None], delta, weights)


def convolve(windows: torch.Tensor, weights: torch.Tensor) -> torch.Tensor:
    """
    I_b[h, w] = Σ_ij windows[h, w, i, j] · weights[h, w, i, j], per channel.

    `weights` with C = 1 is shared across the window channels.
    """
    if windows.shape[:-1] != weights.shape[:-1] or weights.shape[-1] not in (1, windows.shape[-1]):
        raise ShapeError(
            f"convolve: windows {tuple(windows.shape)} vs weights {tuple(weights.shape)}"
        )
    return (windows * weights).sum(dim=(-3, -2))


def center_crop(clean: torch.Tensor, K: int) -> torch.Tensor:
    """The P′×P′ target region of a clean patch (what a delta kernel would produce)."""
    pad = (K - 1) // 2
    P = clean.shape[-2]
    return clean[..., pad : P - pad, pad : P - pad, :]
