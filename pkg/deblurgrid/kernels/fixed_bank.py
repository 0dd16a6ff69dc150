"""
Fixed discrete kernel bank with per-pixel argmin selection.

Baseline only: a handful of Gaussian blurs that never train. Each target pixel takes the
bank member whose blurred value lands closest to the ground truth.
"""

from __future__ import annotations

from collections.abc import Sequence

import torch

from deblurgrid.config.constants import FIXED_BANK_STDS
from deblurgrid.errors import ArgumentError

from .blur import convolve
from .grid import delta_kernel, gaussian_log_density, normalize


class FixedKernelBank:
    def __init__(
        self,
        K: int,
        stds: Sequence[float] = FIXED_BANK_STDS,
        channels: int = 3,
        dtype: torch.dtype = torch.float32,
    ) -> None:
        if not stds:
            raise ArgumentError("fixed kernel bank needs at least one std")
        members = []
        for std in stds:
            if std <= 0:
                members.append(delta_kernel(K, channels, dtype))
            else:
                log_pdf = gaussian_log_density(K, float(std), dtype)
                members.append(normalize(log_pdf[:, :, None].expand(K, K, channels)))
        self.stds = tuple(float(s) for s in stds)
        self.kernels = torch.stack(members)  # (M, K, K, C)

    def __len__(self) -> int:
        return len(self.stds)

    def blur_all(self, windows: torch.Tensor) -> torch.Tensor:
        """(…, K, K, C) windows → (M, …, C): every bank member applied to every target."""
        outputs = []
        for kernel in self.kernels:
            weights = kernel.expand(windows.shape[:-3] + kernel.shape)
            outputs.append(convolve(windows, weights))
        return torch.stack(outputs)

    def select(
        self, windows: torch.Tensor, target: torch.Tensor
    ) -> tuple[torch.Tensor, torch.Tensor]:
        """
        Returns (blurred, choice): per pixel the member with the smallest squared error
        against `target` (summed over channels), and its index into the bank.
        """
        candidates = self.blur_all(windows)
        error = ((candidates - target.unsqueeze(0)) ** 2).sum(dim=-1)
        choice = error.detach().argmin(dim=0)
        index = choice.unsqueeze(0).unsqueeze(-1).expand((1,) + candidates.shape[1:])
        return candidates.gather(0, index).squeeze(0), choice
