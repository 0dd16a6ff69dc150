"""Small MLP kernel generator, the per-pixel network that the kernel grid replaces."""

from __future__ import annotations

import torch
from torch import nn

EMBED_DIM = 32
GENERATOR_WIDTH = 64


class KernelGenerator(nn.Module):
    """
    Per-pixel embedding → Linear(64) → ReLU → Linear(K²·C) → softmax over K².

    Only used as the timing reference in the kernel-generation benchmark.
    """

    def __init__(
        self,
        K: int,
        channels: int = 1,
        embed_dim: int = EMBED_DIM,
        width: int = GENERATOR_WIDTH,
        dtype: torch.dtype = torch.float32,
    ) -> None:
        super().__init__()
        self.K = K
        self.channels = channels
        self.net = nn.Sequential(
            nn.Linear(embed_dim, width, dtype=dtype),
            nn.ReLU(),
            nn.Linear(width, K * K * channels, dtype=dtype),
        )

    def forward(self, embedding: torch.Tensor) -> torch.Tensor:
        """(n, embed_dim) → normalized kernels (n, K, K, C)."""
        logits = self.net(embedding).reshape(-1, self.K * self.K, self.channels)
        return torch.softmax(logits, dim=1).reshape(-1, self.K, self.K, self.channels)
