"""Shallow color decoder and view-direction encoding."""

from __future__ import annotations

import math

import torch
from loguru import logger
from torch import nn

UNIT_TOLERANCE = 1e-6


def encoding_dim(n_freq: int) -> int:
    return 3 + 6 * n_freq


def encode_direction(d: torch.Tensor, n_freq: int) -> torch.Tensor:
    """
    Frequency encoding of unit directions (..., 3) → (..., 3 + 6·n_freq).

    Layout: [d, sin(π d), cos(π d), sin(2π d), cos(2π d), ...], each block 3 wide.
    """
    norm = d.norm(dim=-1, keepdim=True)
    if bool(torch.any((norm - 1.0).abs() > UNIT_TOLERANCE)):
        logger.warning("encode_direction: non-unit direction(s) normalized")
        d = d / norm.clamp_min(torch.finfo(d.dtype).tiny)
    parts = [d]
    for k in range(n_freq):
        scaled = (2.0**k) * math.pi * d
        parts.append(torch.sin(scaled))
        parts.append(torch.cos(scaled))
    return torch.cat(parts, dim=-1)


class ColorHead(nn.Module):
    """feature ⊕ γ(d) → hidden (ReLU) → 3 (logistic). Output always lies in [0, 1]."""

    def __init__(
        self,
        feature_dim: int,
        dir_freqs: int,
        hidden_dim: int = 64,
        dtype: torch.dtype = torch.float32,
    ) -> None:
        super().__init__()
        self.feature_dim = feature_dim
        self.dir_freqs = dir_freqs
        self.hidden = nn.Linear(feature_dim + encoding_dim(dir_freqs), hidden_dim, dtype=dtype)
        self.out = nn.Linear(hidden_dim, 3, dtype=dtype)

    def forward(self, features: torch.Tensor, directions: torch.Tensor) -> torch.Tensor:
        enc = encode_direction(directions, self.dir_freqs)
        h = torch.relu(self.hidden(torch.cat([features, enc], dim=-1)))
        return torch.sigmoid(self.out(h))
