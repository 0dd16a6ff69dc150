"""Per-view learnable camera response: a gamma curve applied after blurring."""

from __future__ import annotations

import math

import torch
import torch.nn.functional as F
from torch import nn

from deblurgrid.config.constants import CRF_MIN_GAMMA

# softplus(g) + 0.2 == 1 at g = log(e^0.8 − 1)
IDENTITY_G = math.log(math.expm1(1.0 - CRF_MIN_GAMMA))
TINY = 1e-12


def effective_gamma(g: torch.Tensor) -> torch.Tensor:
    return F.softplus(g) + CRF_MIN_GAMMA


def crf_apply(rgb: torch.Tensor, gamma: torch.Tensor | float) -> torch.Tensor:
    """
    rgb′ = clamp(rgb, 0, 1) ** gamma. `gamma` is a scalar or (B,) broadcast over (B, …).

    0 maps to exactly 0 with a finite gradient for every gamma.
    """
    gamma = torch.as_tensor(gamma, dtype=rgb.dtype)
    if gamma.dim() == 1:
        gamma = gamma.reshape(-1, *([1] * (rgb.dim() - 1)))
    x = rgb.clamp(0.0, 1.0)
    toned = x.clamp_min(TINY) ** gamma
    return torch.where(x > 0, toned, torch.zeros_like(toned))


class CameraResponse(nn.Module):
    """One unconstrained exponent parameter per training view, initialized to identity."""

    def __init__(self, n_views: int, dtype: torch.dtype = torch.float32) -> None:
        super().__init__()
        self.g = nn.Parameter(torch.full((n_views,), IDENTITY_G, dtype=dtype))

    def gamma(self, views: torch.Tensor | None = None) -> torch.Tensor:
        g = self.g if views is None else self.g[views]
        return effective_gamma(g)

    def forward(self, rgb: torch.Tensor, views: torch.Tensor) -> torch.Tensor:
        return crf_apply(rgb, self.gamma(views))
