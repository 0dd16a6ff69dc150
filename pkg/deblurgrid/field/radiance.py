"""RadianceField: density grid, appearance grid and color head behind one query."""

from __future__ import annotations

from dataclasses import dataclass

import torch
import torch.nn.functional as F
from torch import nn

from deblurgrid.config.constants import APP_FEATURE_DIM, DENSITY_SHIFT, DIRECTION_FREQS

from .color_head import ColorHead
from .vm_grid import VMGrid, vm_eval


@dataclass
class FieldSample:
    """Density (1/world-unit, ≥ 0) and color in [0, 1]³ for a batch of points."""

    sigma: torch.Tensor  # (...)
    rgb: torch.Tensor    # (..., 3)


class RadianceField(nn.Module):
    """
    σ(x) = softplus(vm_eval(G_σ, x) + shift);
    c(x, d) = head(W · rank_features(G_c, x), γ(d)).

    The appearance grid contributes one scalar per axis-rank; a bias-free linear layer
    maps that vector to `app_dim` features for the head.
    """

    def __init__(
        self,
        aabb: torch.Tensor,
        grid_res: int = 64,
        density_rank: int = 8,
        app_rank: int = 8,
        app_dim: int = APP_FEATURE_DIM,
        hidden_dim: int = 64,
        dir_freqs: int = DIRECTION_FREQS,
        density_shift: float = DENSITY_SHIFT,
        init_scale: float = 0.1,
        generator: torch.Generator | None = None,
        dtype: torch.dtype = torch.float32,
    ) -> None:
        super().__init__()
        res = (grid_res, grid_res, grid_res)
        self.density = VMGrid(
            res, (density_rank,) * 3, aabb, init_scale=init_scale, generator=generator, dtype=dtype
        )
        self.appearance = VMGrid(
            res, (app_rank,) * 3, aabb, init_scale=init_scale, generator=generator, dtype=dtype
        )
        self.basis = nn.Linear(self.appearance.total_rank, app_dim, bias=False, dtype=dtype)
        self.head = ColorHead(app_dim, dir_freqs, hidden_dim=hidden_dim, dtype=dtype)
        self.density_shift = density_shift
        if generator is not None:
            # seeded from `generator`, not the global RNG
            with torch.no_grad():
                for layer in (self.basis, self.head.hidden, self.head.out):
                    bound = 1.0 / layer.in_features**0.5
                    layer.weight.copy_(
                        (torch.rand(layer.weight.shape, generator=generator, dtype=dtype) * 2 - 1)
                        * bound
                    )
                    if layer.bias is not None:
                        layer.bias.copy_(
                            (torch.rand(layer.bias.shape, generator=generator, dtype=dtype) * 2 - 1)
                            * bound
                        )

    @property
    def aabb(self) -> torch.Tensor:
        return self.density.aabb

    @property
    def dtype(self) -> torch.dtype:
        return self.density.aabb.dtype

    def density_logits(self, x: torch.Tensor) -> torch.Tensor:
        return self.density.rank_features(x).sum(dim=-1) + self.density_shift

    def query(self, x: torch.Tensor, d: torch.Tensor) -> FieldSample:
        """
        Batched query for rendering. Points outside the box are culled to σ = 0.

        `x` is (..., 3); `d` broadcasts against it.
        """
        inside = self.density.contains(x)
        sigma = F.softplus(self.density_logits(x)) * inside.to(x.dtype)
        feats = self.basis(self.appearance.rank_features(x))
        d = torch.broadcast_to(d, x.shape)
        rgb = self.head(feats, d)
        return FieldSample(sigma=sigma, rgb=rgb)


def query_point(field: RadianceField, x: torch.Tensor, d: torch.Tensor) -> FieldSample:
    """Strict query: out-of-box points raise FieldDomainError instead of being culled."""
    x = torch.as_tensor(x, dtype=field.dtype)
    d = torch.as_tensor(d, dtype=field.dtype)
    pre = vm_eval(field.density, x) + field.density_shift
    feats = field.basis(field.appearance.rank_features(x))
    rgb = field.head(feats, torch.broadcast_to(d, x.shape))
    return FieldSample(sigma=F.softplus(pre), rgb=rgb)
