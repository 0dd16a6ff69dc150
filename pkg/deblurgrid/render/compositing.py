"""Emission–absorption compositing along sampled rays."""

from __future__ import annotations

from dataclasses import dataclass

import torch

from deblurgrid.errors import ArgumentError


@dataclass
class Composite:
    color: torch.Tensor          # (N, 3)
    weights: torch.Tensor        # (N, Q)
    transmittance: torch.Tensor  # (N,) T after the last sample


def composite(sigma: torch.Tensor, rgb: torch.Tensor, delta: torch.Tensor) -> Composite:
    """
    T_q = exp(−Σ_{p<q} σ_p Δ_p), w_q = T_q (1 − exp(−σ_q Δ_q)), C = Σ w_q c_q.

    Shapes: sigma/delta (N, Q), rgb (N, Q, 3). Background is black. Negative σ or Δ
    raises ValueError. 1-D inputs are treated as a single ray.
    """
    single = sigma.dim() == 1
    if single:
        sigma, rgb, delta = sigma[None], rgb[None], delta[None]
    if sigma.shape != delta.shape or rgb.shape[:-1] != sigma.shape:
        raise ArgumentError(
            f"composite: mismatched shapes sigma {tuple(sigma.shape)}, "
            f"rgb {tuple(rgb.shape)}, delta {tuple(delta.shape)}"
        )
    if bool(torch.any(sigma < 0)):
        raise ArgumentError("composite: negative density")
    if bool(torch.any(delta < 0)):
        raise ArgumentError("composite: negative sample spacing")

    optical = sigma * delta
    cum = torch.cumsum(optical, dim=-1)
    exclusive = torch.cat([torch.zeros_like(cum[:, :1]), cum[:, :-1]], dim=-1)
    trans = torch.exp(-exclusive)
    weights = trans * (1.0 - torch.exp(-optical))
    color = (weights[..., None] * rgb).sum(dim=-2)
    t_final = torch.exp(-cum[:, -1])
    if single:
        return Composite(color=color[0], weights=weights[0], transmittance=t_final[0])
    return Composite(color=color, weights=weights, transmittance=t_final)
