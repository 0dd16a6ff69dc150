"""Rays, box intersection and stratified sampling along rays."""

from __future__ import annotations

from dataclasses import dataclass

import torch

from deblurgrid.errors import ArgumentError

UNIT_TOLERANCE = 1e-6


@dataclass
class Ray:
    """
    A batch of rays: origins/directions (N, 3), t_near/t_far (N,). A single ray is N = 1.

    Invariants: unit directions, t_near < t_far.
    """

    origins: torch.Tensor
    directions: torch.Tensor
    t_near: torch.Tensor
    t_far: torch.Tensor

    def __post_init__(self) -> None:
        norms = self.directions.norm(dim=-1)
        if bool(torch.any((norms - 1.0).abs() > UNIT_TOLERANCE * 10)):
            raise ArgumentError("ray directions must be unit length")
        if bool(torch.any(self.t_near >= self.t_far)):
            raise ArgumentError("every ray needs t_near < t_far")

    def __len__(self) -> int:
        return self.origins.shape[0]


@dataclass
class RaySamples:
    """Depths t (N, Q) strictly increasing, positions (N, Q, 3), spacings delta (N, Q)."""

    t: torch.Tensor
    positions: torch.Tensor
    delta: torch.Tensor


def intersect_box(
    origins: torch.Tensor, directions: torch.Tensor, aabb: torch.Tensor
) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
    """
    Slab test against an axis-aligned box. Returns (t_near, t_far, hit).

    Rays that miss get the placeholder interval [0, 1] and hit = False; the renderer
    zeroes their density so they come out black. t_near is clamped at 0 for origins
    inside the box.
    """
    safe = torch.where(
        directions.abs() < 1e-12, torch.full_like(directions, 1e-12), directions
    )
    t0 = (aabb[0] - origins) / safe
    t1 = (aabb[1] - origins) / safe
    t_near = torch.minimum(t0, t1).amax(dim=-1).clamp_min(0.0)
    t_far = torch.maximum(t0, t1).amin(dim=-1)
    hit = t_far > t_near
    t_near = torch.where(hit, t_near, torch.zeros_like(t_near))
    t_far = torch.where(hit, t_far, torch.ones_like(t_far))
    return t_near, t_far, hit


def sample_along_ray(
    ray: Ray, n_samples: int, generator: torch.Generator | None = None
) -> RaySamples:
    """
    Stratified depths over [t_near, t_far] split into `n_samples` equal bins.

    Without a generator every depth is its bin's midpoint; with one, each depth is a
    uniform draw inside its bin. delta_q = t_{q+1} − t_q, the last one t_far − t_Q.
    """
    if n_samples < 1:
        raise ArgumentError(f"n_samples must be >= 1, got {n_samples}")
    near = ray.t_near[:, None]
    far = ray.t_far[:, None]
    dtype = ray.origins.dtype
    n_rays = len(ray)
    if generator is None:
        offsets = torch.full((n_rays, n_samples), 0.5, dtype=dtype)
    else:
        offsets = torch.rand((n_rays, n_samples), generator=generator, dtype=dtype)
    bins = torch.arange(n_samples, dtype=dtype)[None, :]
    t = near + (far - near) * (bins + offsets) / n_samples
    delta = torch.cat([t[:, 1:] - t[:, :-1], far - t[:, -1:]], dim=-1)
    positions = ray.origins[:, None, :] + t[..., None] * ray.directions[:, None, :]
    return RaySamples(t=t, positions=positions, delta=delta)
