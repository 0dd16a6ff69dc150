"""Ray batches, patches and full views rendered through a field."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol

import torch

from deblurgrid.data.camera import Camera, generate_rays, patch_pixels
from deblurgrid.field.radiance import FieldSample
from deblurgrid.sampler.patches import PatchSpec

from .compositing import composite
from .rays import Ray, intersect_box, sample_along_ray


class Field(Protocol):
    aabb: torch.Tensor

    def query(self, x: torch.Tensor, d: torch.Tensor) -> FieldSample: ...


@dataclass
class RayMeter:
    """Counts every camera ray sent through the renderer."""

    total: int = 0

    def add(self, n: int) -> None:
        self.total += int(n)

    def reset(self) -> None:
        self.total = 0


@dataclass
class RenderOutput:
    color: torch.Tensor    # (N, 3)
    depth: torch.Tensor    # (N,) expected termination depth, `far_depth` where acc ≈ 0
    acc: torch.Tensor      # (N,) Σ w_q
    weights: torch.Tensor  # (N, Q)


def render_rays(
    field: Field,
    origins: torch.Tensor,
    directions: torch.Tensor,
    n_samples: int,
    generator: torch.Generator | None = None,
    meter: RayMeter | None = None,
    far_depth: float | None = None,
    min_acc: float = 1e-3,
) -> RenderOutput:
    """Render (N, 3) rays: box intersection, stratified samples, query, composite."""
    aabb = field.aabb.to(origins.dtype)
    t_near, t_far, hit = intersect_box(origins, directions, aabb)
    ray = Ray(origins=origins, directions=directions, t_near=t_near, t_far=t_far)
    samples = sample_along_ray(ray, n_samples, generator=generator)
    out = field.query(samples.positions, directions[:, None, :])
    sigma = out.sigma * hit[:, None].to(out.sigma.dtype)
    comp = composite(sigma, out.rgb, samples.delta)
    if meter is not None:
        meter.add(origins.shape[0])

    acc = comp.weights.sum(dim=-1)
    expected = (comp.weights * samples.t).sum(dim=-1) / acc.clamp_min(1e-12)
    if far_depth is None:
        far_depth = float(t_far.max()) if bool(hit.any()) else 1.0
    depth = torch.where(acc > min_acc, expected, torch.full_like(expected, far_depth))
    return RenderOutput(color=comp.color, depth=depth, acc=acc, weights=comp.weights)


def render_patches(
    field: Field,
    cameras: list[Camera],
    views: torch.Tensor,
    origins: torch.Tensor,
    P: int,
    n_samples: int,
    generator: torch.Generator | None = None,
    meter: RayMeter | None = None,
) -> torch.Tensor:
    """
    Clean P×P patches for a batch: `views` (B,), `origins` (B, 2) top-left (h, w).

    Returns (B, P, P, 3). Every patch must lie fully inside its image.
    """
    dtype = field.aabb.dtype
    all_origins, all_dirs = [], []
    for view, (h, w) in zip(views.tolist(), origins.tolist(), strict=True):
        cam = cameras[view]
        PatchSpec(view, (h, w), P).validate(cam.height, cam.width)
        o, d = generate_rays(cam, patch_pixels((h, w), P).reshape(-1, 2), dtype=dtype)
        all_origins.append(o)
        all_dirs.append(d)
    out = render_rays(
        field, torch.cat(all_origins), torch.cat(all_dirs), n_samples,
        generator=generator, meter=meter,
    )
    return out.color.reshape(len(all_origins), P, P, 3)


def render_patch(
    field: Field,
    camera: Camera,
    origin: tuple[int, int],
    P: int,
    n_samples: int,
    generator: torch.Generator | None = None,
    meter: RayMeter | None = None,
) -> torch.Tensor:
    """One clean P×P×3 patch with top-left pixel `origin`; one ray per pixel center."""
    return render_patches(
        field, [camera], torch.tensor([0]), torch.tensor([origin]), P, n_samples,
        generator=generator, meter=meter,
    )[0]


@torch.no_grad()
def render_view(
    field: Field,
    camera: Camera,
    n_samples: int,
    chunk: int = 4096,
    far_depth: float | None = None,
) -> tuple[torch.Tensor, torch.Tensor]:
    """Full H×W render without jitter, in chunks. Returns (image (H, W, 3), depth (H, W))."""
    dtype = field.aabb.dtype
    pixels = patch_pixels((0, 0), max(camera.height, camera.width))
    pixels = pixels[: camera.height, : camera.width].reshape(-1, 2)
    origins, dirs = generate_rays(camera, pixels, dtype=dtype)
    if far_depth is None:
        _, t_far, hit = intersect_box(origins, dirs, field.aabb.to(dtype))
        far_depth = float(t_far[hit].max()) if bool(hit.any()) else 1.0
    colors, depths = [], []
    for start in range(0, origins.shape[0], chunk):
        out = render_rays(
            field, origins[start : start + chunk], dirs[start : start + chunk], n_samples,
            far_depth=far_depth,
        )
        colors.append(out.color)
        depths.append(out.depth)
    image = torch.cat(colors).reshape(camera.height, camera.width, 3)
    depth = torch.cat(depths).reshape(camera.height, camera.width)
    return image, depth
