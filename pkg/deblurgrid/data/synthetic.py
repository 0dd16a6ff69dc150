"""
Synthetic scenes with known, spatially varying defocus blur.

Random emissive Gaussian blobs are baked into a dense voxel field and rendered sharp
from a ring of cameras. Each pixel is then blurred with the Gaussian PSF of the depth bin
it falls in, so the blur (and its per-pixel std) is known exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
import yaml
from loguru import logger
from pydantic import BaseModel, Field, ValidationError, model_validator
from scipy.ndimage import gaussian_filter

from deblurgrid.config.settings import get_settings
from deblurgrid.errors import ConfigError, SynthesisError
from deblurgrid.field.dense import DenseField
from deblurgrid.render.renderer import render_view
from deblurgrid.sharpness.focus import PriorSource, SharpnessMap

from .camera import Camera
from .dataset import Dataset, View, write_dataset

SPEC_ECHO = "synth.yaml"
WORLD_UP = np.array([0.0, 0.0, 1.0])


class PsfBin(BaseModel):
    """Pixels with depth in [depth_min, depth_max) get a Gaussian blur of `std` pixels."""

    depth_min: float = Field(default=0.0, ge=0)
    depth_max: float = math.inf
    std: float = Field(default=0.0, ge=0)

    @model_validator(mode="after")
    def check_range(self) -> PsfBin:
        if self.depth_max <= self.depth_min:
            raise ValueError(f"empty depth bin [{self.depth_min}, {self.depth_max})")
        return self


def default_psf_bank() -> list[PsfBin]:
    # near in focus, mid slightly blurred, far strongly blurred
    return [
        PsfBin(depth_min=0.0, depth_max=3.6, std=0.0),
        PsfBin(depth_min=3.6, depth_max=4.4, std=1.5),
        PsfBin(depth_min=4.4, depth_max=math.inf, std=3.0),
    ]


class SyntheticSceneSpec(BaseModel):
    seed: int = Field(default=0, ge=0)
    n_blobs: int = Field(default=8, ge=0)
    grid_res: int = Field(default=48, ge=2)
    n_views: int = Field(default=12, gt=0, description="Blurred training views")
    n_test: int = Field(default=4, ge=0, description="Sharp held-out views")
    height: int = Field(default=64, gt=0)
    width: int = Field(default=64, gt=0)
    focal_scale: float = Field(default=1.0, gt=0, description="focal = focal_scale · width")
    radius: float = Field(default=4.0, gt=0)
    elevation: float = 1.0
    half_extent: float | None = Field(default=None, gt=0)
    blob_radius: tuple[float, float] = (0.2, 0.5)
    blob_density: float = Field(default=40.0, gt=0)
    samples_per_ray: int = Field(default=128, gt=0)
    psf_bank: list[PsfBin] = Field(default_factory=default_psf_bank)

    @property
    def extent(self) -> float:
        if self.half_extent is not None:
            return self.half_extent
        return get_settings().scene_half_extent

    @property
    def far_depth(self) -> float:
        """Depth assigned to pixels that hit nothing: beyond every point of the box."""
        return math.hypot(self.radius, self.elevation) + self.extent * math.sqrt(3.0)

    @classmethod
    def from_yaml(cls, path: Path) -> SyntheticSceneSpec:
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"scene spec not found: {path}")
        try:
            return cls.model_validate(yaml.safe_load(path.read_text()) or {})
        except (yaml.YAMLError, ValidationError) as e:
            raise ConfigError(f"invalid scene spec {path}: {e}") from e


@dataclass
class SyntheticScene:
    spec: SyntheticSceneSpec
    field: DenseField
    cameras: list[Camera]
    splits: list[str]
    sharp: list[np.ndarray]
    depth: list[np.ndarray]

    @property
    def names(self) -> list[str]:
        return [f"{split}_{i:03d}.png" for i, split in enumerate(self.splits)]


# ── Scene ─────────────────────────────────────────────────────────


def _bake_blobs(spec: SyntheticSceneSpec, rng: np.random.Generator) -> DenseField:
    half = spec.extent
    axis = np.linspace(-half, half, spec.grid_res)
    zz, yy, xx = np.meshgrid(axis, axis, axis, indexing="ij")
    points = np.stack([xx, yy, zz], axis=-1)

    bumps = np.zeros(points.shape[:-1])
    weighted_rgb = np.zeros((3,) + points.shape[:-1])
    for _ in range(spec.n_blobs):
        center = rng.uniform(-0.6 * half, 0.6 * half, size=3)
        radius = rng.uniform(*spec.blob_radius)
        color = rng.uniform(0.2, 1.0, size=3)
        bump = np.exp(-((points - center) ** 2).sum(-1) / (2.0 * radius**2))
        bumps += bump
        weighted_rgb += color[:, None, None, None] * bump
    sigma = spec.blob_density * bumps
    # color is the bump-weighted mean of overlapping blobs
    rgb = np.clip(weighted_rgb / np.maximum(bumps, 1e-12), 0.0, 1.0)
    aabb = torch.tensor([[-half] * 3, [half] * 3], dtype=torch.float64)
    return DenseField(torch.from_numpy(sigma), torch.from_numpy(rgb), aabb)


def ring_cameras(spec: SyntheticSceneSpec) -> tuple[list[Camera], list[str]]:
    """Train views evenly spaced on a ring; test views halfway between train neighbors."""
    focal = spec.focal_scale * spec.width
    total = spec.n_views + spec.n_test
    cameras, splits = [], []
    for i in range(total):
        if i < spec.n_views:
            angle, split = 2.0 * math.pi * i / spec.n_views, "train"
        else:
            j = i - spec.n_views
            angle = 2.0 * math.pi * (j * spec.n_views / max(spec.n_test, 1) + 0.5) / spec.n_views
            split = "test"
        eye = np.array(
            [spec.radius * math.cos(angle), spec.radius * math.sin(angle), spec.elevation]
        )
        cameras.append(Camera.look_at(eye, np.zeros(3), WORLD_UP, focal, spec.height, spec.width))
        splits.append(split)
    return cameras, splits


def make_synthetic_scene(
    spec: SyntheticSceneSpec, rng: np.random.Generator | None = None
) -> SyntheticScene:
    """Bake the field and render every view sharp, with expected-termination depth."""
    rng = rng if rng is not None else np.random.default_rng(spec.seed)
    field = _bake_blobs(spec, rng)
    cameras, splits = ring_cameras(spec)
    sharp, depth = [], []
    for camera in cameras:
        image, d = render_view(field, camera, spec.samples_per_ray, far_depth=spec.far_depth)
        sharp.append(image.clamp(0.0, 1.0).numpy())
        depth.append(d.numpy())
    logger.info(
        f"Synthetic scene: {spec.n_blobs} blobs, {spec.n_views}+{spec.n_test} views "
        f"at {spec.height}x{spec.width}"
    )
    return SyntheticScene(spec, field, cameras, splits, sharp, depth)


# ── Blur ──────────────────────────────────────────────────────────


def synth_blur(
    sharp: np.ndarray, depth: np.ndarray, psf_bank: list[PsfBin]
) -> tuple[np.ndarray, np.ndarray]:
    """
    Blur each pixel with the Gaussian PSF of its depth bin (mirror-padded).

    Returns (blurred (H, W, 3), per-pixel std (H, W)). The first bin that contains a
    depth wins; a depth no bin covers raises SynthesisError.
    """
    if sharp.shape[:2] != depth.shape:
        raise SynthesisError(f"depth {depth.shape} does not match image {sharp.shape[:2]}")
    blurred = np.empty_like(sharp)
    std_map = np.empty(depth.shape)
    assigned = np.zeros(depth.shape, dtype=bool)
    for psf in psf_bank:
        mask = (depth >= psf.depth_min) & (depth < psf.depth_max) & ~assigned
        if not mask.any():
            continue
        if psf.std > 0:
            filtered = gaussian_filter(sharp, sigma=(psf.std, psf.std, 0.0), mode="mirror")
        else:
            filtered = sharp
        blurred[mask] = filtered[mask]
        std_map[mask] = psf.std
        assigned |= mask
    if not assigned.all():
        missing = depth[~assigned]
        raise SynthesisError(
            f"{missing.size} pixels have depths no PSF bin covers "
            f"(range {missing.min():.3f}..{missing.max():.3f})"
        )
    return blurred, std_map


def defocus_oracle(std_map: np.ndarray, max_std: float) -> SharpnessMap:
    """The true blur std as a sharpness map: 1 − std / max_std."""
    defocus = std_map / max_std if max_std > 0 else np.zeros_like(std_map)
    return SharpnessMap(values=1.0 - defocus, source=PriorSource.EXTERNAL)


def build_synthetic_dataset(scene: SyntheticScene, root: Path | None = None) -> Dataset:
    """
    Train views carry the blurred image plus the sharp image, normalized depth and the
    true defocus map; test views are sharp.
    """
    spec = scene.spec
    max_std = max((psf.std for psf in spec.psf_bank), default=0.0)
    views = []
    for name, camera, split, sharp, depth in zip(
        scene.names, scene.cameras, scene.splits, scene.sharp, scene.depth, strict=True
    ):
        unit_depth = np.clip(depth / spec.far_depth, 0.0, 1.0)
        if split == "train":
            blurred, std_map = synth_blur(sharp, depth, spec.psf_bank)
            views.append(
                View(
                    name, blurred, camera, "train",
                    external=defocus_oracle(std_map, max_std), depth=unit_depth, sharp=sharp,
                )
            )
        else:
            views.append(View(name, sharp, camera, "test", depth=unit_depth, sharp=sharp))
    aabb = scene.field.aabb.numpy()
    return Dataset(Path(root) if root is not None else Path("."), views, aabb)


def write_synthetic(spec: SyntheticSceneSpec, root: Path) -> Dataset:
    """Synthesize, blur and write a dataset to `root`; the scene spec is echoed as YAML."""
    root = Path(root)
    scene = make_synthetic_scene(spec)
    dataset = build_synthetic_dataset(scene, root)
    write_dataset(dataset, root)
    echo = spec.model_dump()
    echo["blob_radius"] = list(spec.blob_radius)
    (root / SPEC_ECHO).write_text(yaml.safe_dump(echo, sort_keys=False))
    return dataset
