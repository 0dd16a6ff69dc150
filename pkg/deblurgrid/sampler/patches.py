"""Random patch sampling and the shared-neighbor ray budget."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
import torch

from deblurgrid.errors import ArgumentError
from deblurgrid.sharpness.levels import SharpnessLevelMap, skip_mask

# Patch sizes of the ray-budget table, at K = 11
BUDGET_PATCH_SIZES = (26, 22, 18)
BUDGET_KERNEL = 11


@dataclass(frozen=True)
class PatchSpec:
    view: int
    origin: tuple[int, int]
    P: int

    def validate(self, height: int, width: int) -> None:
        h, w = self.origin
        if not (0 <= h <= height - self.P and 0 <= w <= width - self.P):
            raise ArgumentError(
                f"patch origin {self.origin} (P={self.P}) outside a {height}x{width} view"
            )


@dataclass
class PatchBatch:
    """
    One training batch. Per-target arrays are (B, P′, P′[, C]) and aligned with the
    patch interior, offset (K−1)/2 from each origin.
    """

    patches: list[PatchSpec]
    P: int
    K: int
    levels: torch.Tensor
    skip: torch.Tensor
    targets: torch.Tensor

    def __post_init__(self) -> None:
        expected = (len(self.patches), self.P_prime, self.P_prime)
        if tuple(self.levels.shape) != expected or tuple(self.skip.shape) != expected:
            raise ArgumentError(f"levels/skip must be {expected}")
        if tuple(self.targets.shape[:3]) != expected:
            raise ArgumentError(f"targets must be {expected} + (C,)")

    @property
    def P_prime(self) -> int:
        return self.P - self.K + 1

    @property
    def views(self) -> torch.Tensor:
        return torch.tensor([p.view for p in self.patches], dtype=torch.long)

    @property
    def origins(self) -> torch.Tensor:
        return torch.tensor([p.origin for p in self.patches], dtype=torch.long)

    @property
    def n_targets(self) -> int:
        return len(self.patches) * self.P_prime**2

    @property
    def n_rays(self) -> int:
        return len(self.patches) * self.P**2


def sample_batch(
    rng: np.random.Generator,
    images: Sequence[np.ndarray],
    level_maps: Sequence[SharpnessLevelMap],
    n_patches: int,
    P: int,
    K: int,
    dtype: torch.dtype = torch.float32,
) -> PatchBatch:
    """
    n_patches independent draws: view uniform (with replacement), origin uniform over
    [0, H−P] × [0, W−P]. Patches never straddle the border.
    """
    if P < K:
        raise ArgumentError(f"P must be >= K, got P={P}, K={K}")
    if len(images) != len(level_maps) or not images:
        raise ArgumentError("need one level map per image and at least one image")
    pad = (K - 1) // 2
    P_prime = P - K + 1
    patches: list[PatchSpec] = []
    levels, masks, targets = [], [], []
    for _ in range(n_patches):
        view = int(rng.integers(0, len(images)))
        height, width = images[view].shape[:2]
        if height < P or width < P:
            raise ArgumentError(f"view {view} is {height}x{width}, smaller than the patch size {P}")
        h = int(rng.integers(0, height - P + 1))
        w = int(rng.integers(0, width - P + 1))
        patches.append(PatchSpec(view, (h, w), P))
        rows = slice(h + pad, h + pad + P_prime)
        cols = slice(w + pad, w + pad + P_prime)
        level_map = level_maps[view]
        levels.append(level_map.levels[rows, cols])
        masks.append(skip_mask(level_map)[rows, cols])
        targets.append(images[view][rows, cols])
    return PatchBatch(
        patches=patches,
        P=P,
        K=K,
        levels=torch.from_numpy(np.stack(levels)).long(),
        skip=torch.from_numpy(np.stack(masks)),
        targets=torch.from_numpy(np.stack(targets)).to(dtype),
    )


def rays_per_pixel(P_prime: int, K: int) -> float:
    """Rendered rays per target pixel when the P′×P′ targets share neighbors: (P′+K−1)²/P′²."""
    if P_prime < 1 or K < 1:
        raise ArgumentError(f"P′ and K must be >= 1, got P′={P_prime}, K={K}")
    return (P_prime + K - 1) ** 2 / P_prime**2


def ray_budget_table(
    patch_sizes: Sequence[int] = BUDGET_PATCH_SIZES, K: int = BUDGET_KERNEL
) -> list[tuple[int, int, float]]:
    """(P, P′, rays per target) rows."""
    return [(P, P - K + 1, rays_per_pixel(P - K + 1, K)) for P in patch_sizes]
