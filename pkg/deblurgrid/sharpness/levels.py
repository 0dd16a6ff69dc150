"""Sharpness level maps: quantization into N_k groups, depth segments, skip groups."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from deblurgrid.errors import ArgumentError

from .focus import SharpnessMap


@dataclass
class SharpnessLevelMap:
    """
    Per-pixel group index in [0, n_levels); higher level = sharper.

    The `n_skip` sharpest groups bypass blurring: levels >= skip_threshold.
    """

    levels: np.ndarray
    n_levels: int
    n_skip: int = 0

    def __post_init__(self) -> None:
        self.levels = np.asarray(self.levels, dtype=np.int64)
        if self.n_levels < 1:
            raise ArgumentError(f"n_levels must be >= 1, got {self.n_levels}")
        if not 0 <= self.n_skip <= self.n_levels:
            raise ArgumentError(f"n_skip must be in [0, {self.n_levels}], got {self.n_skip}")
        if self.levels.size and (self.levels.min() < 0 or self.levels.max() >= self.n_levels):
            raise ArgumentError(f"levels must lie in [0, {self.n_levels})")

    @property
    def skip_threshold(self) -> int:
        return self.n_levels - self.n_skip

    @property
    def shape(self) -> tuple[int, int]:
        return self.levels.shape

    def with_skip(self, n_skip: int) -> SharpnessLevelMap:
        return SharpnessLevelMap(self.levels, self.n_levels, n_skip)


def _bin_uniform(values: np.ndarray, n_levels: int) -> np.ndarray:
    lo, hi = float(values.min()), float(values.max())
    if hi <= lo:
        return np.zeros(values.shape, dtype=np.int64)
    levels = np.floor(n_levels * (values - lo) / (hi - lo)).astype(np.int64)
    return np.clip(levels, 0, n_levels - 1)


def quantize(sharpness: SharpnessMap, n_levels: int, n_skip: int = 0) -> SharpnessLevelMap:
    """
    Uniform bins over this view's [min, max]; the top value lands in the last bin.

    A constant map puts every pixel at level 0.
    """
    if n_levels < 1:
        raise ArgumentError(f"n_levels must be >= 1, got {n_levels}")
    return SharpnessLevelMap(_bin_uniform(sharpness.values, n_levels), n_levels, n_skip)


def depth_segments(depth: np.ndarray, n_segments: int) -> np.ndarray:
    """Segment index per pixel from equal-mass (quantile) depth bins."""
    if n_segments < 1:
        raise ArgumentError(f"n_segments must be >= 1, got {n_segments}")
    edges = np.quantile(depth, np.linspace(0.0, 1.0, n_segments + 1))
    return np.searchsorted(edges[1:-1], depth, side="right").astype(np.int64)


def depth_segmented_quantize(
    sharpness: SharpnessMap,
    depth: np.ndarray | None,
    n_segments: int,
    n_levels: int,
    n_skip: int = 0,
) -> SharpnessLevelMap:
    """
    Split pixels into depth-quantile segments and quantize each segment on its own
    [min, max], so every segment spans the full level range.
    """
    if depth is None:
        raise ArgumentError(
            "depth-segmented quantization needs a depth map; use quantize() instead"
        )
    depth = np.asarray(depth, dtype=np.float64)
    if depth.shape != sharpness.shape:
        raise ArgumentError(f"depth {depth.shape} and sharpness {sharpness.shape} differ in size")
    segments = depth_segments(depth, n_segments)
    levels = np.zeros(sharpness.shape, dtype=np.int64)
    for seg in np.unique(segments):
        mask = segments == seg
        levels[mask] = _bin_uniform(sharpness.values[mask], n_levels)
    return SharpnessLevelMap(levels, n_levels, n_skip)


def skip_mask(level_map: SharpnessLevelMap, n_skip: int | None = None) -> np.ndarray:
    """True exactly where level >= N_k − n_skip (defaults to the map's own n_skip)."""
    n_skip = level_map.n_skip if n_skip is None else n_skip
    if not 0 <= n_skip <= level_map.n_levels:
        raise ArgumentError(f"n_skip must be in [0, {level_map.n_levels}], got {n_skip}")
    return level_map.levels >= level_map.n_levels - n_skip


# ── Ablation assignments ───────────────────────────────────────────


def random_levels(
    shape: tuple[int, int], n_levels: int, rng: np.random.Generator, n_skip: int = 0
) -> SharpnessLevelMap:
    """Each pixel drawn uniformly from the N_k groups, ignoring image content."""
    return SharpnessLevelMap(rng.integers(0, n_levels, size=shape), n_levels, n_skip)


def local_levels(shape: tuple[int, int], n_levels: int, n_skip: int = 0) -> SharpnessLevelMap:
    """Groups by position: the image is cut into N_k near-square tiles, row-major."""
    height, width = shape
    rows = max(1, int(np.floor(np.sqrt(n_levels * height / width))))
    rows = min(rows, n_levels)
    cols = int(np.ceil(n_levels / rows))
    r = np.minimum(np.arange(height) * rows // height, rows - 1)
    c = np.minimum(np.arange(width) * cols // width, cols - 1)
    levels = np.minimum(r[:, None] * cols + c[None, :], n_levels - 1)
    return SharpnessLevelMap(levels, n_levels, n_skip)
