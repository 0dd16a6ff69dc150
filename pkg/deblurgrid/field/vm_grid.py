"""Vector–matrix decomposed 3D grids."""

from __future__ import annotations

import torch
import torch.nn.functional as F
from torch import nn

from deblurgrid.errors import FieldDomainError, ShapeError

# For each axis a: the two remaining axes (b, c), b < c.
PLANE_AXES: tuple[tuple[int, int], ...] = ((1, 2), (0, 2), (0, 1))

# Points this far outside the box (in normalized units) still count as inside.
BOX_TOLERANCE = 1e-6


class VMGrid(nn.Module):
    """
    A 3D scalar field stored as a sum of vector × matrix products.

    For each axis a with remaining axes (b, c), rank r contributes
    `line[a][r](x_a) · plane[a][r](x_b, x_c)`; evaluation sums over ranks and axes.

    Storage layout (what `grid_sample` expects):
        lines[a]:  (1, R_a, N_a, 1)      node i of axis a at row i
        planes[a]: (1, R_a, N_c, N_b)    node (j, k) of axes (b, c) at [k, j]

    Nodes sit on the box corners (align_corners=True): node i of axis a is at
    `aabb[0, a] + i · extent_a / (N_a − 1)`.
    """

    def __init__(
        self,
        resolution: tuple[int, int, int],
        ranks: tuple[int, int, int],
        aabb: torch.Tensor,
        init_scale: float = 0.1,
        generator: torch.Generator | None = None,
        dtype: torch.dtype = torch.float32,
    ) -> None:
        super().__init__()
        resolution = tuple(int(n) for n in resolution)
        ranks = tuple(int(r) for r in ranks)
        if len(resolution) != 3 or len(ranks) != 3:
            raise ShapeError(f"resolution and ranks need 3 entries, got {resolution}, {ranks}")
        if min(resolution) < 2:
            raise ShapeError(f"every axis needs at least 2 nodes, got {resolution}")
        if min(ranks) < 1:
            raise ShapeError(f"rank counts must be >= 1, got {ranks}")
        aabb = torch.as_tensor(aabb, dtype=dtype).reshape(2, 3)
        if not bool(torch.all(aabb[1] > aabb[0])):
            raise ShapeError(f"bounding box needs positive extent per axis, got {aabb.tolist()}")

        self.resolution = resolution
        self.ranks = ranks
        self.register_buffer("aabb", aabb.clone())

        lines, planes = [], []
        for a, (b, c) in enumerate(PLANE_AXES):
            line = init_scale * torch.randn(
                (1, ranks[a], resolution[a], 1), generator=generator, dtype=dtype
            )
            plane = init_scale * torch.randn(
                (1, ranks[a], resolution[c], resolution[b]), generator=generator, dtype=dtype
            )
            lines.append(nn.Parameter(line))
            planes.append(nn.Parameter(plane))
        self.lines = nn.ParameterList(lines)
        self.planes = nn.ParameterList(planes)

    @property
    def total_rank(self) -> int:
        return sum(self.ranks)

    def normalize(self, x: torch.Tensor) -> torch.Tensor:
        """World coordinates → [-1, 1]³ box coordinates."""
        lo, hi = self.aabb[0], self.aabb[1]
        return (x - lo) / (hi - lo) * 2.0 - 1.0

    def contains(self, x: torch.Tensor) -> torch.Tensor:
        u = self.normalize(x)
        return torch.all(u.abs() <= 1.0 + BOX_TOLERANCE, dim=-1)

    def rank_features(self, x: torch.Tensor) -> torch.Tensor:
        """
        Per-rank products for points `x` of shape (..., 3) → (..., R_x + R_y + R_z).

        No domain check: coordinates are clamped to the box, so callers that cull
        outside points (the renderer) get finite values everywhere.
        """
        batch_shape = x.shape[:-1]
        u = self.normalize(x.reshape(-1, 3)).clamp(-1.0, 1.0)
        zeros = torch.zeros_like(u[:, 0])
        feats = []
        for a, (b, c) in enumerate(PLANE_AXES):
            line_coords = torch.stack([zeros, u[:, a]], dim=-1).view(1, -1, 1, 2)
            plane_coords = torch.stack([u[:, b], u[:, c]], dim=-1).view(1, -1, 1, 2)
            line = F.grid_sample(
                self.lines[a], line_coords, mode="bilinear", align_corners=True,
                padding_mode="border",
            )
            plane = F.grid_sample(
                self.planes[a], plane_coords, mode="bilinear", align_corners=True,
                padding_mode="border",
            )
            # (1, R, N, 1) → (N, R)
            feats.append((line * plane)[0, :, :, 0].transpose(0, 1))
        return torch.cat(feats, dim=-1).reshape(*batch_shape, self.total_rank)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return vm_eval(self, x)


def vm_eval(grid: VMGrid, x: torch.Tensor) -> torch.Tensor:
    """
    Evaluate the decomposed field at world points `x` (..., 3) → (...).

    Lines are read by linear and planes by bilinear interpolation. Points outside the
    bounding box raise FieldDomainError; the renderer culls them instead.
    """
    x = torch.as_tensor(x, dtype=grid.aabb.dtype)
    inside = grid.contains(x)
    if not bool(torch.all(inside)):
        n_out = int((~inside).sum())
        raise FieldDomainError(f"{n_out} point(s) outside the grid bounding box")
    return grid.rank_features(x).sum(dim=-1)
