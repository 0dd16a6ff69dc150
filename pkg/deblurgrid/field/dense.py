"""Dense voxel field: the baked ground truth of synthetic scenes."""

from __future__ import annotations

import torch
import torch.nn.functional as F

from .radiance import FieldSample
from .vm_grid import BOX_TOLERANCE


class DenseField:
    """
    Densities and view-independent colors on an explicit N³ node grid, read by
    trilinear interpolation. Same box convention and `query` contract as RadianceField.

    Storage: `sigma` (N_z, N_y, N_x) and `rgb` (3, N_z, N_y, N_x), node (i, j, k) of
    axes (x, y, z) at [k, j, i].
    """

    def __init__(self, sigma: torch.Tensor, rgb: torch.Tensor, aabb: torch.Tensor) -> None:
        self.sigma = sigma
        self.rgb = rgb
        self.aabb = torch.as_tensor(aabb, dtype=sigma.dtype).reshape(2, 3)

    @property
    def dtype(self) -> torch.dtype:
        return self.sigma.dtype

    def normalize(self, x: torch.Tensor) -> torch.Tensor:
        lo, hi = self.aabb[0], self.aabb[1]
        return (x - lo) / (hi - lo) * 2.0 - 1.0

    def query(self, x: torch.Tensor, d: torch.Tensor) -> FieldSample:
        batch_shape = x.shape[:-1]
        u = self.normalize(x.reshape(-1, 3))
        inside = torch.all(u.abs() <= 1.0 + BOX_TOLERANCE, dim=-1)
        coords = u.clamp(-1.0, 1.0).view(1, -1, 1, 1, 3)
        sigma = F.grid_sample(
            self.sigma[None, None], coords, mode="bilinear", align_corners=True
        ).view(-1)
        rgb = F.grid_sample(self.rgb[None], coords, mode="bilinear", align_corners=True)
        rgb = rgb.view(3, -1).transpose(0, 1)
        sigma = sigma * inside.to(sigma.dtype)
        return FieldSample(sigma=sigma.reshape(batch_shape), rgb=rgb.reshape(*batch_shape, 3))
