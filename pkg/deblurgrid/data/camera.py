"""Pinhole cameras: intrinsics, rigid camera-to-world pose, pixel rays."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch

from deblurgrid.errors import CameraError

ORTHONORMAL_TOLERANCE = 1e-5


@dataclass
class Camera:
    """
    OpenCV-style pinhole: +z looks forward, +x right, +y down in image space.

    `c2w` is a 4×4 rigid transform; pixel (h, w) has its center at (w + 0.5, h + 0.5).
    """

    fx: float
    fy: float
    cx: float
    cy: float
    c2w: np.ndarray
    height: int
    width: int

    def __post_init__(self) -> None:
        self.c2w = np.asarray(self.c2w, dtype=np.float64).reshape(4, 4)
        if self.fx <= 0 or self.fy <= 0:
            raise CameraError(f"focal lengths must be positive, got fx={self.fx}, fy={self.fy}")
        if self.height <= 0 or self.width <= 0:
            raise CameraError(f"image size must be positive, got {self.height}×{self.width}")
        rot = self.rotation
        err = np.linalg.norm(rot.T @ rot - np.eye(3))
        if err >= ORTHONORMAL_TOLERANCE:
            raise CameraError(f"rotation block is not orthonormal (‖RᵀR − I‖ = {err:.2e})")

    @property
    def rotation(self) -> np.ndarray:
        return self.c2w[:3, :3]

    @property
    def position(self) -> np.ndarray:
        return self.c2w[:3, 3]

    def to_dict(self) -> dict:
        return {
            "fx": self.fx,
            "fy": self.fy,
            "cx": self.cx,
            "cy": self.cy,
            "c2w": self.c2w.tolist(),
            "height": self.height,
            "width": self.width,
        }

    @classmethod
    def look_at(
        cls,
        eye: np.ndarray,
        target: np.ndarray,
        up: np.ndarray,
        focal: float,
        height: int,
        width: int,
    ) -> Camera:
        """Camera at `eye` looking at `target`; image-down is as close to −`up` as possible."""
        eye = np.asarray(eye, dtype=np.float64)
        forward = np.asarray(target, dtype=np.float64) - eye
        forward /= np.linalg.norm(forward)
        right = np.cross(forward, np.asarray(up, dtype=np.float64))
        right /= np.linalg.norm(right)
        down = np.cross(forward, right)
        c2w = np.eye(4)
        c2w[:3, 0], c2w[:3, 1], c2w[:3, 2], c2w[:3, 3] = right, down, forward, eye
        return cls(
            fx=focal, fy=focal, cx=width / 2.0, cy=height / 2.0, c2w=c2w,
            height=height, width=width,
        )


def generate_rays(
    camera: Camera, pixels: torch.Tensor, dtype: torch.dtype = torch.float32
) -> tuple[torch.Tensor, torch.Tensor]:
    """
    Rays through pixel centers. `pixels` is (..., 2) integer (h, w).

    Returns (origins, directions), both (..., 3) in world space, directions unit length.
    """
    pixels = torch.as_tensor(pixels)
    h = pixels[..., 0].to(torch.float64)
    w = pixels[..., 1].to(torch.float64)
    cam_dirs = torch.stack(
        [(w + 0.5 - camera.cx) / camera.fx, (h + 0.5 - camera.cy) / camera.fy, torch.ones_like(h)],
        dim=-1,
    )
    rot = torch.from_numpy(camera.rotation)
    dirs = cam_dirs @ rot.T
    dirs = dirs / dirs.norm(dim=-1, keepdim=True)
    origins = torch.from_numpy(camera.position).expand_as(dirs)
    return origins.to(dtype), dirs.to(dtype)


def generate_ray(
    camera: Camera, pixel: tuple[int, int], dtype: torch.dtype = torch.float32
) -> tuple[torch.Tensor, torch.Tensor]:
    """Single-pixel form of `generate_rays`."""
    origins, dirs = generate_rays(camera, torch.tensor([pixel]), dtype=dtype)
    return origins[0], dirs[0]


def patch_pixels(origin: tuple[int, int], size: int) -> torch.Tensor:
    """(size, size, 2) integer pixel grid of a square patch with top-left `origin`."""
    hh, ww = torch.meshgrid(
        torch.arange(size) + int(origin[0]), torch.arange(size) + int(origin[1]), indexing="ij"
    )
    return torch.stack([hh, ww], dim=-1)
