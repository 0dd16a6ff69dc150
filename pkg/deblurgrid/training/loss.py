from __future__ import annotations

import torch

from deblurgrid.errors import ShapeError


def loss_recon(blurred: torch.Tensor, target: torch.Tensor) -> torch.Tensor:
    """Mean squared error over every target pixel and channel of the batch."""
    if blurred.shape != target.shape:
        raise ShapeError(f"loss: prediction {tuple(blurred.shape)} vs target {tuple(target.shape)}")
    return ((blurred - target) ** 2).mean()
