"""Shared fixtures: seeded RNGs, tiny fields and cameras, datasets written to tmp_path."""

from __future__ import annotations

import json
from collections.abc import Callable, Iterator
from pathlib import Path

import numpy as np
import pytest
import torch
from loguru import logger

from deblurgrid.config import TrainConfig
from deblurgrid.data.camera import Camera
from deblurgrid.field import RadianceField

UNIT_BOX = torch.tensor([[-1.0, -1.0, -1.0], [1.0, 1.0, 1.0]], dtype=torch.float64)


def central_difference(
    fn: Callable[[], torch.Tensor], tensor: torch.Tensor, index: tuple[int, ...], eps: float = 1e-6
) -> float:
    """d fn / d tensor[index] by central differences; `tensor` is restored afterwards."""
    with torch.no_grad():
        original = tensor[index].item()
        tensor[index] = original + eps
        plus = float(fn())
        tensor[index] = original - eps
        minus = float(fn())
        tensor[index] = original
    return (plus - minus) / (2.0 * eps)


def grads_close(analytic: float, numeric: float, rel: float = 1e-5, abs_: float = 1e-8) -> bool:
    return abs(analytic - numeric) <= rel * abs(numeric) + abs_


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(0)


@pytest.fixture
def gen() -> torch.Generator:
    return torch.Generator().manual_seed(0)


@pytest.fixture
def gradcheck_config() -> TrainConfig:
    return TrainConfig.from_preset("gradcheck")


@pytest.fixture
def small_field(gen: torch.Generator) -> RadianceField:
    return RadianceField(
        UNIT_BOX, grid_res=6, density_rank=2, app_rank=2, hidden_dim=8,
        init_scale=0.5, generator=gen, dtype=torch.float64,
    )


def ring_camera(angle: float, size: int = 12, radius: float = 3.0, focal: float = 12.0) -> Camera:
    eye = np.array([radius * np.cos(angle), radius * np.sin(angle), 0.5])
    return Camera.look_at(eye, np.zeros(3), np.array([0.0, 0.0, 1.0]), focal, size, size)


@pytest.fixture
def camera() -> Camera:
    return ring_camera(0.3)


def write_tiny_dataset(
    root: Path,
    n_train: int = 2,
    n_test: int = 1,
    size: int = 16,
    seed: int = 0,
    with_maps: bool = True,
) -> Path:
    """Random images on a ring of cameras, with defocus and depth maps for train views."""
    from deblurgrid.data.dataset import write_image
    from deblurgrid.sharpness.external import write_unit_map

    rng = np.random.default_rng(seed)
    frames = []
    for i in range(n_train + n_test):
        split = "train" if i < n_train else "test"
        name = f"{split}_{i:03d}.png"
        cam = ring_camera(2.0 * np.pi * i / (n_train + n_test), size=size, focal=float(size))
        write_image(root / "images" / name, rng.uniform(0.0, 1.0, (size, size, 3)))
        if with_maps and split == "train":
            stem = Path(name).stem
            write_unit_map(root / "defocus" / f"{stem}.png", rng.uniform(0, 1, (size, size)))
            write_unit_map(root / "depth" / f"{stem}.png", rng.uniform(0, 1, (size, size)))
        frames.append(
            {"file": name, "split": split, "fx": cam.fx, "fy": cam.fy, "cx": cam.cx,
             "cy": cam.cy, "c2w": cam.c2w.tolist()}
        )
    payload = {"aabb": [[-1.0] * 3, [1.0] * 3], "frames": frames}
    (root / "poses.json").write_text(json.dumps(payload))
    return root


@pytest.fixture
def tiny_dataset_dir(tmp_path: Path) -> Path:
    return write_tiny_dataset(tmp_path / "scene")


@pytest.fixture
def log_messages() -> Iterator[list[str]]:
    """Formatted loguru records at WARNING and above, captured for the test's duration."""
    messages: list[str] = []
    handler_id = logger.add(messages.append, level="WARNING", format="{level}|{message}")
    yield messages
    logger.remove(handler_id)
