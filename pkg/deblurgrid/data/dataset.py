"""Posed multi-view datasets on disk: `images/`, `poses.json`, optional `defocus/` and `depth/`."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

import imageio.v3 as iio
import numpy as np
from loguru import logger
from pydantic import BaseModel, Field, ValidationError

from deblurgrid.config.constants import DEFOCUS_DIR, DEPTH_DIR, IMAGES_DIR, POSES_FILE, SHARP_DIR
from deblurgrid.config.settings import get_settings
from deblurgrid.errors import CameraError, DatasetError
from deblurgrid.sharpness.external import MapKind, load_external_map, write_unit_map
from deblurgrid.sharpness.focus import SharpnessMap

from .camera import Camera

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")

Split = Literal["train", "test"]


# ── poses.json schema ──────────────────────────────────────────────


class FramePose(BaseModel):
    file: str = Field(..., min_length=1)
    split: Split = "train"
    fx: float
    fy: float
    cx: float
    cy: float
    c2w: list[list[float]]


class PoseFile(BaseModel):
    aabb: list[list[float]] | None = None
    frames: list[FramePose]


# ── In-memory types ────────────────────────────────────────────────


@dataclass
class View:
    name: str
    image: np.ndarray
    camera: Camera
    split: Split = "train"
    external: SharpnessMap | None = None
    depth: np.ndarray | None = None
    sharp: np.ndarray | None = None

    @property
    def stem(self) -> str:
        return Path(self.name).stem


@dataclass
class Dataset:
    root: Path
    views: list[View]
    aabb: np.ndarray = field(default_factory=lambda: default_aabb())

    def __post_init__(self) -> None:
        self.aabb = np.asarray(self.aabb, dtype=np.float64).reshape(2, 3)
        train = self.train
        if train:
            shape = train[0].image.shape[:2]
            for view in train[1:]:
                if view.image.shape[:2] != shape:
                    raise DatasetError(
                        f"train view '{view.name}' is {view.image.shape[:2]}, expected {shape}"
                    )

    def split(self, name: Split) -> list[View]:
        return [v for v in self.views if v.split == name]

    @property
    def train(self) -> list[View]:
        return self.split("train")

    @property
    def test(self) -> list[View]:
        return self.split("test")


def default_aabb() -> np.ndarray:
    half = get_settings().scene_half_extent
    return np.array([[-half] * 3, [half] * 3], dtype=np.float64)


# ── Images ─────────────────────────────────────────────────────────


def read_image(path: Path) -> np.ndarray:
    """RGB image as float64 in [0, 1]; alpha dropped, gray expanded."""
    try:
        raw = iio.imread(path)
    except (OSError, ValueError) as e:
        raise DatasetError(f"cannot read image {path}: {e}") from e
    if raw.ndim == 2:
        raw = np.repeat(raw[..., None], 3, axis=-1)
    raw = raw[..., :3]
    scale = 65535.0 if raw.dtype == np.uint16 else 255.0
    return raw.astype(np.float64) / scale


def write_image(path: Path, image: np.ndarray) -> None:
    """8-bit RGB PNG."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    iio.imwrite(path, np.round(np.clip(image, 0.0, 1.0) * 255.0).astype(np.uint8))


# ── Load / write ───────────────────────────────────────────────────


def _read_poses(root: Path) -> PoseFile:
    path = root / POSES_FILE
    if not path.exists():
        raise DatasetError(f"no {POSES_FILE} in {root}")
    try:
        return PoseFile.model_validate(json.loads(path.read_text()))
    except (json.JSONDecodeError, ValidationError) as e:
        raise DatasetError(f"invalid {path}: {e}") from e


def _optional_map(root: Path, sub: str, stem: str) -> Path | None:
    path = root / sub / f"{stem}.png"
    return path if path.exists() else None


def load_dataset(root: Path, min_size: int | None = None) -> Dataset:
    """
    Decode every image listed in `poses.json` plus its auxiliaries.

    Every file under `images/` must have a pose entry; missing defocus/depth/sharp maps
    are simply absent. With `min_size` set, every image must be at least that tall and wide.
    """
    root = Path(root)
    image_dir = root / IMAGES_DIR
    if not image_dir.is_dir():
        raise DatasetError(f"no {IMAGES_DIR}/ directory in {root}")
    poses = _read_poses(root)
    posed = {frame.file for frame in poses.frames}
    for path in sorted(image_dir.iterdir()):
        if path.suffix.lower() in IMAGE_SUFFIXES and path.name not in posed:
            raise DatasetError(f"image '{path.name}' has no entry in {POSES_FILE}")

    views: list[View] = []
    for frame in poses.frames:
        path = image_dir / frame.file
        if not path.exists():
            raise DatasetError(f"{POSES_FILE} lists '{frame.file}' but {path} does not exist")
        image = read_image(path)
        height, width = image.shape[:2]
        if min_size is not None and min(height, width) < min_size:
            raise DatasetError(
                f"view '{frame.file}' is {height}x{width}, smaller than a {min_size}px patch"
            )
        try:
            camera = Camera(
                fx=frame.fx, fy=frame.fy, cx=frame.cx, cy=frame.cy,
                c2w=np.asarray(frame.c2w, dtype=np.float64), height=height, width=width,
            )
        except CameraError as e:
            raise CameraError(f"view '{frame.file}': {e}") from e
        except ValueError as e:
            raise CameraError(f"view '{frame.file}': malformed c2w ({e})") from e

        stem = Path(frame.file).stem
        external = depth = sharp = None
        if (p := _optional_map(root, DEFOCUS_DIR, stem)) is not None:
            external = load_external_map(p, MapKind.DEFOCUS, (height, width), frame.file)
        if (p := _optional_map(root, DEPTH_DIR, stem)) is not None:
            depth = load_external_map(p, MapKind.DEPTH, (height, width), frame.file)
        if (p := _optional_map(root, SHARP_DIR, stem)) is not None:
            sharp = read_image(p)
        views.append(View(frame.file, image, camera, frame.split, external, depth, sharp))

    aabb = np.asarray(poses.aabb, dtype=np.float64) if poses.aabb is not None else default_aabb()
    dataset = Dataset(root, views, aabb)
    logger.info(
        f"Dataset loaded from {root}: {len(dataset.train)} train, {len(dataset.test)} test views"
    )
    return dataset


def write_dataset(dataset: Dataset, root: Path) -> None:
    """Write images, poses and any auxiliaries in the layout `load_dataset` reads."""
    root = Path(root)
    frames = []
    for view in dataset.views:
        write_image(root / IMAGES_DIR / view.name, view.image)
        cam = view.camera
        frames.append(
            {
                "file": view.name, "split": view.split,
                "fx": cam.fx, "fy": cam.fy, "cx": cam.cx, "cy": cam.cy,
                "c2w": cam.c2w.tolist(),
            }
        )
        if view.external is not None:
            write_unit_map(root / DEFOCUS_DIR / f"{view.stem}.png", 1.0 - view.external.values)
        if view.depth is not None:
            write_unit_map(root / DEPTH_DIR / f"{view.stem}.png", view.depth)
        if view.sharp is not None:
            write_image(root / SHARP_DIR / f"{view.stem}.png", view.sharp)
    payload = {"aabb": dataset.aabb.tolist(), "frames": frames}
    (root / POSES_FILE).write_text(json.dumps(payload, indent=2))
    logger.info(f"Dataset written to {root}: {len(dataset.views)} views")
