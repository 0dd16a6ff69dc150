"""Single-channel map files: external defocus/depth maps and the level-map cache."""

from __future__ import annotations

import json
from enum import Enum
from pathlib import Path

import imageio.v3 as iio
import numpy as np
from loguru import logger

from deblurgrid.config.constants import LEVELS_SIDECAR
from deblurgrid.errors import ExternalMapError, LevelCacheError

from .focus import PriorSource, SharpnessMap
from .levels import SharpnessLevelMap

U16_MAX = 65535


class MapKind(str, Enum):
    DEFOCUS = "defocus"
    DEPTH   = "depth"


def read_unit_map(path: Path, view: str = "") -> np.ndarray:
    """Read an 8- or 16-bit single-channel image scaled to [0, 1]."""
    label = view or Path(path).stem
    try:
        raw = iio.imread(path)
    except (OSError, ValueError) as e:
        raise ExternalMapError(f"view '{label}': cannot read map {path}: {e}") from e
    if raw.ndim == 3 and raw.shape[-1] == 1:
        raw = raw[..., 0]
    if raw.ndim != 2:
        raise ExternalMapError(f"view '{label}': map {path} is not single-channel ({raw.shape})")
    if raw.dtype == np.uint8:
        return raw.astype(np.float64) / 255.0
    if raw.dtype == np.uint16:
        return raw.astype(np.float64) / U16_MAX
    raise ExternalMapError(f"view '{label}': map {path} must be 8- or 16-bit, got {raw.dtype}")


def write_unit_map(path: Path, values: np.ndarray) -> None:
    """Store values in [0, 1] as a 16-bit single-channel PNG."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    scaled = np.round(np.clip(values, 0.0, 1.0) * U16_MAX).astype(np.uint16)
    iio.imwrite(path, scaled)


def load_external_map(
    path: Path,
    kind: MapKind | str,
    expected_shape: tuple[int, int] | None = None,
    view: str = "",
) -> np.ndarray | SharpnessMap:
    """
    Defocus maps come back inverted as a SharpnessMap (sharpness = 1 − defocus);
    depth maps come back as a plain array in [0, 1].
    """
    kind = MapKind(kind)
    label = view or Path(path).stem
    if not Path(path).exists():
        raise ExternalMapError(f"view '{label}': {kind.value} map not found at {path}")
    values = read_unit_map(path, label)
    if expected_shape is not None and values.shape != tuple(expected_shape):
        raise ExternalMapError(
            f"view '{label}': {kind.value} map is {values.shape}, image is {tuple(expected_shape)}"
        )
    if kind is MapKind.DEFOCUS:
        return SharpnessMap(values=1.0 - values, source=PriorSource.EXTERNAL)
    return values


# ── Level-map cache ────────────────────────────────────────────────


def save_level_maps(
    directory: Path,
    names: list[str],
    level_maps: list[SharpnessLevelMap],
    source: str,
    segments: int = 1,
) -> None:
    """One 16-bit PNG per view plus a JSON sidecar recording N_k, source and segments."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    n_levels = level_maps[0].n_levels if level_maps else 0
    if n_levels > U16_MAX + 1:
        raise LevelCacheError(f"N_k = {n_levels} does not fit a 16-bit level cache")
    for name, lm in zip(names, level_maps, strict=True):
        iio.imwrite(directory / f"{Path(name).stem}.png", lm.levels.astype(np.uint16))
    sidecar = {
        "n_levels": n_levels,
        "n_skip": level_maps[0].n_skip if level_maps else 0,
        "source": source,
        "segments": segments,
        "views": [Path(n).stem for n in names],
    }
    (directory / LEVELS_SIDECAR).write_text(json.dumps(sidecar, indent=2))
    logger.info(f"Level maps saved: {len(level_maps)} views, N_k={n_levels} → {directory}")


def load_level_maps(
    directory: Path, names: list[str], n_levels: int | None = None
) -> tuple[list[SharpnessLevelMap], dict]:
    """Load cached level maps in the order of `names`. Returns (maps, sidecar)."""
    directory = Path(directory)
    sidecar_path = directory / LEVELS_SIDECAR
    if not sidecar_path.exists():
        raise LevelCacheError(f"no level cache at {directory}; run `preprocess` first")
    try:
        sidecar = json.loads(sidecar_path.read_text())
    except json.JSONDecodeError as e:
        raise LevelCacheError(f"corrupt level sidecar {sidecar_path}: {e}") from e
    if n_levels is not None and sidecar["n_levels"] != n_levels:
        raise LevelCacheError(
            f"level cache has N_k={sidecar['n_levels']}, config wants {n_levels}; "
            "re-run `preprocess`"
        )
    maps = []
    for name in names:
        path = directory / f"{Path(name).stem}.png"
        if not path.exists():
            raise LevelCacheError(f"view '{Path(name).stem}': no cached level map at {path}")
        levels = iio.imread(path).astype(np.int64)
        try:
            maps.append(SharpnessLevelMap(levels, sidecar["n_levels"], sidecar.get("n_skip", 0)))
        except ValueError as e:
            raise LevelCacheError(f"view '{Path(name).stem}': {e}") from e
    return maps, sidecar
