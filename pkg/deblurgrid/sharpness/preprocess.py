"""Preprocessing: sharpness prior per training view → cached level maps."""

from __future__ import annotations

import time
from typing import TYPE_CHECKING

import numpy as np
from loguru import logger

from deblurgrid.errors import ArgumentError, ExternalMapError

from .focus import PriorSource, SharpnessMap, sml_map, tenengrad_map
from .levels import (
    SharpnessLevelMap,
    depth_segmented_quantize,
    local_levels,
    quantize,
    random_levels,
)

if TYPE_CHECKING:
    from deblurgrid.data.dataset import View


def sharpness_for_view(view: View, prior: PriorSource | str) -> SharpnessMap:
    prior = PriorSource(prior)
    if prior is PriorSource.SML:
        return sml_map(view.image)
    if prior is PriorSource.TENENGRAD:
        return tenengrad_map(view.image)
    if prior is PriorSource.EXTERNAL:
        if view.external is None:
            raise ExternalMapError(f"view '{view.name}': prior 'external' needs a defocus map")
        return view.external
    raise ArgumentError(f"prior '{prior.value}' does not produce a sharpness map")


def build_level_maps(
    views: list[View],
    prior: PriorSource | str,
    n_levels: int,
    n_skip: int = 0,
    depth_segments: int = 1,
    rng: np.random.Generator | None = None,
) -> list[SharpnessLevelMap]:
    """
    Level map per view. `random` and `local` ignore image content; the others quantize
    a sharpness map, per depth segment when `depth_segments` > 1.
    """
    prior = PriorSource(prior)
    started = time.perf_counter()
    rng = rng if rng is not None else np.random.default_rng(0)
    maps: list[SharpnessLevelMap] = []
    for view in views:
        shape = view.image.shape[:2]
        if prior is PriorSource.RANDOM:
            maps.append(random_levels(shape, n_levels, rng, n_skip))
        elif prior is PriorSource.LOCAL:
            maps.append(local_levels(shape, n_levels, n_skip))
        elif depth_segments > 1:
            if view.depth is None:
                raise ExternalMapError(
                    f"view '{view.name}': depth segmentation needs a depth map; "
                    "drop --depth-segments to quantize the whole view"
                )
            maps.append(
                depth_segmented_quantize(
                    sharpness_for_view(view, prior), view.depth, depth_segments, n_levels, n_skip
                )
            )
        else:
            maps.append(quantize(sharpness_for_view(view, prior), n_levels, n_skip))
    logger.info(
        f"Sharpness levels ({prior.value}, N_k={n_levels}, segments={depth_segments}) "
        f"for {len(views)} views in {time.perf_counter() - started:.2f}s"
    )
    return maps
