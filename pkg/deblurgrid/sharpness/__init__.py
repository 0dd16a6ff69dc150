from .external import (
    MapKind,
    load_external_map,
    load_level_maps,
    read_unit_map,
    save_level_maps,
    write_unit_map,
)
from .focus import PriorSource, SharpnessMap, modified_laplacian, sml_map, tenengrad_map, to_gray
from .levels import (
    SharpnessLevelMap,
    depth_segmented_quantize,
    depth_segments,
    local_levels,
    quantize,
    random_levels,
    skip_mask,
)
from .preprocess import build_level_maps, sharpness_for_view

__all__ = [
    "PriorSource",
    "SharpnessMap",
    "SharpnessLevelMap",
    "modified_laplacian",
    "sml_map",
    "tenengrad_map",
    "to_gray",
    "quantize",
    "depth_segments",
    "depth_segmented_quantize",
    "skip_mask",
    "random_levels",
    "local_levels",
    "MapKind",
    "load_external_map",
    "read_unit_map",
    "write_unit_map",
    "save_level_maps",
    "load_level_maps",
    "build_level_maps",
    "sharpness_for_view",
]
