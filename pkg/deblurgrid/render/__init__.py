from .compositing import Composite, composite
from .rays import Ray, RaySamples, intersect_box, sample_along_ray
from .renderer import (
    RayMeter,
    RenderOutput,
    render_patch,
    render_patches,
    render_rays,
    render_view,
)

__all__ = [
    "Ray",
    "RaySamples",
    "intersect_box",
    "sample_along_ray",
    "Composite",
    "composite",
    "RayMeter",
    "RenderOutput",
    "render_rays",
    "render_patch",
    "render_patches",
    "render_view",
]
