from .camera import Camera, generate_ray, generate_rays, patch_pixels
from .dataset import Dataset, View, load_dataset, read_image, write_dataset, write_image

__all__ = [
    "Camera",
    "Dataset",
    "View",
    "generate_ray",
    "generate_rays",
    "load_dataset",
    "patch_pixels",
    "read_image",
    "write_dataset",
    "write_image",
]
