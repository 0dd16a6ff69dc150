from .color_head import ColorHead, encode_direction, encoding_dim
from .dense import DenseField
from .radiance import FieldSample, RadianceField, query_point
from .vm_grid import PLANE_AXES, VMGrid, vm_eval

__all__ = [
    "VMGrid",
    "vm_eval",
    "PLANE_AXES",
    "ColorHead",
    "encode_direction",
    "encoding_dim",
    "RadianceField",
    "FieldSample",
    "query_point",
    "DenseField",
]
