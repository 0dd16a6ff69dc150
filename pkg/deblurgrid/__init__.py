"""deblurgrid: grid-based deblurring radiance fields with learnable blur kernels."""

__version__ = "0.1.0"
