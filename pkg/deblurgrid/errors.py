"""Exception hierarchy. Every failure the CLI can report maps to one exit code."""

from __future__ import annotations

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3


class DeblurGridError(Exception):
    """Base class. `exit_code` is what the CLI returns when this escapes a command."""

    exit_code: int = EXIT_USAGE


class ConfigError(DeblurGridError, ValueError):
    exit_code = EXIT_USAGE


class ArgumentError(DeblurGridError, ValueError):
    """An argument outside the domain an operation accepts."""

    exit_code = EXIT_USAGE


# ── Data errors ───────────────────────────────────────────────────


class DataError(DeblurGridError):
    exit_code = EXIT_DATA


class DatasetError(DataError):
    pass


class CameraError(DataError, ValueError):
    pass


class ExternalMapError(DataError):
    pass


class LevelCacheError(DataError):
    pass


class SynthesisError(DataError, ValueError):
    pass


# ── Checkpoints ───────────────────────────────────────────────────


class CheckpointError(DataError):
    pass


class CheckpointFormatError(CheckpointError):
    pass


class CheckpointVersionError(CheckpointError):
    pass


class CheckpointTruncatedError(CheckpointError):
    pass


class CheckpointShapeError(CheckpointError):
    pass


# ── Numerics ──────────────────────────────────────────────────────


class NumericalError(DeblurGridError, ArithmeticError):
    exit_code = EXIT_NUMERICAL

    def __init__(self, tensor_name: str, detail: str = "") -> None:
        self.tensor_name = tensor_name
        message = f"non-finite values in '{tensor_name}'"
        if detail:
            message += f" ({detail})"
        super().__init__(message)


class GradientMismatchError(NumericalError):
    """Analytic gradients disagree with central differences."""

    def __init__(self, tensor_name: str, rel_error: float) -> None:
        self.tensor_name = tensor_name
        self.rel_error = rel_error
        DeblurGridError.__init__(
            self, f"gradient check failed: relative error {rel_error:.2e} in '{tensor_name}'"
        )


class FieldDomainError(DeblurGridError, ValueError):
    """A point handed to a direct grid query lies outside the bounding box."""


class KernelLevelError(DeblurGridError, IndexError):
    """A level or view index does not address a row of the kernel grid."""


class ShapeError(DeblurGridError, ValueError):
    pass
