from .settings import Settings, get_settings
from .train_config import KernelMode, TrainConfig

__all__ = ["Settings", "get_settings", "TrainConfig", "KernelMode"]
