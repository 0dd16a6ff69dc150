"""Pydantic settings read from .env, exposed as a typed singleton."""

from __future__ import annotations

from functools import lru_cache
from pathlib import Path

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from .constants import PRESETS


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
        case_sensitive=False,
    )

    # ── Logging ───────────────────────────────────────────────────
    log_dir: Path = Field(default=Path("data/logs"))
    log_level: str = Field(default="DEBUG", description="File sink level")
    console_log_level: str = Field(default="WARNING", description="stderr sink level")

    # ── Compute ───────────────────────────────────────────────────
    torch_threads: int = Field(default=0, description="0 keeps torch's own default")

    # ── Defaults ──────────────────────────────────────────────────
    default_preset: str = Field(default="desk", description="'desk', 'full' or 'gradcheck'")
    scene_half_extent: float = Field(
        default=1.5, description="Half-width of the cubic bounding box used by synthesis"
    )

    @field_validator("default_preset")
    @classmethod
    def validate_preset(cls, v: str) -> str:
        if v not in PRESETS:
            raise ValueError(f"default_preset must be one of {sorted(PRESETS)}, got '{v}'")
        return v

    @field_validator("scene_half_extent")
    @classmethod
    def validate_extent(cls, v: float) -> float:
        if v <= 0:
            raise ValueError(f"scene_half_extent must be positive, got {v}")
        return v

    def apply_torch_threads(self) -> None:
        if self.torch_threads > 0:
            import torch

            torch.set_num_threads(self.torch_threads)


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """Return the cached settings singleton. Reads .env on first call."""
    return Settings()
