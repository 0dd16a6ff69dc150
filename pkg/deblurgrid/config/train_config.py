"""TrainConfig: every knob of a training run, with presets and key=value config files."""

from __future__ import annotations

from pathlib import Path
from typing import Any, Literal

import torch
from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from deblurgrid.errors import ConfigError

from .constants import APP_FEATURE_DIM, DENSITY_SHIFT, DIRECTION_FREQS, PRESETS

KernelMode = Literal["learnable", "none", "fixed"]


class TrainConfig(BaseModel):
    """
    Hyperparameters of one run. Defaults are the `desk` preset.

    Kernel-side defaults follow the published setup: K=11, N_k=400 groups, the 100
    sharpest groups skipped, 28 patches of P=22 per step, kernel learning rate 0.05.
    """

    model_config = ConfigDict(extra="forbid", validate_assignment=True)

    preset: str = "desk"
    iters: int = Field(default=4000, gt=0)
    seed: int = Field(default=0, ge=0)
    precision: int = Field(default=32, description="32 or 64 bit floats")

    # ── Optimizer ─────────────────────────────────────────────────
    lr_field: float = Field(default=0.02, ge=0)
    lr_kernel: float = Field(default=0.05, ge=0)
    lr_crf: float = Field(default=0.01, ge=0)
    lr_decay: float = Field(default=0.1, gt=0, le=1, description="Field lr ratio at the last iter")

    # ── Patch sampling ────────────────────────────────────────────
    n_patches: int = Field(default=28, gt=0)
    P: int = Field(default=22, gt=0)
    K: int = Field(default=11, gt=0)

    # ── Sharpness groups ──────────────────────────────────────────
    N_k: int = Field(default=400, gt=0)
    n_skip: int = Field(default=100, ge=0)

    # ── Kernels ───────────────────────────────────────────────────
    kernel_mode: KernelMode = "learnable"
    kernel_sigma0: float | None = Field(default=None, gt=0, description="None → K/6")
    share_channels: bool = False

    # ── Field ─────────────────────────────────────────────────────
    grid_res: int = Field(default=64, ge=2)
    density_rank: int = Field(default=8, gt=0)
    app_rank: int = Field(default=8, gt=0)
    app_dim: int = Field(default=APP_FEATURE_DIM, gt=0)
    hidden_dim: int = Field(default=64, gt=0)
    dir_freqs: int = Field(default=DIRECTION_FREQS, ge=0)
    density_shift: float = DENSITY_SHIFT
    init_scale: float = Field(default=0.1, ge=0)

    # ── Rendering ─────────────────────────────────────────────────
    samples_per_ray: int = Field(default=128, gt=0)
    jitter: bool = True
    chunk: int = Field(default=4096, gt=0)

    # ── Bookkeeping ───────────────────────────────────────────────
    log_every: int = Field(default=100, gt=0)
    data_dir: str = ""

    @model_validator(mode="after")
    def check_invariants(self) -> TrainConfig:
        if self.precision not in (32, 64):
            raise ValueError(f"precision must be 32 or 64, got {self.precision}")
        if self.K % 2 == 0:
            raise ValueError(f"K must be odd, got {self.K}")
        if self.P < self.K:
            raise ValueError(f"P must be >= K, got P={self.P}, K={self.K}")
        if self.n_skip > self.N_k:
            raise ValueError(f"n_skip must be <= N_k, got {self.n_skip} > {self.N_k}")
        if self.preset not in PRESETS:
            raise ValueError(f"unknown preset '{self.preset}', choose from {sorted(PRESETS)}")
        return self

    # ── Derived ───────────────────────────────────────────────────

    @property
    def P_prime(self) -> int:
        return self.P - self.K + 1

    @property
    def sigma0(self) -> float:
        return self.kernel_sigma0 if self.kernel_sigma0 is not None else self.K / 6.0

    @property
    def dtype(self) -> torch.dtype:
        return torch.float64 if self.precision == 64 else torch.float32

    @property
    def kernel_channels(self) -> int:
        return 1 if self.share_channels else 3

    # ── Construction ──────────────────────────────────────────────

    @classmethod
    def from_preset(cls, name: str, **overrides: Any) -> TrainConfig:
        if name not in PRESETS:
            raise ConfigError(f"unknown preset '{name}', choose from {sorted(PRESETS)}")
        return cls.build({"preset": name, **PRESETS[name], **overrides})

    @classmethod
    def from_file(
        cls, path: Path | None, preset: str | None = None, **overrides: Any
    ) -> TrainConfig:
        """
        Preset < file < overrides. The file is flat `key=value` text; `#` comments are fine.

        Overrides whose value is None are ignored so CLI flags can be passed through as-is.
        """
        file_values: dict[str, Any] = {}
        if path is not None:
            if not Path(path).exists():
                raise ConfigError(f"config file not found: {path}")
            file_values = {k: v for k, v in dotenv_values(path).items() if v is not None}
        name = preset or file_values.pop("preset", None) or "desk"
        file_values.pop("preset", None)
        if name not in PRESETS:
            raise ConfigError(f"unknown preset '{name}', choose from {sorted(PRESETS)}")
        given = {k: v for k, v in overrides.items() if v is not None}
        return cls.build({"preset": name, **PRESETS[name], **file_values, **given})

    @classmethod
    def build(cls, values: dict[str, Any]) -> TrainConfig:
        try:
            return cls.model_validate(values)
        except ValidationError as e:
            raise ConfigError(f"invalid training config: {e}") from e

    def echo(self) -> dict[str, Any]:
        """JSON-safe dump, stored in checkpoints."""
        return self.model_dump(mode="json")
