"""Everything a run mutates: field, kernels, camera response, optimizer, counters, RNGs."""

from __future__ import annotations

from collections.abc import Iterator
from dataclasses import dataclass

import numpy as np
import torch
from loguru import logger
from torch import nn

from deblurgrid.config.constants import ADAM_BETAS, ADAM_EPS
from deblurgrid.config.train_config import TrainConfig
from deblurgrid.field.radiance import RadianceField
from deblurgrid.kernels.fixed_bank import FixedKernelBank
from deblurgrid.kernels.grid import BlurKernelGrid, init_gaussian

from .crf import CameraResponse


@dataclass
class TrainState:
    config: TrainConfig
    field: RadianceField
    crf: CameraResponse
    kernels: BlurKernelGrid | None
    bank: FixedKernelBank | None
    optimizer: torch.optim.Adam
    rng: np.random.Generator
    generator: torch.Generator
    n_views: int
    iteration: int = 0

    @property
    def aabb(self) -> torch.Tensor:
        return self.field.aabb

    def modules(self) -> dict[str, nn.Module]:
        """Checkpointed modules, by name prefix."""
        out: dict[str, nn.Module] = {"field": self.field, "crf": self.crf}
        if self.kernels is not None:
            out["kernels"] = self.kernels
        return out

    def named_parameters(self) -> Iterator[tuple[str, nn.Parameter]]:
        for prefix, module in self.modules().items():
            for name, param in module.named_parameters():
                yield f"{prefix}.{name}", param

    def set_learning_rates(self) -> None:
        """Field lr decays exponentially to lr_field · lr_decay at the last iteration."""
        cfg = self.config
        progress = min(self.iteration / cfg.iters, 1.0)
        rates = {
            "field": cfg.lr_field * cfg.lr_decay**progress,
            "kernels": cfg.lr_kernel,
            "crf": cfg.lr_crf,
        }
        for group in self.optimizer.param_groups:
            group["lr"] = rates[group["name"]]


def build_state(config: TrainConfig, n_views: int, aabb: np.ndarray | torch.Tensor) -> TrainState:
    """Fresh state; every random draw comes from `config.seed`."""
    dtype = config.dtype
    generator = torch.Generator().manual_seed(config.seed)
    aabb = torch.as_tensor(np.asarray(aabb), dtype=dtype).reshape(2, 3)
    field = RadianceField(
        aabb,
        grid_res=config.grid_res,
        density_rank=config.density_rank,
        app_rank=config.app_rank,
        app_dim=config.app_dim,
        hidden_dim=config.hidden_dim,
        dir_freqs=config.dir_freqs,
        density_shift=config.density_shift,
        init_scale=config.init_scale,
        generator=generator,
        dtype=dtype,
    )
    crf = CameraResponse(n_views, dtype=dtype)

    kernels = bank = None
    if config.kernel_mode == "learnable":
        kernels = init_gaussian(
            n_views, config.N_k, config.K, config.kernel_channels, config.sigma0, dtype
        )
    elif config.kernel_mode == "fixed":
        bank = FixedKernelBank(config.K, channels=config.kernel_channels, dtype=dtype)

    groups = [
        {"params": list(field.parameters()), "lr": config.lr_field, "name": "field"},
        {"params": list(crf.parameters()), "lr": config.lr_crf, "name": "crf"},
    ]
    if kernels is not None:
        groups.append(
            {"params": list(kernels.parameters()), "lr": config.lr_kernel, "name": "kernels"}
        )
    optimizer = torch.optim.Adam(groups, betas=ADAM_BETAS, eps=ADAM_EPS)

    logger.debug(
        f"Train state built: {n_views} views, grid {config.grid_res}³, "
        f"kernels={config.kernel_mode}, precision={config.precision}"
    )
    return TrainState(
        config=config,
        field=field,
        crf=crf,
        kernels=kernels,
        bank=bank,
        optimizer=optimizer,
        rng=np.random.default_rng(config.seed),
        generator=generator,
        n_views=n_views,
    )
