"""
The training loop: sample patches, render, blur, tone, compare, update.

Per batch: render_patches → crop → lookup → normalize → apply_skip → convolve →
camera response → MSE. The field, kernels and camera response train jointly from the
first iteration.
"""

from __future__ import annotations

import time
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np
import torch
from loguru import logger

from deblurgrid.data.camera import Camera
from deblurgrid.errors import ArgumentError, LevelCacheError, NumericalError
from deblurgrid.kernels.blur import apply_skip, center_crop, convolve, crop
from deblurgrid.kernels.grid import lookup, normalize
from deblurgrid.render.renderer import RayMeter, render_patches
from deblurgrid.sampler.patches import PatchBatch, sample_batch
from deblurgrid.sharpness.levels import SharpnessLevelMap

from .log import TrainLog
from .loss import loss_recon
from .state import TrainState


@dataclass
class ForwardResult:
    clean: torch.Tensor    # (B, P, P, 3)
    blurred: torch.Tensor  # (B, P′, P′, 3)
    toned: torch.Tensor    # (B, P′, P′, 3)
    loss: torch.Tensor


def check_finite(name: str, tensor: torch.Tensor) -> None:
    if not bool(torch.isfinite(tensor).all()):
        bad = int((~torch.isfinite(tensor)).sum())
        raise NumericalError(name, f"{bad} of {tensor.numel()} entries")


def blur_patches(state: TrainState, clean: torch.Tensor, batch: PatchBatch) -> torch.Tensor:
    """Clean (B, P, P, 3) → blurred (B, P′, P′, 3) according to the kernel mode."""
    K = batch.K
    mode = state.config.kernel_mode
    if mode == "none":
        return center_crop(clean, K)
    windows = crop(clean, K)
    if mode == "fixed":
        chosen, _ = state.bank.select(windows, batch.targets)
        return torch.where(batch.skip[..., None], center_crop(clean, K), chosen)
    weights = normalize(lookup(state.kernels, batch.levels, batch.views))
    weights = apply_skip(weights, batch.skip)
    check_finite("weights", weights)
    return convolve(windows, weights)


def forward(
    state: TrainState,
    batch: PatchBatch,
    cameras: Sequence[Camera],
    meter: RayMeter | None = None,
) -> ForwardResult:
    """Full differentiable chain for one batch. The first non-finite tensor raises."""
    cfg = state.config
    clean = render_patches(
        state.field,
        list(cameras),
        batch.views,
        batch.origins,
        batch.P,
        cfg.samples_per_ray,
        generator=state.generator if cfg.jitter else None,
        meter=meter,
    )
    check_finite("clean", clean)
    blurred = blur_patches(state, clean, batch)
    check_finite("blurred", blurred)
    toned = state.crf(blurred, batch.views)
    check_finite("toned", toned)
    loss = loss_recon(toned, batch.targets.to(toned.dtype))
    check_finite("loss", loss)
    return ForwardResult(clean=clean, blurred=blurred, toned=toned, loss=loss)


def train_step(
    state: TrainState,
    batch: PatchBatch,
    cameras: Sequence[Camera],
    meter: RayMeter | None = None,
) -> float:
    """One forward, one reverse pass, one Adam update. Returns the pre-update loss."""
    state.set_learning_rates()
    state.optimizer.zero_grad(set_to_none=True)
    result = forward(state, batch, cameras, meter)
    result.loss.backward()
    state.optimizer.step()
    state.iteration += 1
    return float(result.loss.detach())


class Trainer:
    """
    Owns the per-run inputs (train images, level maps, cameras) next to a TrainState.

    Level maps must have been quantized into the config's N_k; the config's n_skip wins
    over whatever the cache recorded.
    """

    def __init__(
        self,
        state: TrainState,
        images: Sequence[np.ndarray],
        level_maps: Sequence[SharpnessLevelMap],
        cameras: Sequence[Camera],
        log: TrainLog | None = None,
    ) -> None:
        cfg = state.config
        if not (len(images) == len(level_maps) == len(cameras) == state.n_views):
            raise ArgumentError(
                f"need {state.n_views} images, level maps and cameras; got "
                f"{len(images)}, {len(level_maps)}, {len(cameras)}"
            )
        for i, lm in enumerate(level_maps):
            if lm.n_levels != cfg.N_k:
                raise LevelCacheError(
                    f"view {i}: level map has N_k={lm.n_levels}, config wants {cfg.N_k}; "
                    "re-run `preprocess`"
                )
            if lm.shape != images[i].shape[:2]:
                raise LevelCacheError(
                    f"view {i}: level map {lm.shape} vs image {images[i].shape[:2]}"
                )
        self.state = state
        self.images = [np.asarray(im) for im in images]
        self.level_maps = [lm.with_skip(cfg.n_skip) for lm in level_maps]
        self.cameras = list(cameras)
        self.meter = RayMeter()
        self.log = log
        self.losses: list[float] = []

    def sample_batch(self) -> PatchBatch:
        cfg = self.state.config
        return sample_batch(
            self.state.rng, self.images, self.level_maps, cfg.n_patches, cfg.P, cfg.K, cfg.dtype
        )

    def step(self) -> float:
        loss = train_step(self.state, self.sample_batch(), self.cameras, self.meter)
        self.losses.append(loss)
        return loss

    def fit(
        self,
        iters: int | None = None,
        on_step: Callable[[int, float], None] | None = None,
    ) -> list[float]:
        """Train up to `iters` total iterations (default: the config's). Returns new losses."""
        cfg = self.state.config
        target = cfg.iters if iters is None else iters
        started = time.perf_counter()
        losses: list[float] = []
        while self.state.iteration < target:
            loss = self.step()
            losses.append(loss)
            it = self.state.iteration
            if self.log is not None:
                self.log.write(it, loss, time.perf_counter() - started, self.meter.total)
            if it % cfg.log_every == 0 or it == target:
                logger.info(f"iter {it}/{target}  loss={loss:.6f}  rays={self.meter.total}")
            if on_step is not None:
                on_step(it, loss)
        return losses
