"""
Finite-difference check of the whole training chain, from grid values, kernel values and
camera-response parameters to the loss.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import torch

from deblurgrid.config.train_config import TrainConfig
from deblurgrid.data.camera import Camera
from deblurgrid.errors import ArgumentError
from deblurgrid.sampler.patches import PatchBatch, sample_batch
from deblurgrid.sharpness.levels import random_levels

from .state import TrainState, build_state
from .trainer import forward

TINY_VIEWS = 2
TINY_SIZE = 12
FD_EPS = 1e-6
FD_RTOL = 1e-5
FD_ATOL = 1e-8


@dataclass
class GradProbe:
    name: str
    index: tuple[int, ...]
    analytic: float
    numeric: float

    @property
    def rel_error(self) -> float:
        scale = max(abs(self.analytic), abs(self.numeric), 1e-8)
        return abs(self.analytic - self.numeric) / scale

    @property
    def passes(self) -> bool:
        return abs(self.analytic - self.numeric) <= FD_RTOL * abs(self.numeric) + FD_ATOL


def tiny_problem(config: TrainConfig) -> tuple[TrainState, PatchBatch, list[Camera]]:
    """Random images and levels on a two-camera rig; everything seeded by `config.seed`."""
    rng = np.random.default_rng(config.seed)
    cameras = []
    for i in range(TINY_VIEWS):
        angle = math.pi * i / TINY_VIEWS
        eye = np.array([3.0 * math.cos(angle), 3.0 * math.sin(angle), 0.5])
        cameras.append(
            Camera.look_at(eye, np.zeros(3), np.array([0.0, 0.0, 1.0]), 12.0, TINY_SIZE, TINY_SIZE)
        )
    images = [rng.uniform(0.0, 1.0, (TINY_SIZE, TINY_SIZE, 3)) for _ in cameras]
    shape = (TINY_SIZE, TINY_SIZE)
    levels = [random_levels(shape, config.N_k, rng, config.n_skip) for _ in cameras]
    half = 1.0
    state = build_state(config, TINY_VIEWS, np.array([[-half] * 3, [half] * 3]))
    with torch.no_grad():
        # camera responses off identity
        state.crf.g.add_(torch.from_numpy(rng.normal(0.0, 0.3, TINY_VIEWS)).to(state.crf.g.dtype))
    batch = sample_batch(
        state.rng, images, levels, config.n_patches, config.P, config.K, config.dtype
    )
    return state, batch, cameras


def check_pipeline_gradients(
    config: TrainConfig | None = None, n_probes: int = 20, eps: float = FD_EPS
) -> list[GradProbe]:
    """Central differences vs autograd on `n_probes` random parameter entries."""
    config = config or TrainConfig.from_preset("gradcheck")
    state, batch, cameras = tiny_problem(config)
    if config.jitter:
        raise ArgumentError("gradient checks need a deterministic forward pass (jitter=False)")

    loss = forward(state, batch, cameras).loss
    params = dict(state.named_parameters())
    grads = torch.autograd.grad(loss, list(params.values()), allow_unused=True)
    grads = dict(zip(params, grads, strict=True))

    rng = np.random.default_rng(config.seed + 1)
    names = list(params)
    probes = []
    for k in range(n_probes):
        # round-robin over tensors
        name = names[k % len(names)]
        param = params[name]
        flat = int(rng.integers(0, param.numel()))
        index = tuple(int(i) for i in np.unravel_index(flat, tuple(param.shape)))
        grad = grads[name]
        analytic = float(grad[index]) if grad is not None else 0.0
        with torch.no_grad():
            original = param[index].item()
            param[index] = original + eps
            plus = float(forward(state, batch, cameras).loss)
            param[index] = original - eps
            minus = float(forward(state, batch, cameras).loss)
            param[index] = original
        probes.append(GradProbe(name, index, analytic, (plus - minus) / (2.0 * eps)))
    return probes
