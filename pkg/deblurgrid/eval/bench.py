"""Kernel-generation micro-benchmark: grid lookup + normalize vs a small MLP generator."""

from __future__ import annotations

import statistics
import time
from collections.abc import Callable, Iterator, Sequence
from contextlib import contextmanager
from dataclasses import dataclass

import torch

from deblurgrid.kernels.generator import EMBED_DIM, KernelGenerator
from deblurgrid.kernels.grid import init_gaussian, lookup_normalized, normalize

SCALING_LEVELS = (10, 400, 4000)
WARMUP = 3


@dataclass
class KernelBenchResult:
    n_pixels: int
    n_levels: int
    K: int
    lookup_ms: float
    generator_ms: float
    normalize_ms: float = 0.0

    @property
    def grid_ms(self) -> float:
        return self.lookup_ms + self.normalize_ms

    @property
    def ratio(self) -> float:
        return self.generator_ms / self.grid_ms if self.grid_ms > 0 else float("inf")


@contextmanager
def single_thread() -> Iterator[None]:
    previous = torch.get_num_threads()
    torch.set_num_threads(1)
    try:
        yield
    finally:
        torch.set_num_threads(previous)


def median_ms(fn: Callable[[], object], reps: int) -> float:
    for _ in range(WARMUP):
        fn()
    times = []
    for _ in range(reps):
        started = time.perf_counter()
        fn()
        times.append((time.perf_counter() - started) * 1e3)
    return statistics.median(times)


def _lookup_case(n_pixels: int, n_levels: int, K: int, channels: int, seed: int):
    gen = torch.Generator().manual_seed(seed)
    grid = init_gaussian(1, n_levels, K, channels)
    with torch.no_grad():
        grid.values.add_(0.1 * torch.randn(grid.values.shape, generator=gen))
    levels = torch.randint(0, n_levels, (n_pixels,), generator=gen)
    return grid, levels


def _timed_lookup(grid, levels: torch.Tensor, reps: int) -> float:
    out = torch.empty(levels.shape + (grid.K, grid.K, grid.channels), dtype=grid.values.dtype)
    return median_ms(lambda: lookup_normalized(grid, levels, 0, out=out), reps)


@torch.no_grad()
def bench_kernel_generation(
    n_pixels: int,
    n_levels: int,
    K: int,
    reps: int = 30,
    channels: int = 1,
    seed: int = 0,
) -> KernelBenchResult:
    """
    Median wall time of each path producing (n_pixels, K, K, C) kernels, on one thread.

    The grid path is timed as two parts: normalizing the stored table (once per optimizer
    step) and the per-pixel gather. The ratio charges both to every call.
    """
    grid, levels = _lookup_case(n_pixels, n_levels, K, channels, seed)
    gen = torch.Generator().manual_seed(seed + 1)
    generator = KernelGenerator(K, channels)
    embedding = torch.randn((n_pixels, EMBED_DIM), generator=gen)
    with single_thread():
        normalize_ms = median_ms(lambda: normalize(grid.values), reps)
        lookup_ms = _timed_lookup(grid, levels, reps)
        generator_ms = median_ms(lambda: generator(embedding), reps)
    return KernelBenchResult(n_pixels, n_levels, K, lookup_ms, generator_ms, normalize_ms)


@torch.no_grad()
def lookup_scaling(
    n_pixels: int,
    K: int,
    levels: Sequence[int] = SCALING_LEVELS,
    reps: int = 30,
    channels: int = 1,
    seed: int = 0,
) -> dict[int, float]:
    """Median per-pixel lookup time per N_k; flat timings mean O(1) work per pixel."""
    timings = {}
    with single_thread():
        for n_levels in levels:
            grid, idx = _lookup_case(n_pixels, n_levels, K, channels, seed)
            timings[n_levels] = _timed_lookup(grid, idx, reps)
    return timings


def flatness(timings: dict[int, float]) -> float:
    """max / min − 1 across the measured N_k values."""
    values = list(timings.values())
    return max(values) / min(values) - 1.0
