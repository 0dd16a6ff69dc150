"""The learnable blur-kernel grid B and its per-pixel lookup."""

from __future__ import annotations

import torch
from torch import nn

from deblurgrid.errors import ArgumentError, KernelLevelError


def _check_odd(K: int) -> None:
    if K < 1 or K % 2 == 0:
        raise ArgumentError(f"kernel width K must be odd and >= 1, got {K}")


def gaussian_log_density(K: int, sigma0: float, dtype: torch.dtype = torch.float32) -> torch.Tensor:
    """K×K log-density of an isotropic Gaussian centered on the kernel center."""
    _check_odd(K)
    r = torch.arange(K, dtype=torch.float64) - (K - 1) / 2
    sq = r[:, None] ** 2 + r[None, :] ** 2
    log_pdf = -sq / (2.0 * sigma0**2) - torch.log(torch.tensor(2.0 * torch.pi * sigma0**2))
    return log_pdf.to(dtype)


class BlurKernelGrid(nn.Module):
    """
    Raw (pre-softmax) kernels B of shape (N_img, N_k, K, K, C).

    C = 1 when channels share one kernel, 3 otherwise.
    """

    def __init__(self, values: torch.Tensor) -> None:
        super().__init__()
        if values.dim() != 5 or values.shape[2] != values.shape[3]:
            raise ArgumentError(
                f"expected (N_img, N_k, K, K, C) kernels, got {tuple(values.shape)}"
            )
        _check_odd(values.shape[2])
        if values.shape[4] not in (1, 3):
            raise ArgumentError(f"kernel channels must be 1 or 3, got {values.shape[4]}")
        self.values = nn.Parameter(values)
        self._table: torch.Tensor | None = None
        self._table_key: tuple | None = None

    @property
    def n_views(self) -> int:
        return self.values.shape[0]

    @property
    def n_levels(self) -> int:
        return self.values.shape[1]

    @property
    def K(self) -> int:
        return self.values.shape[2]

    @property
    def channels(self) -> int:
        return self.values.shape[4]

    @property
    def share_channels(self) -> bool:
        return self.channels == 1

    def normalized_table(self) -> torch.Tensor:
        """
        Every stored kernel softmaxed, as an (N_img·N_k, K·K·C) table.

        Outside autograd the table is cached until `values` changes in place, so it is
        rebuilt once per optimizer step rather than once per lookup.
        """
        values = self.values
        rows = self.n_views * self.n_levels
        if torch.is_grad_enabled() and values.requires_grad:
            return normalize(values).reshape(rows, -1)
        key = (values._version, values.data_ptr(), values.dtype)
        if self._table is None or self._table_key != key:
            self._table = normalize(values.detach()).reshape(rows, -1).contiguous()
            self._table_key = key
        return self._table


def init_gaussian(
    n_views: int,
    n_levels: int,
    K: int,
    channels: int = 3,
    sigma0: float | None = None,
    dtype: torch.dtype = torch.float32,
) -> BlurKernelGrid:
    """Every kernel starts as the same Gaussian; softmax of the raw values reproduces it."""
    _check_odd(K)
    sigma0 = K / 6.0 if sigma0 is None else sigma0
    log_pdf = gaussian_log_density(K, sigma0, dtype)
    values = log_pdf[None, None, :, :, None].expand(n_views, n_levels, K, K, channels).clone()
    return BlurKernelGrid(values)


def _check_indices(grid: BlurKernelGrid, views: torch.Tensor, levels: torch.Tensor) -> None:
    if levels.numel() and (int(levels.min()) < 0 or int(levels.max()) >= grid.n_levels):
        raise KernelLevelError(
            f"level out of range [0, {grid.n_levels}); the level cache is stale for this grid"
        )
    if views.numel() and (int(views.min()) < 0 or int(views.max()) >= grid.n_views):
        raise KernelLevelError(f"view index out of range [0, {grid.n_views})")


def lookup(grid: BlurKernelGrid, levels: torch.Tensor, views: torch.Tensor | int) -> torch.Tensor:
    """
    Raw kernels for target pixels: out[..., :, :, :] = B[view, level].

    `levels` is (P′, P′) for one view or (B, P′, P′) with `views` (B,).
    Returns (..., K, K, C). Pure indexing.
    """
    levels = torch.as_tensor(levels, dtype=torch.long)
    views = torch.as_tensor(views, dtype=torch.long)
    _check_indices(grid, views, levels)
    view_index = views.reshape(views.shape + (1,) * (levels.dim() - views.dim()))
    return grid.values[view_index, levels]


def normalize(raw: torch.Tensor) -> torch.Tensor:
    """Softmax over each K×K window, independently per channel: (..., K, K, C)."""
    K, C = raw.shape[-2], raw.shape[-1]
    flat = raw.reshape(*raw.shape[:-3], K * K, C)
    return torch.softmax(flat, dim=-2).reshape(raw.shape)


def lookup_normalized(
    grid: BlurKernelGrid,
    levels: torch.Tensor,
    views: torch.Tensor | int,
    out: torch.Tensor | None = None,
) -> torch.Tensor:
    """
    Same result as normalize(lookup(...)): rows of the normalized table gathered with one
    index_select, so the per-pixel cost is a row copy whatever N_k is.

    `out` (shape levels.shape + (K, K, C)) is filled in place; outside autograd only.
    """
    levels = torch.as_tensor(levels, dtype=torch.long)
    views = torch.as_tensor(views, dtype=torch.long)
    _check_indices(grid, views, levels)
    table = grid.normalized_table()
    view_index = views.reshape(views.shape + (1,) * (levels.dim() - views.dim()))
    rows = (view_index * grid.n_levels + levels).reshape(-1)
    shape = levels.shape + (grid.K, grid.K, grid.channels)
    if out is not None:
        torch.index_select(table, 0, rows, out=out.view(rows.numel(), -1))
        return out
    return table.index_select(0, rows).reshape(shape)


def delta_kernel(K: int, channels: int, dtype: torch.dtype = torch.float32) -> torch.Tensor:
    """(K, K, C) identity kernel: 1 at the center, 0 elsewhere."""
    delta = torch.zeros((K, K, channels), dtype=dtype)
    delta[K // 2, K // 2, :] = 1.0
    return delta


def kernel_spread(weights: torch.Tensor) -> torch.Tensor:
    """
    Mean squared distance of weight mass from the kernel center, averaged over
    channels: (..., K, K, C) → (...).
    """
    K = weights.shape[-2]
    r = torch.arange(K, dtype=weights.dtype) - (K - 1) / 2
    sq = (r[:, None] ** 2 + r[None, :] ** 2)[..., None]
    return (weights * sq).sum(dim=(-3, -2)).mean(dim=-1)
