"""Rich rendering helpers for the CLI."""

from __future__ import annotations

import math
from collections.abc import Sequence
from typing import TYPE_CHECKING

from rich import box
from rich.console import Console
from rich.panel import Panel
from rich.progress import BarColumn, MofNCompleteColumn, Progress, TextColumn, TimeRemainingColumn
from rich.table import Table
from rich.text import Text

from deblurgrid import __version__
from deblurgrid.config.constants import COLOR_ACCENT, COLOR_DIM, COLOR_ERROR, COLOR_OK, COLOR_WARN
from deblurgrid.errors import DeblurGridError

if TYPE_CHECKING:
    from deblurgrid.eval.bench import KernelBenchResult

console = Console()


def fmt_db(value: float) -> str:
    return "∞" if math.isinf(value) else f"{value:.2f}"


def render_banner(command: str, detail: str = "") -> None:
    header = Text()
    header.append(" deblurgrid ", style=f"bold {COLOR_ACCENT}")
    header.append(f"v{__version__}", style=COLOR_DIM)
    header.append("  │  ", style=COLOR_DIM)
    header.append(command, style="bold white")
    if detail:
        header.append("  │  ", style=COLOR_DIM)
        header.append(detail, style=COLOR_DIM)
    console.print(Panel(header, box=box.HORIZONTALS, style="grey23", padding=(0, 1)))


def print_ok(message: str) -> None:
    console.print(f"[{COLOR_OK}]✓[/{COLOR_OK}] {message}")


def print_error(error: DeblurGridError) -> None:
    console.print(
        Panel(
            Text(str(error)),
            title=f"[{COLOR_ERROR}]{type(error).__name__}[/{COLOR_ERROR}]",
            border_style=COLOR_ERROR,
            padding=(0, 1),
        )
    )


def training_progress() -> Progress:
    return Progress(
        TextColumn(f"[{COLOR_ACCENT}]training"),
        BarColumn(),
        MofNCompleteColumn(),
        TextColumn("loss [bold]{task.fields[loss]}"),
        TimeRemainingColumn(),
        console=console,
    )


def scores_table(rows: Sequence[tuple[str, float, float]]) -> Table:
    """Per-image PSNR/SSIM with a mean row."""
    table = Table(title="Image quality", box=box.SIMPLE_HEAVY, border_style="grey35")
    table.add_column("image", style=COLOR_DIM)
    table.add_column("PSNR (dB)", justify="right")
    table.add_column("SSIM", justify="right")
    for name, p, s in rows:
        table.add_row(name, fmt_db(p), f"{s:.4f}")
    if rows:
        finite = [p for _, p, _ in rows if not math.isinf(p)]
        mean_p = sum(finite) / len(finite) if finite else math.inf
        mean_s = sum(s for _, _, s in rows) / len(rows)
        table.add_section()
        table.add_row("[bold]mean", f"[bold]{fmt_db(mean_p)}", f"[bold]{mean_s:.4f}")
    return table


def bench_table(result: KernelBenchResult, scaling: dict[int, float]) -> Table:
    table = Table(title="Kernel generation", box=box.SIMPLE_HEAVY, border_style="grey35")
    table.add_column("path", style=COLOR_DIM)
    table.add_column("median (ms)", justify="right")
    table.add_row("grid: normalize table", f"{result.normalize_ms:.3f}")
    table.add_row("grid: per-pixel lookup", f"{result.lookup_ms:.3f}")
    table.add_row("MLP generator", f"{result.generator_ms:.3f}")
    ratio = result.ratio
    style = COLOR_OK if ratio >= 5.0 else COLOR_WARN
    table.add_row("speed-up", f"[{style}]{ratio:.1f}×[/{style}]")
    table.add_section()
    for n_levels, ms in scaling.items():
        table.add_row(f"lookup, N_k = {n_levels}", f"{ms:.3f}")
    return table


def budget_table(rows: Sequence[tuple[int, int, float]], K: int) -> Table:
    table = Table(title=f"Rays per target pixel (K = {K})", box=box.SIMPLE_HEAVY)
    table.add_column("P", justify="right")
    table.add_column("P′", justify="right")
    table.add_column("rays / target", justify="right")
    for P, P_prime, ratio in rows:
        table.add_row(str(P), str(P_prime), f"{ratio:.2f}")
    return table


def experiment_table(name: str, runs: Sequence, checks: dict[str, bool]) -> Table:
    table = Table(title=f"Experiment: {name}", box=box.SIMPLE_HEAVY, border_style="grey35")
    table.add_column("run", style=COLOR_DIM)
    table.add_column("PSNR (dB)", justify="right")
    table.add_column("SSIM", justify="right")
    table.add_column("final loss", justify="right")
    table.add_column("kernel spread by stratum", justify="right")
    for r in runs:
        spreads = " / ".join(f"{s:.2f}" for s in r.spreads) or "-"
        table.add_row(r.label, fmt_db(r.psnr), f"{r.ssim:.4f}", f"{r.final_loss:.2e}", spreads)
    table.add_section()
    for check, passed in checks.items():
        mark = f"[{COLOR_OK}]pass" if passed else f"[{COLOR_ERROR}]fail"
        table.add_row(check, mark, "", "", "")
    return table
