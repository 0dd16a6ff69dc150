"""
Click CLI: deblurgrid synth | preprocess | train | render | eval | bench-kernels |
export-kernels | experiment | raybudget | selfcheck.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click
import numpy as np
from loguru import logger

from deblurgrid import __version__
from deblurgrid.errors import EXIT_OK, EXIT_USAGE, DeblurGridError, GradientMismatchError

from . import ui

PRIORS = ("sml", "tenengrad", "external", "random", "local")
SPLITS = ("train", "test")


class DeblurGroup(click.Group):
    """Maps library errors to their exit codes after printing them."""

    def invoke(self, ctx: click.Context):
        try:
            return super().invoke(ctx)
        except click.UsageError as e:
            e.exit_code = EXIT_USAGE
            raise
        except DeblurGridError as e:
            logger.error(f"{type(e).__name__}: {e}")
            ui.print_error(e)
            raise click.exceptions.Exit(e.exit_code) from e


@click.group(cls=DeblurGroup)
@click.version_option(version=__version__, prog_name="deblurgrid")
def cli() -> None:
    """deblurgrid: radiance fields trained through learnable per-pixel blur kernels."""
    from deblurgrid.config import get_settings

    get_settings().apply_torch_threads()


# ── Data ──────────────────────────────────────────────────────────


@cli.command()
@click.option("--spec", "spec_path", type=click.Path(path_type=Path), required=True,
              help="YAML scene spec")
@click.option("--out", type=click.Path(path_type=Path), required=True, help="Dataset directory")
def synth(spec_path: Path, out: Path) -> None:
    """Synthesize a scene with known depth-dependent blur."""
    from deblurgrid.data.synthetic import SyntheticSceneSpec, write_synthetic

    spec = SyntheticSceneSpec.from_yaml(spec_path)
    ui.render_banner("synth", str(out))
    with ui.console.status("rendering views…"):
        dataset = write_synthetic(spec, out)
    ui.print_ok(f"{len(dataset.train)} blurred + {len(dataset.test)} sharp views → {out}")


@cli.command()
@click.option("--data", "data_dir", type=click.Path(path_type=Path), required=True)
@click.option("--prior", type=click.Choice(PRIORS), default="sml", show_default=True)
@click.option("--depth-segments", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--nk", type=click.IntRange(min=1), required=True, help="Number of sharpness groups")
@click.option("--nskip", type=click.IntRange(min=0), default=0, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True, help="Seed for the random prior")
def preprocess(
    data_dir: Path, prior: str, depth_segments: int, nk: int, nskip: int, seed: int
) -> None:
    """Compute and cache per-view sharpness level maps."""
    from deblurgrid.config.constants import LEVELS_DIR
    from deblurgrid.data.dataset import load_dataset
    from deblurgrid.sharpness import build_level_maps, save_level_maps

    if nskip > nk:
        raise click.BadParameter(f"--nskip ({nskip}) must not exceed --nk ({nk})")
    dataset = load_dataset(data_dir)
    ui.render_banner("preprocess", f"prior={prior}  N_k={nk}  segments={depth_segments}")
    train = dataset.train
    maps = build_level_maps(
        train, prior, nk, nskip, depth_segments=depth_segments, rng=np.random.default_rng(seed)
    )
    save_level_maps(
        data_dir / LEVELS_DIR, [v.name for v in train], maps, prior, segments=depth_segments
    )
    ui.print_ok(f"level maps for {len(train)} views → {data_dir / LEVELS_DIR}")


# ── Training ──────────────────────────────────────────────────────


@cli.command()
@click.option("--data", "data_dir", type=click.Path(path_type=Path), required=True)
@click.option("--config", "config_path", type=click.Path(path_type=Path), default=None)
@click.option("--preset", default=None, help="desk | full | gradcheck")
@click.option("--out", type=click.Path(path_type=Path), required=True, help="Checkpoint path")
@click.option("--iters", type=click.IntRange(min=1), default=None)
@click.option("--seed", type=click.IntRange(min=0), default=None)
@click.option("--log", "log_path", type=click.Path(path_type=Path), default=None,
              help="Append-only CSV log")
@click.option("--resume", type=click.Path(path_type=Path), default=None,
              help="Continue from this checkpoint")
def train(
    data_dir: Path,
    config_path: Path | None,
    preset: str | None,
    out: Path,
    iters: int | None,
    seed: int | None,
    log_path: Path | None,
    resume: Path | None,
) -> None:
    """Jointly train the field, blur kernels and camera response."""
    from deblurgrid.config import TrainConfig, get_settings
    from deblurgrid.config.constants import LEVELS_DIR
    from deblurgrid.data.dataset import load_dataset
    from deblurgrid.sharpness import load_level_maps
    from deblurgrid.training import TrainLog, Trainer, build_state, load_checkpoint, save_checkpoint

    state = None
    if resume is not None:
        state = load_checkpoint(resume)
        if iters is not None:
            state.config = state.config.model_copy(update={"iters": iters})
        config = state.config
    else:
        config = TrainConfig.from_file(
            config_path,
            preset or (None if config_path else get_settings().default_preset),
            iters=iters,
            seed=seed,
            data_dir=str(data_dir),
        )
    dataset = load_dataset(data_dir, min_size=config.P)
    views = dataset.train
    if state is None:
        state = build_state(config, len(views), dataset.aabb)
    level_maps, _ = load_level_maps(data_dir / LEVELS_DIR, [v.name for v in views], config.N_k)

    trainer = Trainer(
        state,
        [v.image for v in views],
        level_maps,
        [v.camera for v in views],
        log=TrainLog(log_path) if log_path is not None else None,
    )
    ui.render_banner("train", f"preset={config.preset}  kernels={config.kernel_mode}")
    with ui.training_progress() as progress:
        task = progress.add_task("train", total=config.iters, completed=state.iteration, loss="-")
        trainer.fit(
            on_step=lambda it, loss: progress.update(task, completed=it, loss=f"{loss:.5f}")
        )
    save_checkpoint(state, out)
    ui.print_ok(f"{state.iteration} iterations, {trainer.meter.total} rays → {out}")


@cli.command()
@click.option("--ckpt", type=click.Path(path_type=Path), required=True)
@click.option("--split", type=click.Choice(SPLITS), default="test", show_default=True)
@click.option("--out", type=click.Path(path_type=Path), required=True)
@click.option("--data", "data_dir", type=click.Path(path_type=Path), default=None,
              help="Dataset for cameras (default: the one recorded in the checkpoint)")
def render(ckpt: Path, split: str, out: Path, data_dir: Path | None) -> None:
    """Render clean images of a split from a checkpoint."""
    from deblurgrid.data.dataset import load_dataset, write_image
    from deblurgrid.errors import DatasetError
    from deblurgrid.render import render_view
    from deblurgrid.training import load_checkpoint

    state = load_checkpoint(ckpt)
    root = data_dir or (Path(state.config.data_dir) if state.config.data_dir else None)
    if root is None:
        raise DatasetError("checkpoint records no dataset; pass --data")
    views = load_dataset(root).split(split)
    ui.render_banner("render", f"{len(views)} {split} views")
    cfg = state.config
    for view in views:
        image, _ = render_view(state.field, view.camera, cfg.samples_per_ray, chunk=cfg.chunk)
        write_image(out / view.name, image.clamp(0.0, 1.0).numpy())
    ui.print_ok(f"{len(views)} renders → {out}")


@cli.command(name="eval")
@click.option("--renders", type=click.Path(path_type=Path), required=True)
@click.option("--refs", type=click.Path(path_type=Path), required=True)
def eval_cmd(renders: Path, refs: Path) -> None:
    """PSNR/SSIM of renders against same-named references."""
    from deblurgrid.eval import compare_directories

    scores = compare_directories(renders, refs)
    ui.console.print(ui.scores_table([(s.name, s.psnr, s.ssim) for s in scores]))


# ── Kernels ───────────────────────────────────────────────────────


@cli.command(name="bench-kernels")
@click.option("--pixels", type=click.IntRange(min=1), default=100_000, show_default=True)
@click.option("--nk", type=click.IntRange(min=1), default=400, show_default=True)
@click.option("--k", "K", type=click.IntRange(min=1), default=11, show_default=True)
@click.option("--reps", type=click.IntRange(min=1), default=30, show_default=True)
def bench_kernels(pixels: int, nk: int, K: int, reps: int) -> None:
    """Time kernel lookup against a per-pixel MLP generator."""
    from deblurgrid.eval import bench_kernel_generation, lookup_scaling

    if K % 2 == 0:
        raise click.BadParameter(f"--k must be odd, got {K}")
    ui.render_banner("bench-kernels", f"{pixels} pixels  K={K}  N_k={nk}")
    with ui.console.status("timing…"):
        result = bench_kernel_generation(pixels, nk, K, reps=reps)
        scaling = lookup_scaling(pixels, K, reps=reps)
    ui.console.print(ui.bench_table(result, scaling))


@cli.command(name="export-kernels")
@click.option("--ckpt", type=click.Path(path_type=Path), required=True)
@click.option("--out", type=click.Path(path_type=Path), required=True)
def export_kernels(ckpt: Path, out: Path) -> None:
    """Write each view's normalized kernels as one mosaic image."""
    from deblurgrid.data.dataset import write_image
    from deblurgrid.errors import CheckpointShapeError
    from deblurgrid.kernels import normalize, tile_kernels
    from deblurgrid.training import load_checkpoint

    state = load_checkpoint(ckpt)
    if state.kernels is None:
        raise CheckpointShapeError(
            f"checkpoint has no kernel grid (kernel_mode={state.config.kernel_mode})"
        )
    weights = normalize(state.kernels.values.detach())
    for view in range(state.n_views):
        write_image(out / f"kernels_view_{view:03d}.png", tile_kernels(weights[view]))
    ui.print_ok(f"{state.n_views} kernel mosaics ({state.kernels.n_levels} levels each) → {out}")


# ── Harness ───────────────────────────────────────────────────────


@cli.command()
@click.argument("name", type=click.Choice(["deblur", "prior-ablation", "fixed-kernels"]))
@click.option("--out", type=click.Path(path_type=Path), required=True)
@click.option("--iters", type=click.IntRange(min=1), default=2000, show_default=True)
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True)
def experiment(name: str, out: Path, iters: int, seed: int) -> None:
    """Run a synthetic-scene experiment and print its report."""
    from deblurgrid.eval.experiments import EXPERIMENTS, recovery_config

    ui.render_banner("experiment", f"{name}  iters={iters}")
    with ui.console.status(f"running {name}…"):
        report = EXPERIMENTS[name](recovery_config(iters, seed=seed), out_dir=out)
    ui.console.print(ui.experiment_table(report.name, report.runs, report.checks))


@cli.command()
def raybudget() -> None:
    """Rays rendered per target pixel for P = 26, 22, 18 at K = 11."""
    from deblurgrid.sampler.patches import BUDGET_KERNEL, ray_budget_table

    ui.console.print(ui.budget_table(ray_budget_table(), BUDGET_KERNEL))


@cli.command()
@click.option("--probes", type=click.IntRange(min=1), default=20, show_default=True)
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True)
def selfcheck(probes: int, seed: int) -> None:
    """Finite-difference check of the full training chain (gradcheck preset)."""
    from deblurgrid.config import TrainConfig
    from deblurgrid.training import check_pipeline_gradients

    config = TrainConfig.from_preset("gradcheck", seed=seed)
    results = check_pipeline_gradients(config, n_probes=probes)
    worst = max(results, key=lambda p: p.rel_error)
    ui.console.print(
        f"{len(results)} probes, worst relative error {worst.rel_error:.2e} "
        f"at {worst.name}{list(worst.index)}"
    )
    if not all(p.passes for p in results):
        raise GradientMismatchError(worst.name, worst.rel_error)
    ui.print_ok("analytic gradients match central differences")


def run() -> None:
    """Console entry point: usage errors exit 1, library errors exit with their own code."""
    try:
        code = cli.main(standalone_mode=False)
    except click.exceptions.Abort:
        sys.exit(EXIT_USAGE)
    except click.ClickException as e:
        e.show()
        sys.exit(EXIT_USAGE)
    sys.exit(code if isinstance(code, int) else EXIT_OK)
