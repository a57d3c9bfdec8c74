"""Command-line entry points: run experiments, summarize results, replay episodes."""

from __future__ import annotations

import dataclasses
import json
import sys

import click

from .config import Config
from .experiment import read_rows, run_experiment, summarize
from .orchestrator import EpisodeRunner
from .scenes import BUILTIN_SCENES, get_scene


def _load_config(path: str | None, resolution: float | None, alpha: float | None, beta: float | None) -> Config:
    cfg = Config.load(path) if path else Config()
    if resolution is not None:
        cfg = cfg.with_resolution(resolution)
    if alpha is not None or beta is not None:
        safety = dataclasses.replace(
            cfg.safety,
            **({"alpha": alpha} if alpha is not None else {}),
            **({"beta": beta} if beta is not None else {}),
        )
        cfg = dataclasses.replace(cfg, safety=safety)
    return cfg


@click.group()
def main() -> None:
    """Task-driven next-best-view selection for grasping, in simulation."""


@main.command()
@click.option("--scene", "scene_names", multiple=True, help="Scene name; repeatable. Default: all builtin.")
@click.option("--seeds", default=5, show_default=True, help="Number of seeds (0..N-1).")
@click.option("--seed-base", default=0, show_default=True, help="First seed value.")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None, help="YAML config file.")
@click.option("--out", "out_dir", type=click.Path(), default=None, help="Output directory for CSV and logs.")
@click.option("--resolution", type=float, default=None, help="Override voxel resolution (metres).")
@click.option("--alpha", type=float, default=None, help="Override execution gate on collision probability.")
@click.option("--beta", type=float, default=None, help="Override safety-exploration stop threshold.")
@click.option(
    "--policy",
    type=click.Choice(["nbv", "random", "both"]),
    default="both",
    show_default=True,
)
def run(scene_names, seeds, seed_base, config_path, out_dir, resolution, alpha, beta, policy) -> None:
    """Run episodes over scenes x seeds and print the summary."""
    names = list(scene_names) if scene_names else sorted(BUILTIN_SCENES)
    unknown = [n for n in names if n not in BUILTIN_SCENES]
    if unknown:
        raise click.ClickException(f"unknown scenes: {unknown}; available: {sorted(BUILTIN_SCENES)}")
    if not names or seeds <= 0:
        click.echo("nothing to run: need at least one scene and one seed", err=True)
        sys.exit(1)
    cfg = _load_config(config_path, resolution, alpha, beta)
    policies = ("nbv", "random") if policy == "both" else (policy,)
    rows = run_experiment(
        scene_names=names,
        seeds=list(range(seed_base, seed_base + seeds)),
        config=cfg,
        out_dir=out_dir,
        policies=policies,
    )
    click.echo(json.dumps(summarize(rows), indent=2, sort_keys=True))


@main.command("summarize")
@click.argument("csv_path", type=click.Path(exists=True))
def summarize_cmd(csv_path) -> None:
    """Summarize a results CSV produced by `run`."""
    rows = read_rows(csv_path)
    if not rows:
        click.echo("no rows in CSV", err=True)
        sys.exit(1)
    click.echo(json.dumps(summarize(rows), indent=2, sort_keys=True))


@main.command()
@click.option("--scene", "scene_name", required=True, help="Builtin scene name.")
@click.option("--seed", default=0, show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--resolution", type=float, default=None)
@click.option("--alpha", type=float, default=None)
@click.option("--beta", type=float, default=None)
def replay(scene_name, seed, config_path, resolution, alpha, beta) -> None:
    """Re-run one next-best-view episode and print its full decision log."""
    if scene_name not in BUILTIN_SCENES:
        raise click.ClickException(f"unknown scene {scene_name!r}; available: {sorted(BUILTIN_SCENES)}")
    cfg = _load_config(config_path, resolution, alpha, beta)
    runner = EpisodeRunner(get_scene(scene_name), cfg, scene_name=scene_name)
    report = runner.active_grasp(seed)
    click.echo(json.dumps(report.as_dict(), indent=2, sort_keys=True, default=str))


if __name__ == "__main__":
    main()
