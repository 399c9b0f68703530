"""
Command Line Interface
======================

Main CLI for the PM10 exposure toolkit.
"""

import json
import logging
from pathlib import Path
from typing import Optional

import click
from dotenv import load_dotenv
from rich.console import Console
from rich.progress import Progress, SpinnerColumn, TextColumn
from rich.table import Table

from . import __version__
from .config_loader import Config, load_config
from .exceptions import ExposureError
from .logging_setup import setup_logging
from .manifest import RunManifest, checksums

console = Console(stderr=True)
logger = logging.getLogger(__name__)


def print_header():
    """Print the toolkit header."""
    console.print("\n[bold green]═══════════════════════════════════════════════════════════════[/bold green]")
    console.print(f"[bold green]       PM10 Exposure ABM Toolkit v{__version__}[/bold green]")
    console.print("[bold green]═══════════════════════════════════════════════════════════════[/bold green]\n")


def _spinner() -> Progress:
    return Progress(SpinnerColumn(), TextColumn("[progress.description]{task.description}"),
                    console=console, transient=True)


class ExposureGroup(click.Group):
    """Command group that turns errors into exit codes and error.json."""

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except (click.ClickException, click.exceptions.Exit, click.Abort):
            raise
        except ExposureError as e:
            self._report(ctx, e.to_dict())
        except Exception as e:
            logger.exception("Unexpected failure")
            self._report(ctx, {"error": type(e).__name__, "message": str(e), "exit_code": ExposureError.exit_code})

    @staticmethod
    def _report(ctx, report):
        out = (ctx.obj or {}).get("out")
        if out is not None:
            out.mkdir(parents=True, exist_ok=True)
            with open(out / "error.json", "w", encoding="utf-8") as f:
                json.dump(report, f, indent=2)
        click.echo(json.dumps(report), err=True)
        ctx.exit(report["exit_code"])


def _config(ctx) -> Config:
    return ctx.obj["config"]


def _output_dir(ctx) -> Path:
    out = ctx.obj["out"]
    out.mkdir(parents=True, exist_ok=True)
    return out


def _apply_overrides(config: Config, seed: Optional[int] = None, max_ticks: Optional[int] = None,
                     jobs: Optional[int] = None, replicates: Optional[int] = None,
                     seed_key: str = "simulation.seed") -> Config:
    overrides = {}
    if seed is not None:
        overrides[seed_key] = seed
    if max_ticks is not None:
        overrides["simulation.max_ticks"] = max_ticks
    if jobs is not None:
        overrides["experiments.jobs"] = jobs
    if replicates is not None:
        overrides["experiments.replicates"] = replicates
    return config.with_overrides(overrides) if overrides else config


def _manifest(command: str, config: Config, model=None, **kwargs) -> RunManifest:
    inputs = list(model.input_files) if model is not None else []
    manifest = RunManifest(
        command=command,
        config=config.to_dict(),
        input_checksums=checksums(inputs),
        warnings=list(model.warnings) if model is not None else [],
        **kwargs,
    )
    return manifest


@click.group(cls=ExposureGroup)
@click.option(
    "--config", "-c",
    type=click.Path(exists=True),
    help="Path to project configuration file (YAML or JSON)"
)
@click.option(
    "--out", "-o",
    type=click.Path(file_okay=False),
    help="Output directory (defaults to output.dir of the config)"
)
@click.pass_context
def cli(ctx, config, out):
    """
    PM10 Exposure ABM Toolkit - cumulative exposure of a synthetic population.

    Use --config to specify a project configuration file.
    """
    ctx.ensure_object(dict)
    load_dotenv(override=False)

    ctx.obj["out"] = Path(out) if out else None
    ctx.obj["config"] = load_config(config)
    if ctx.obj["out"] is None:
        ctx.obj["out"] = ctx.obj["config"].output_dir

    print_header()


@cli.command()
@click.pass_context
def info(ctx):
    """Display current project configuration information."""
    config = _config(ctx)

    table = Table(title="Project Configuration")
    table.add_column("Property", style="cyan")
    table.add_column("Value", style="green")

    eta = config.get("health.eta", {}) or {}
    table.add_row("Project Name", config.project_name)
    table.add_row("Config File", str(config.source or "defaults only"))
    table.add_row("Districts", ", ".join(sorted(config.districts)) or "none")
    table.add_row("Pollution Scenario", str(config.get("pollution.scenario")))
    table.add_row("Alpha", str(config.get("health.alpha")))
    table.add_row("Eta (young/active/old)", "/".join(str(eta.get(g)) for g in ("young", "active", "old")))
    table.add_row("Adaptive Capacity", str(config.get("health.adaptive_capacity")))
    table.add_row("Road Multiplier", str(config.get("health.road_multiplier")))
    table.add_row("Seed", str(config.seed))
    table.add_row("Max Ticks", str(config.max_ticks))
    table.add_row("Replicates", str(config.get("experiments.replicates")))
    table.add_row("Output Directory", str(ctx.obj["out"]))

    console.print(table)


@cli.command()
@click.argument("in_csv", type=click.Path(exists=True, dir_okay=False))
@click.argument("out_csv", type=click.Path(dir_okay=False))
@click.pass_context
def impute(ctx, in_csv, out_csv):
    """Impute an hourly PM10 CSV and aggregate it to half-day ticks."""
    from .pollution.aggregation import aggregate_to_ticks
    from .pollution.imputation import impute as impute_series
    from .pollution.series import load_hourly_csv, save_tick_csv

    config = _config(ctx)
    out_path = Path(out_csv)
    ctx.obj["out"] = out_path.parent
    setup_logging(config)
    manifest = _manifest("impute", config, seed=None)
    manifest.input_checksums = checksums([Path(in_csv)])

    with _spinner() as progress:
        task = progress.add_task("Imputing hourly series...", total=None)
        with manifest.time("impute"):
            hourly = load_hourly_csv(in_csv)
            filled = impute_series(
                hourly,
                long_gap_hours=int(config.get("pollution.long_gap_hours", 168)),
                max_missing_fraction=float(config.get("pollution.max_missing_fraction", 0.5)),
            )
            ticks = aggregate_to_ticks(filled)
        progress.update(task, completed=True)

    save_tick_csv(ticks, out_path)
    manifest.extra = {"hours": len(hourly), "missing_hours": int(hourly.missing.sum()), "ticks": len(ticks)}
    manifest.write(out_path.parent / f"{out_path.stem}_manifest.json")

    console.print(f"  [green]✓[/green] Filled {int(hourly.missing.sum())} of {len(hourly)} hours")
    console.print(f"\n[green]Tick series saved to: {out_path}[/green]")


@cli.command("build-world")
@click.pass_context
def build_world(ctx):
    """Build district worlds and write their manifests."""
    from .dynamics.model import ExposureModel
    from .environment.world import world_manifest

    config = _config(ctx)
    out = _output_dir(ctx)
    setup_logging(config, out)
    model = ExposureModel(config)

    with _spinner() as progress:
        task = progress.add_task("Building worlds...", total=None)
        worlds = model.load_worlds()
        progress.update(task, completed=True)

    table = Table(title="District Worlds")
    for column in ("District", "Grid", "Walkable", "Roads", "Residential"):
        table.add_column(column, style="cyan" if column == "District" else "green")

    for district, world in worlds.items():
        entry = config.districts[district]
        manifest = world_manifest(world, [config.resolve_path(entry[k]) for k in ("land_cover", "land_price")])
        with open(out / f"world_manifest_{district}.json", "w", encoding="utf-8") as f:
            json.dump(manifest, f, indent=2, sort_keys=True)
        table.add_row(district, f"{world.shape[1]} x {world.shape[0]}", str(manifest["walkable"]),
                      str(manifest["roads"]), str(manifest["class_counts"]["residential"]))

    console.print(table)
    for note in model.warnings:
        console.print(f"[yellow]Warning: {note}[/yellow]")
    console.print(f"\n[green]World manifests saved to: {out}[/green]")


@cli.command("synth-pop")
@click.option("--seed", type=int, default=None, help="Run seed (overrides config and environment)")
@click.pass_context
def synth_pop(ctx, seed):
    """Synthesize the agent population and write agents.csv."""
    from .dynamics.model import ExposureModel
    from .population.synthesis import agents_frame, group_counts

    config = _apply_overrides(_config(ctx), seed=seed)
    out = _output_dir(ctx)
    setup_logging(config, out)
    model = ExposureModel(config)
    run_seed = seed if seed is not None else config.seed

    manifest = _manifest("synth-pop", config, seed=run_seed)
    with manifest.time("synthesize"):
        agents = model.agents(run_seed)
    agents_frame(agents, model.load_worlds()).to_csv(out / "agents.csv", index=False)

    manifest.input_checksums = checksums(model.input_files)
    counts = group_counts(agents)
    manifest.extra = {"agents": len(agents), "groups": counts,
                      "cross_district": sum(a.cross_district for a in agents)}
    manifest.write(out / "manifest.json")

    console.print(f"  [green]✓[/green] {len(agents)} agents "
                  f"({', '.join(f'{k} {v}' for k, v in counts.items())})")
    console.print(f"\n[green]Population saved to: {out / 'agents.csv'}[/green]")


@cli.command()
@click.option("--seed", type=int, default=None, help="Run seed (overrides config and environment)")
@click.option("--max-ticks", type=int, default=None, help="Horizon in ticks")
@click.pass_context
def run(ctx, seed, max_ticks):
    """Run one simulation and write its trajectories."""
    from .dynamics.model import ExposureModel

    config = _apply_overrides(_config(ctx), seed=seed, max_ticks=max_ticks)
    out = _output_dir(ctx)
    setup_logging(config, out)
    model = ExposureModel(config)
    run_seed = seed if seed is not None else config.seed

    manifest = _manifest("run", config, seed=run_seed)
    with _spinner() as progress:
        task = progress.add_task("Loading inputs...", total=None)
        with manifest.time("load"):
            model.prepare()
        progress.update(task, description="Simulating...")
        with manifest.time("simulate"):
            result = model.run(seed=run_seed, snapshot=True)
        progress.update(task, completed=True)

    result.trajectory_frame().to_csv(out / "trajectory.csv", index=False)
    result.admissions_frame().to_csv(out / "admissions.csv", index=False)
    result.district_frame().to_csv(out / "districts.csv", index=False)
    result.health_frame().to_csv(out / "health.csv", index=False)
    result.agents.to_csv(out / "agents.csv", index=False)

    manifest.input_checksums = checksums(model.input_files)
    manifest.warnings = list(model.warnings)
    manifest.stop_cause = result.stop_cause
    manifest.extra = {
        "final_tick": result.final_tick,
        "final_rate": result.final_rate,
        "onset_tick": result.onset_tick(),
        "surge_tick": result.surge_tick(),
        "assessed": result.assessed_total,
    }
    manifest.write(out / "manifest.json")

    console.print(f"  [green]✓[/green] Stopped at tick {result.final_tick} ({result.stop_cause}), "
                  f"final at-risk rate {result.final_rate:.4f}")
    console.print(f"\n[green]Results saved to: {out}[/green]")


@cli.command()
@click.argument("spec", required=False, type=click.Path(exists=True, dir_okay=False))
@click.option("--jobs", "-j", type=int, default=None, help="Worker processes")
@click.option("--replicates", "-n", type=int, default=None, help="Replicates per cell")
@click.option("--seed", type=int, default=None, help="Seed of the first replicate")
@click.option("--max-ticks", type=int, default=None, help="Horizon in ticks")
@click.pass_context
def sweep(ctx, spec, jobs, replicates, seed, max_ticks):
    """Run the OFAT sweep over alpha and road multiplier."""
    from .experiments.sweep import SweepSpec, ofat_sweep

    config = load_config(spec) if spec else _config(ctx)
    config = _apply_overrides(config, seed=seed, max_ticks=max_ticks, jobs=jobs,
                              replicates=replicates, seed_key="experiments.seed_base")
    out = _output_dir(ctx)
    setup_logging(config, out)

    sweep_spec = SweepSpec.from_config(config)
    manifest = _manifest("sweep", config, seed=sweep_spec.seed_base)
    console.print(f"[cyan]{len(sweep_spec.cells)} cells x {sweep_spec.replicates} replicates[/cyan]\n")
    with manifest.time("sweep"):
        result = ofat_sweep(sweep_spec)
    path = result.save(out)
    manifest.write(out / "manifest.json")

    table = Table(title="Final mean at-risk rate")
    table.add_column("alpha", style="cyan")
    finals = result.final_rates()
    for road in finals.columns:
        table.add_column(f"road {road:g}", style="green")
    for alpha, row in finals.iterrows():
        table.add_row(f"{alpha:g}", *(f"{v:.4f}" for v in row))
    console.print(table)
    console.print(f"\n[green]Sweep saved to: {path}[/green]")


@cli.command()
@click.option("--jobs", "-j", type=int, default=None, help="Worker processes")
@click.option("--replicates", "-n", type=int, default=None, help="Replicates per cell")
@click.option("--seed", type=int, default=None, help="Seed of the first replicate")
@click.option("--max-ticks", type=int, default=None, help="Horizon in ticks")
@click.pass_context
def scenarios(ctx, jobs, replicates, seed, max_ticks):
    """Run the pollution x adaptive-capacity scenario matrix."""
    from .experiments.scenarios import scenario_matrix

    config = _apply_overrides(_config(ctx), seed=seed, max_ticks=max_ticks, jobs=jobs,
                              replicates=replicates, seed_key="experiments.seed_base")
    out = _output_dir(ctx)
    setup_logging(config, out)

    manifest = _manifest("scenarios", config, seed=int(config.get("experiments.seed_base", 1000)))
    with manifest.time("scenarios"):
        result = scenario_matrix(config)
    curves, summary_path = result.save(out)
    manifest.write(out / "manifest.json")

    summary = result.summary_frame()
    table = Table(title="Scenario Matrix")
    for column in ("Scenario", "AC", "Final mean rate", "Onset", "Surge"):
        table.add_column(column, style="cyan" if column == "Scenario" else "green")
    for row in summary.itertuples(index=False):
        table.add_row(row.scenario.upper(), f"{row.ac:g}", f"{row.final_mean_rate:.4f}",
                      str(row.onset_tick), str(row.surge_tick))
    console.print(table)
    console.print(f"\n[green]Scenarios saved to: {curves} and {summary_path}[/green]")


@cli.command()
@click.argument("spec", required=False, type=click.Path(exists=True, dir_okay=False))
@click.option("--observed", required=True, type=click.Path(exists=True, dir_okay=False),
              help="Observed admissions CSV (age_bin,count)")
@click.option("--jobs", "-j", type=int, default=None, help="Worker processes")
@click.option("--replicates", "-n", type=int, default=None, help="Replicates per candidate")
@click.option("--seed", type=int, default=None, help="Seed of the first replicate")
@click.option("--max-ticks", type=int, default=None, help="Horizon in ticks")
@click.pass_context
def calibrate(ctx, spec, observed, jobs, replicates, seed, max_ticks):
    """Grid-search alpha and eta against observed admissions."""
    from .experiments.calibration import calibrate as run_calibration
    from .experiments.calibration import load_observed_csv

    config = load_config(spec) if spec else _config(ctx)
    config = _apply_overrides(config, seed=seed, max_ticks=max_ticks, jobs=jobs,
                              replicates=replicates, seed_key="experiments.seed_base")
    out = _output_dir(ctx)
    setup_logging(config, out)

    patients = load_observed_csv(observed)
    manifest = _manifest("calibrate", config, seed=int(config.get("experiments.seed_base", 1000)))
    manifest.input_checksums = checksums([Path(observed)])
    with manifest.time("calibrate"):
        result = run_calibration(
            config,
            alphas=config.get("experiments.calibration.alpha_grid") or [],
            eta_grids=config.get("experiments.calibration.eta_grid") or {},
            observed=patients,
        )
    result.save(out)
    manifest.extra = {"alpha": result.alpha, "eta": result.eta, "objective": result.objective}
    manifest.write(out / "manifest.json")

    console.print(f"  [green]✓[/green] alpha={result.alpha:g} "
                  f"eta={'/'.join(f'{v:g}' for v in result.eta.values())} L1={result.objective:.4f}")
    console.print(f"\n[green]Calibration saved to: {out}[/green]")


@cli.command()
@click.argument("csv", type=click.Path(exists=True, dir_okay=False))
@click.argument("svg", type=click.Path(dir_okay=False))
@click.pass_context
def plot(ctx, csv, svg):
    """Draw a trajectory, sweep or scenario CSV as an SVG line chart."""
    from .visualization.plotter import Plotter

    ctx.obj["out"] = Path(svg).parent
    path = Plotter(_config(ctx)).plot_csv(csv, svg)
    console.print(f"\n[green]Figure saved to: {path}[/green]")


@cli.group()
def fixtures():
    """Synthetic input data."""


@fixtures.command()
@click.argument("directory", type=click.Path(file_okay=False))
@click.option("--size", type=int, default=60, help="Grid side length in cells")
@click.option("--population", type=int, default=100_000, help="Census persons per district")
@click.option("--seed", type=int, default=7, help="Generator seed")
@click.option("--input-kind", type=click.Choice(["hourly", "ticks"]), default="hourly",
              help="Write hourly station CSVs or aggregated tick CSVs")
@click.option("--constant-pm10", type=float, default=None, help="Constant pollution level")
@click.pass_context
def generate(ctx, directory, size, population, seed, input_kind, constant_pm10):
    """Write a synthetic two-district input set and its config."""
    from .fixtures.generator import generate_fixtures

    ctx.obj["out"] = Path(directory)
    with _spinner() as progress:
        task = progress.add_task("Generating fixtures...", total=None)
        config_path = generate_fixtures(directory, size=size, population=population, seed=seed,
                                        input_kind=input_kind, constant_pm10=constant_pm10)
        progress.update(task, completed=True)
    console.print(f"\n[green]Fixture config saved to: {config_path}[/green]")


def main():
    """Entry point for the CLI."""
    cli(obj={})


if __name__ == "__main__":
    main()
