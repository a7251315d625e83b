"""
CLI - dsgravity command line: one subcommand per scenario
"""

import functools
from typing import Any, Callable, Dict, List, Optional

import click
from dotenv import load_dotenv
from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from . import __version__
from .algebra import AlgebraMode
from .exceptions import ConfigError, ReportError
from .scenarios import RunReport, ScenarioName, ScenarioRunner, load_bodies_file, load_scenario_file

console = Console()

MODES = [m.value for m in AlgebraMode]
COSMO_MODES = [AlgebraMode.DESITTER.value, AlgebraMode.POINCARE.value]


def render_report(report: RunReport) -> None:
    """Print the checks of a report as a table"""
    if report.error:
        console.print(Panel.fit(f"[red]{report.error}[/red]", title=f"{report.scenario.value} rejected"))
    table = Table(show_header=True, header_style="bold magenta", title=f"{report.scenario.value} checks")
    for column in ("check", "value", "oracle", "tolerance", "status", "source"):
        table.add_column(column)
    for check in report.checks:
        status = "[green]pass[/green]" if check.passed else "[red]FAIL[/red]"
        table.add_row(check.name, f"{check.value:.6g}", f"{check.oracle:.6g}", f"{check.tolerance:.1e} {check.comparison}",
                      status, check.source)
    console.print(table)


def _run(ctx: click.Context, scenario: ScenarioName, overrides: Dict[str, Any]) -> None:
    """Merge file, flags and output options, run the scenario, exit 0 iff every check passes"""
    options = ctx.obj["run"]
    overrides = {k: v for k, v in overrides.items() if v is not None}
    try:
        if options.get("params"):
            data = load_scenario_file(options["params"], overrides)
        else:
            data = {"parameters": overrides}
        data["scenario"] = scenario.value
        if options.get("seed") is not None:
            data["seed"] = options["seed"]
        output = data.setdefault("output", {})
        if options.get("output"):
            output["path"] = options["output"]
        if options.get("fmt"):
            output["format"] = options["fmt"]
        runner = ScenarioRunner(ctx.obj["config_path"])
        report, written = runner.run(data)
    except ConfigError as e:
        console.print(f"[red]Invalid configuration:[/red] {e}")
        for error in e.errors:
            console.print(f"  • {error.get('field', '')}: {error.get('message', '')}")
        ctx.exit(2)
    except ReportError as e:
        console.print(f"[red]Cannot write report:[/red] {e}")
        ctx.exit(2)
    render_report(report)
    for path in written:
        console.print(f"💾 Report saved: {path}")
    ctx.exit(0 if report.passed else 1)


def run_options(fn: Callable) -> Callable:
    """--params/--output/--format/--seed shared by every scenario command"""
    @click.option("--params", type=click.Path(exists=True, dir_okay=False), help="scenario JSON document")
    @click.option("--output", help="report path without extension")
    @click.option("--format", "fmt", type=click.Choice(["csv", "json"]), help="report format")
    @click.option("--seed", type=int, help="seed for randomized checks")
    @click.pass_context
    @functools.wraps(fn)
    def wrapper(ctx, params, output, fmt, seed, **kwargs):
        ctx.ensure_object(dict)
        ctx.obj["run"] = {"params": params, "output": output, "fmt": fmt, "seed": seed}
        return fn(ctx, **kwargs)

    return wrapper


@click.group()
@click.option("--config", "config_path", default="config.json", show_default=True, help="runner configuration file")
@click.version_option(version=__version__, prog_name="dsgravity")
@click.pass_context
def main(ctx: click.Context, config_path: str):
    """de Sitter Yang-Mills gravity scenarios"""
    load_dotenv()
    ctx.ensure_object(dict)
    ctx.obj["config_path"] = config_path


# ===================
# Scenario commands
# ===================

@main.group()
def algebra():
    """Generator algebra"""


@algebra.command("verify")
@click.option("--mode", type=click.Choice(MODES))
@click.option("--radius", type=float)
@run_options
def algebra_verify(ctx, mode: Optional[str], radius: Optional[float]):
    """Structure relations and Jacobi identities"""
    _run(ctx, ScenarioName.ALGEBRA, {"mode": mode, "radius": radius})


@main.group()
def lattice():
    """Lattice gauge field"""


@lattice.command("converge")
@click.option("--mode", type=click.Choice(MODES))
@click.option("--eps", type=float, help="coarsest lattice spacing (sets base cells = length/eps)")
@click.option("--base-cells", type=int)
@click.option("--levels", type=int)
@click.option("--resolution", type=int)
@click.option("--length", type=float)
@run_options
def lattice_converge(ctx, mode, eps, base_cells, levels, resolution, length):
    """Wilson action against the continuum action under ε halving, plus gauge invariance"""
    _run(ctx, ScenarioName.LATTICE, {"mode": mode, "eps": eps, "base_cells": base_cells, "levels": levels,
                                     "resolution": resolution, "length": length})


@main.group("field")
def field_group():
    """Field equations"""


@field_group.command("residual")
@click.option("--scenario", type=click.Choice(["spherical", "cosmo", "custom"]))
@click.option("--custom", "custom_file", type=click.Path(exists=True, dir_okay=False),
              help="grid, potential and source samples as JSON")
@click.option("--mass", help='central mass with unit, e.g. "1 solMass"')
@click.option("--order", type=click.Choice(["2", "4"]))
@click.option("--refine", "--levels", "levels", type=int, help="number of grids, each halving h")
@run_options
def field_residual(ctx, scenario, custom_file, mass, order, levels):
    """Field-equation residuals under grid refinement"""
    _run(ctx, ScenarioName.FIELD, {"scenario": scenario, "custom_file": custom_file, "mass": mass,
                                   "order": int(order) if order else None, "levels": levels})


@main.command()
@click.option("--mass", help='central mass with unit')
@click.option("--a", "a", help='semi-major axis with unit, e.g. "2000 km"')
@click.option("--e", "e", type=float, help="eccentricity in (0, 1)")
@click.option("--r-peri", help='periapsis with unit; overrides --a/--e together with --r-apo')
@click.option("--r-apo", help="apoapsis with unit")
@click.option("--orbits", "--n-orbits", "n_orbits", type=int)
@click.option("--samples", type=int)
@run_options
def orbit(ctx, mass, a, e, r_peri, r_apo, n_orbits, samples):
    """Bound geodesic in the spherical field: trajectory, precession and period"""
    _run(ctx, ScenarioName.ORBIT, {"mass": mass, "a": a, "e": e, "r_peri": r_peri, "r_apo": r_apo,
                                   "n_orbits": n_orbits, "samples": samples})


@main.command("classic-tests")
@click.option("--n-orbits", type=int)
@run_options
def classic_tests_command(ctx, n_orbits):
    """Perihelion, light bending, redshift and the radial potential comparison"""
    _run(ctx, ScenarioName.CLASSIC, {"n_orbits": n_orbits})


@main.group()
def pn():
    """Post-Newtonian field"""


def _field_point(text: str) -> List[str]:
    parts = text.split(",")
    try:
        values = [float(p) for p in parts]
    except ValueError:
        values = []
    if len(values) != 3:
        raise click.BadParameter(f"{text!r} is not x,y,z", param_hint="--at")
    return [f"{v!r} m" for v in values]


@pn.command("field")
@click.option("--bodies", "bodies_file", type=click.Path(exists=True, dir_okay=False),
              help="JSON list of {mass, position, velocity}")
@click.option("--at", "points", multiple=True, help="field point x,y,z in metres; repeatable")
@click.option("--iterations", type=int)
@run_options
def pn_field(ctx, bodies_file, points, iterations):
    """1PN potentials of the bodies at the field points"""
    bodies = None
    if bodies_file:
        try:
            bodies = load_bodies_file(bodies_file)
        except ConfigError as e:
            raise click.BadParameter(str(e), param_hint="--bodies")
    _run(ctx, ScenarioName.PN, {"bodies": bodies, "points": [_field_point(p) for p in points] or None,
                                "iterations": iterations})


@main.group(invoke_without_command=True)
@click.option("--mp", "m_p", help="pulsar mass with unit")
@click.option("--mc", "m_c", help="companion mass with unit")
@click.option("--pb", "P_b", help="orbital period with unit")
@click.option("--e", "e", type=float, help="eccentricity")
@click.option("--x-proj", help="projected semi-major axis (light travel time)")
@run_options
def pulsar(ctx, m_p, m_c, P_b, e, x_proj):
    """Post-Keplerian parameters, orbital decay and the radiated power sweep"""
    ctx.obj["pulsar"] = {"m_p": m_p, "m_c": m_c, "P_b": P_b, "e": e, "x_proj": x_proj}
    if ctx.invoked_subcommand is None:
        _run(ctx, ScenarioName.PULSAR, ctx.obj["pulsar"])


@pulsar.command("sweep")
@click.option("--eccentricities", help="comma separated, e.g. 0,0.3,0.6")
@click.option("--separation", type=float, help="semi-major axis in units of M")
@click.option("--samples-per-orbit", type=int)
@click.pass_context
def pulsar_sweep(ctx, eccentricities, separation, samples_per_orbit):
    """Numeric against closed-form power over an eccentricity grid, written as CSV"""
    ctx.obj["run"]["fmt"] = ctx.obj["run"].get("fmt") or "csv"
    try:
        sweep = [float(x) for x in eccentricities.split(",")] if eccentricities else None
    except ValueError:
        raise click.BadParameter(f"{eccentricities!r} is not a comma separated list", param_hint="--eccentricities")
    _run(ctx, ScenarioName.PULSAR, {**ctx.obj["pulsar"], "sweep_eccentricities": sweep,
                                    "sweep_separation": separation, "samples_per_orbit": samples_per_orbit})


def cosmo_options(fn: Callable) -> Callable:
    for option in reversed([
        click.option("--mode", type=click.Choice(COSMO_MODES)),
        click.option("--a0", type=float),
        click.option("--t0", type=float),
        click.option("--rho0", type=float),
        click.option("--b0", type=float),
        click.option("--c0", type=float),
        click.option("--d0", type=float),
        click.option("--from", "t_from", type=float, help="first time (default t0/100)"),
        click.option("--to", "t_to", type=float, help="last time (default 10 t0)"),
        click.option("--samples", type=int),
    ]):
        fn = option(fn)
    return fn


@main.group(invoke_without_command=True)
@cosmo_options
@run_options
def cosmo(ctx, **values):
    """Homogeneous universe: integrate the coupled system (or `compare` the two closed forms)"""
    ctx.obj["cosmo"] = values
    if ctx.invoked_subcommand is None:
        _run(ctx, ScenarioName.COSMO, values)


@cosmo.command("compare")
@click.pass_context
def cosmo_compare(ctx):
    """de Sitter and Poincaré closed forms side by side"""
    _run(ctx, ScenarioName.COSMO, {**ctx.obj["cosmo"], "compare": True})


if __name__ == "__main__":
    main()
