"""``jumpsim`` command line.

Exit codes: 0 success, 1 error (bad config, bad flags, integration failure),
2 run completed without take-off.
"""

from __future__ import annotations

import json
import math
import sys
from pathlib import Path
from typing import Optional

import click
import numpy as np

from . import __version__, analysis, baton, config, prismatic, rhomboid, verification
from .core import ConfigError, TakeoffClass
from .integrator import IntegrationError, penalty_contact_sim

EXIT_OK, EXIT_ERROR, EXIT_NO_TAKEOFF = 0, 1, 2


class _Group(click.Group):
    """Maps every failure, usage errors included, to exit code 1 (2 is reserved)."""

    def main(self, args=None, prog_name=None, complete_var=None, standalone_mode=True, **extra):
        try:
            rv = super().main(args, prog_name, complete_var, standalone_mode=False, **extra)
        except click.exceptions.Abort:
            click.echo("Aborted!", err=True)
            code = EXIT_ERROR
        except click.ClickException as exc:
            exc.show()
            code = EXIT_ERROR
        else:
            code = rv if isinstance(rv, int) else EXIT_OK
        if standalone_mode:
            sys.exit(code)
        return code


def _fail(message: str):
    raise click.ClickException(message)


def parse_grid(text: str) -> list[float]:
    """``start:stop:count`` (inclusive linspace) or a comma-separated list."""
    text = text.strip()
    if not text:
        raise ConfigError("grid is empty")
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"grid {text!r} must be start:stop:count")
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        if count < 1:
            raise ConfigError("grid count must be at least 1")
        # Rounding strips linspace noise such as 0.15000000000000002.
        return [round(v, 12) for v in np.linspace(start, stop, count).tolist()]
    values = [v for v in text.split(",") if v.strip()]
    if not values:
        raise ConfigError("grid is empty")
    return [float(v) for v in values]


def _settings_overrides(rel_tol, max_step, fixed_step, contact_stiffness) -> dict:
    pairs = {
        "rel_tol": rel_tol,
        "max_step": max_step,
        "fixed_step": fixed_step,
        "contact_stiffness": contact_stiffness,
    }
    return {k: v for k, v in pairs.items() if v is not None}


def _integrator_options(fn):
    for name, help_text in (
        ("--contact-stiffness", "Ground spring stiffness for the penalty oracle [N/m]."),
        ("--fixed-step", "Step of the fixed-step verifier [s]."),
        ("--max-step", "Largest adaptive step [s]."),
        ("--rel-tol", "Adaptive relative tolerance."),
    ):
        fn = click.option(name, type=float, default=None, help=help_text)(fn)
    return fn


def _load(config_path: str, overrides, flags: dict) -> config.RunConfig:
    data = config.parse_overrides(overrides)
    if flags:
        data.setdefault("integrator", {}).update(flags)
    return config.load(config_path, overrides=data)


@click.group(cls=_Group)
@click.version_option(__version__, prog_name="jumpsim")
def cli():
    """Take-off simulation of spring-driven jumpers."""


@cli.command()
@click.option("--config", "config_path", required=True, help="TOML run file, or a bundled example name.")
@click.option("--set", "overrides", multiple=True, metavar="SECTION.KEY=VALUE", help="Override one config value.")
@click.option("--method", type=click.Choice(["adaptive", "fixed", "penalty"]), default="adaptive",
              help="Integrator for the rhomboid model.")
@click.option("--out-dir", type=click.Path(file_okay=False), default=None, help="Directory for default outputs.")
@click.option("--dump-config", is_flag=True, help="Print the fully resolved config as TOML and exit.")
@_integrator_options
def simulate(config_path, overrides, method, out_dir, dump_config, rel_tol, max_step, fixed_step, contact_stiffness):
    """Run one model from release to take-off; write trajectory CSV and report JSON."""
    try:
        run = _load(config_path, overrides, _settings_overrides(rel_tol, max_step, fixed_step, contact_stiffness))
    except (ConfigError, OSError, ValueError) as exc:
        _fail(str(exc))
    if dump_config:
        click.echo(config.dumps(run), nl=False)
        return EXIT_OK

    try:
        report, columns = _run_model(run, method)
    except (ConfigError, IntegrationError, ValueError) as exc:
        _fail(f"simulation failed: {exc}")

    out = Path(out_dir) if out_dir else Path(".")
    traj_path = Path(run.trajectory_path) if run.trajectory_path and not out_dir else out / "trajectory.csv"
    report_path = Path(run.report_path) if run.report_path and not out_dir else out / "report.json"
    payload = report.to_dict()
    payload["model"] = run.model
    if run.model != "prismatic":
        payload["takeoff_angle_deg"] = math.degrees(report.state_at_takeoff.q)
    payload["config"] = config.to_dict(run)
    try:
        for path in (traj_path, report_path):
            path.parent.mkdir(parents=True, exist_ok=True)
        traj_path.write_text(analysis.columns_csv(columns), newline="")
        report_path.write_text(json.dumps(payload, indent=2) + "\n")
    except OSError as exc:
        _fail(str(exc))

    click.echo(_summary(run, report))
    return EXIT_NO_TAKEOFF if report.classification is TakeoffClass.NO_TAKEOFF else EXIT_OK


def _run_model(run: config.RunConfig, method: str):
    p, settings, tol = run.params, run.settings, run.ideal_tol
    if run.model == "prismatic":
        return prismatic.takeoff_report(p, tol), prismatic.sample_trajectory(p)
    if run.model == "baton":
        res = baton.simulate_baton(p, settings, tol)
        return res.report, res.trajectory
    if method == "penalty":
        report, traj = penalty_contact_sim(p, settings)
        states = traj.y[:, [0, 2]]
        return report, rhomboid.sample_columns(p, traj.t, states)
    res = rhomboid.simulate_rhomboid(p, settings, tol, method=method)
    return res.report, res.trajectory


def _summary(run: config.RunConfig, report) -> str:
    st = report.state_at_takeoff
    state = f"y_to={st.q:.6g} m" if run.model == "prismatic" else f"theta_to={math.degrees(st.q):.4f} deg"
    lines = [
        f"model={run.model} class={report.classification.value}",
        f"t_to={st.t:.6g} s {state} v_cg={report.v_cg_to:.6g} m/s",
        f"efficiency={report.efficiency:.4f} h={report.jump_height:.4g} m h_norm={report.jump_height_normalized:.4f}",
    ]
    lines += [f"note: {d}" for d in report.diagnostics]
    return "\n".join(lines)


@cli.command()
@click.option("--config", "config_path", default="table1", show_default=True, help="Rhomboid base config.")
@click.option("--set", "overrides", multiple=True, metavar="SECTION.KEY=VALUE")
@click.option("--family", type=click.Choice([f.value for f in analysis.Family]),
              default=analysis.Family.EXPERIMENTAL_PLUS_PAYLOAD.value, show_default=True)
@click.option("--param", "swept", type=click.Choice([p.value for p in analysis.SweptParam]),
              default=analysis.SweptParam.BODY_MASS_FRACTION.value, show_default=True)
@click.option("--grid", required=True, help="start:stop:count or a comma-separated list.")
@click.option("--payload", type=float, default=0.2, show_default=True, help="Extra mass [kg].")
@click.option("--jobs", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="CSV path (default stdout).")
@_integrator_options
def sweep(config_path, overrides, family, swept, grid, payload, jobs, out, rel_tol, max_step, fixed_step, contact_stiffness):
    """Sweep body mass fraction or force-to-weight ratio; write one CSV row per point."""
    try:
        run = _load(config_path, overrides, _settings_overrides(rel_tol, max_step, fixed_step, contact_stiffness))
        if run.model != "rhomboid":
            raise ConfigError(f"sweeps need a rhomboid config, got {run.model}")
        spec = analysis.SweepSpec(family, swept, tuple(parse_grid(grid)), run.params, payload)
        rows = analysis.sweep(spec, run.settings, jobs=jobs)
    except (ConfigError, IntegrationError, OSError, ValueError) as exc:
        _fail(str(exc))
    _emit(analysis.sweep_csv(rows), out)
    return EXIT_OK


@cli.command()
@click.option("--alpha", "alphas", type=float, multiple=True, help="Force-to-weight ratio (repeatable).")
@click.option("--grid", default=None, help="start:stop:count or a comma-separated list.")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def bounds(alphas, grid, out):
    """Normalised jump-height bounds for ideal and linear springs."""
    try:
        values = list(alphas) + (parse_grid(grid) if grid is not None else [])
    except (ConfigError, ValueError) as exc:
        _fail(str(exc))
    if not values:
        _fail("give --alpha and/or --grid")
    rows = [(a, *analysis.bounds(a)) for a in values]
    _emit(analysis.write_csv(("alpha", "h_norm_ideal", "h_norm_linear"), rows), out)
    return EXIT_OK


@cli.command()
@click.option("--robots", default="robots.csv", show_default=True, help="Robot CSV, or the bundled example.")
@click.option("--g", "g", type=float, default=9.81, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def compare(robots, g, out):
    """Measured against inertialess normalised jump height for published robots."""
    try:
        path = config.resolve_path(robots)
        records = analysis.read_robot_records(path)
    except (ConfigError, OSError, ValueError) as exc:
        _fail(str(exc))
    _emit(analysis.compare_csv(analysis.compare_rows(records, g)), out)
    return EXIT_OK


@cli.command()
@_integrator_options
@click.option("--check", "only", multiple=True, metavar="NAME",
              help=f"Run only this oracle (repeatable): {', '.join(verification.CHECK_NAMES)}.")
@click.option("--debug-perturb-accel", type=float, default=None, hidden=True,
              help="Scale the closed-form knee acceleration (mutation check).")
def verify(rel_tol, max_step, fixed_step, contact_stiffness, only, debug_perturb_accel):
    """Run every cross-model oracle; exit 0 only if all pass."""
    accel = verification.perturbed_acceleration(debug_perturb_accel) if debug_perturb_accel else None
    try:
        flags = _settings_overrides(rel_tol, max_step, fixed_step, contact_stiffness)
        settings = config.IntegratorSettings(**flags)
        results = verification.run_all(settings, accel=accel, only=only)
    except (ValueError, IntegrationError) as exc:
        _fail(str(exc))
    for res in results:
        click.echo(res.line())
    failed = [r.name for r in results if not r.passed]
    click.echo(f"{len(results) - len(failed)}/{len(results)} oracles passed")
    return EXIT_ERROR if failed else EXIT_OK


def _emit(text: str, out: Optional[str]):
    if out:
        try:
            Path(out).write_text(text, newline="")
        except OSError as exc:
            _fail(str(exc))
    else:
        click.echo(text, nl=False)


def main():
    cli()


if __name__ == "__main__":
    main()
