"""Batch command-line interface: approximation comparison, margin reports,
plot-data emission, simulation, and session manipulation.

Outputs are CSV/JSON only (plot rendering belongs to the UI); identical argv on
identical input files produces byte-identical output files.
Exit codes: 0 success, 1 domain error, 2 usage error.
"""
from __future__ import annotations

import json
import math
import sys
from pathlib import Path

import click
import numpy as np

from . import presets
from .analysis import FreqGrid, PlotView, Subsystem, margins as compute_margins, open_loop, plot_data
from .errors import FracshapeError
from .fracapprox import (
    CfeConfig,
    CfeMethod,
    CroneConfig,
    carlson,
    cfe_discretize,
    crone,
    matsuda,
)
from .filters import ApproxMethod, ControllerDef, FilterKind, FilterSpec, assemble_controller
from .session import (
    ExamplePlantKind,
    ExamplePlantSpec,
    ExamplePlantSource,
    FrdPlantSource,
    Session,
    TfPlantSource,
    export_controller,
    import_frd,
    load_session,
    resolve_plant,
    save_session,
    simconfig_from_document,
    tf_from_document,
)
from .tfcore import Domain, RationalTF, eval_response
from .timesim import sim_result_csv, simulate


def _fmt(x: float) -> str:
    return repr(float(x))


def _write_text(path: str | None, text: str) -> None:
    if path is None or path == "-":
        click.echo(text, nl=False)
    else:
        Path(path).write_text(text)


def _csv(columns: dict[str, np.ndarray]) -> str:
    names = list(columns)
    rows = zip(*(columns[n] for n in names))
    lines = [",".join(names)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def _load_session_file(path: str) -> Session:
    return load_session(Path(path).read_text())


def _pick(session: Session, name: str | None) -> ControllerDef:
    if name:
        return session.controller(name)
    if session.active_controller:
        return session.controller(session.active_controller)
    raise FracshapeError("session has no active controller; pass --controller")


@click.group()
def main() -> None:
    """Loop-shaping toolbox for integer- and fractional-order controllers."""


# --- approx -----------------------------------------------------------------------


@main.command()
@click.option("--method", required=True,
              type=click.Choice([m.value for m in ApproxMethod]))
@click.option("--nu", required=True, type=float, help="fractional exponent of s**nu")
@click.option("--band", default="1e-2:1e2", show_default=True,
              help="approximation band LO:HI (continuous methods)")
@click.option("--band-unit", default="rad_s", show_default=True,
              type=click.Choice(["rad_s", "hz"]))
@click.option("--n", "order", default=5, show_default=True,
              help="zero/pole pairs (crone/matsuda), iterations (carlson), "
                   "truncation order (discrete)")
@click.option("--T", "sample_period", type=float, default=None,
              help="sample period in seconds (discrete methods)")
@click.option("--points", default=200, show_default=True, help="Bode CSV points")
@click.option("--out", default=None, help="Bode CSV path (default stdout)")
@click.option("--coeff-out", default=None, help="coefficient JSON path (default stdout)")
def approx(method, nu, band, band_unit, order, sample_period, points, out, coeff_out):
    """Approximate s**nu with one method; emit a Bode CSV and a coefficient dump."""
    lo_s, _, hi_s = band.partition(":")
    try:
        lo, hi = float(lo_s), float(hi_s)
    except ValueError:
        raise click.UsageError(f"--band expects LO:HI, got {band!r}")
    if band_unit == "hz":
        lo, hi = 2 * math.pi * lo, 2 * math.pi * hi

    m = ApproxMethod(method)
    if m is ApproxMethod.CRONE:
        tf = crone(nu, CroneConfig(lo, hi, order))
    elif m is ApproxMethod.MATSUDA:
        tf = matsuda(nu, CroneConfig(lo, hi, order))
    elif m is ApproxMethod.CARLSON:
        tf = carlson(nu, order)
    else:
        if sample_period is None:
            raise click.UsageError("discrete methods need --T")
        tf = cfe_discretize(nu, CfeConfig(sample_period, order), CfeMethod(m.value))

    if tf.domain is Domain.CONTINUOUS_S:
        f = np.geomspace(lo / (2 * math.pi), hi / (2 * math.pi), points)
    else:
        nyq = 0.5 / tf.sample_period_s
        f = np.geomspace(nyq / 1000.0, nyq * 0.9, points)
    resp = eval_response(tf, f)
    csv = _csv({
        "freq_hz": resp.freqs_hz,
        "magnitude_db": 20 * np.log10(np.abs(resp.values)),
        "phase_deg": np.degrees(np.unwrap(np.angle(resp.values))),
    })
    _write_text(out, csv)

    dump = {
        "method": method,
        "nu": nu,
        "domain": tf.domain.value,
        "num": list(tf.num.coeffs),
        "den": list(tf.den.coeffs),
        "order": tf.order,
        "poles": tf.den.degree,
    }
    if tf.sample_period_s is not None:
        dump["sample_period_s"] = tf.sample_period_s
    _write_text(coeff_out, json.dumps(dump, indent=2) + "\n")


# --- margins ----------------------------------------------------------------------


@main.command("margins")
@click.option("--session", "session_path", default=None, help=".flores session file")
@click.option("--controller", default=None, help="controller name within the session")
@click.option("--plant-file", default=None, help="plant coefficient JSON")
@click.option("--controller-file", default=None, help="controller coefficient JSON")
@click.option("--f-min", type=float, default=None, help="grid low edge in Hz")
@click.option("--f-max", type=float, default=None, help="grid high edge in Hz")
@click.option("--ppd", type=int, default=None, help="grid points per decade")
@click.option("--format", "fmt", default="json", type=click.Choice(["json", "text"]),
              show_default=True)
@click.option("--out", default=None)
def margins_cmd(session_path, controller, plant_file, controller_file,
                f_min, f_max, ppd, fmt, out):
    """Margin report for a session's controller or a plant/controller file pair."""
    if session_path:
        session = _load_session_file(session_path)
        cdef = _pick(session, controller)
        tf = assemble_controller(cdef)
        plant = resolve_plant(session.plant)
        grid = session.grid
        reqs = session.requirements
        cname = cdef.name
    elif plant_file and controller_file:
        plant_tf = tf_from_document(json.loads(Path(plant_file).read_text()), "plant")
        tf = tf_from_document(json.loads(Path(controller_file).read_text()), "controller")
        from .tfcore import PlantModel

        plant = PlantModel.from_tf(plant_tf)
        grid = FreqGrid(1e-3, 1e3, 100)
        from .analysis import Requirements

        reqs = Requirements()
        cname = controller_file
    else:
        raise click.UsageError("need --session or both --plant-file and --controller-file")

    if f_min or f_max or ppd:
        grid = FreqGrid(f_min or grid.f_min_hz, f_max or grid.f_max_hz,
                        ppd or grid.points_per_decade)
    loop = open_loop(plant, tf, grid)
    report = compute_margins(loop, reqs)

    doc = {
        "controller": cname,
        "controller_order": tf.order,
        "gain_margin_db": None if math.isinf(report.gain_margin_db) else report.gain_margin_db,
        "gm_freq_hz": report.gm_freq_hz,
        "phase_margin_deg": report.phase_margin_deg,
        "pm_freq_hz": report.pm_freq_hz,
        "modulus_margin": report.modulus_margin,
        "mm_freq_hz": report.mm_freq_hz,
        "bandwidth_hz": report.bandwidth_hz,
        "closed_loop_bw_hz": report.closed_loop_bw_hz,
        "gain_crossovers_hz": list(report.gain_crossovers_hz),
        "phase_crossovers_hz": list(report.phase_crossovers_hz),
        "flags": report.flags,
    }
    if fmt == "json":
        _write_text(out, json.dumps(doc, indent=2) + "\n")
    else:
        gm = "inf" if math.isinf(report.gain_margin_db) else f"{report.gain_margin_db:.3f}"
        pm = "-" if report.phase_margin_deg is None else f"{report.phase_margin_deg:.3f}"
        bw = "-" if report.bandwidth_hz is None else f"{report.bandwidth_hz:.6g}"
        text = (
            f"controller      : {cname} (order {tf.order})\n"
            f"gain margin     : {gm} dB\n"
            f"phase margin    : {pm} deg\n"
            f"modulus margin  : {report.modulus_margin:.6f}\n"
            f"bandwidth       : {bw} Hz\n"
        )
        flagged = {k: v for k, v in report.flags.items() if v is not None}
        for k, v in flagged.items():
            text += f"requirement {k}: {'pass' if v else 'FAIL'}\n"
        _write_text(out, text)


# --- plot data --------------------------------------------------------------------


def _plot_command(view: PlotView):
    @click.option("--session", "session_path", required=True)
    @click.option("--controller", default=None)
    @click.option("--subsystem", default="open_loop",
                  type=click.Choice([s.value for s in Subsystem]))
    @click.option("--wrap-phase", is_flag=True, default=False)
    @click.option("--f-min", type=float, default=None)
    @click.option("--f-max", type=float, default=None)
    @click.option("--ppd", type=int, default=None)
    @click.option("--out", default=None)
    def cmd(session_path, controller, subsystem, wrap_phase, f_min, f_max, ppd, out):
        session = _load_session_file(session_path)
        cdef = _pick(session, controller)
        tf = assemble_controller(cdef)
        plant = resolve_plant(session.plant)
        grid = session.grid
        if f_min or f_max or ppd:
            grid = FreqGrid(f_min or grid.f_min_hz, f_max or grid.f_max_hz,
                            ppd or grid.points_per_decade)
        series = plot_data(plant, tf, Subsystem(subsystem), view, grid, wrap_phase)
        _write_text(out, _csv(dict(zip(series.column_names, series.columns))))

    cmd.__name__ = view.value
    cmd.__doc__ = f"{view.value.capitalize()} plot data of a subsystem as CSV."
    return cmd


main.command("bode")(_plot_command(PlotView.BODE))
main.command("nyquist")(_plot_command(PlotView.NYQUIST))
main.command("nichols")(_plot_command(PlotView.NICHOLS))


# --- simulation -------------------------------------------------------------------


@main.command()
@click.option("--session", "session_path", required=True)
@click.option("--controller", default=None)
@click.option("--config", "config_path", required=True, help="SimConfig JSON file")
@click.option("--out", default=None)
def sim(session_path, controller, config_path, out):
    """Closed-loop time response as CSV (t,r,y,u[,y_nopf])."""
    session = _load_session_file(session_path)
    cdef = _pick(session, controller)
    cfg = simconfig_from_document(json.loads(Path(config_path).read_text()))
    tf = assemble_controller(cdef)
    plant = resolve_plant(session.plant)
    result = simulate(plant, tf, cdef.prefilter, cfg)
    _write_text(out, sim_result_csv(result))


# --- session manipulation -----------------------------------------------------------


@main.group("session")
def session_group() -> None:
    """Create, validate, and edit .flores session files."""


@session_group.command("new")
@click.argument("path")
@click.option("--demo", is_flag=True, default=False,
              help="seed with the demo stage plant and both demo controllers")
def session_new(path, demo):
    """Write a fresh .flores session file."""
    session = presets.demo_session() if demo else Session(plant=TfPlantSource((1.0,), (1.0,)))
    Path(path).write_text(save_session(session))
    click.echo(f"wrote {path}")


@session_group.command("validate")
@click.argument("path")
def session_validate(path):
    """Parse and validate a session file, reporting its contents."""
    session = _load_session_file(path)
    click.echo(
        f"{path}: ok ({len(session.controllers)} controller(s), "
        f"active={session.active_controller!r})"
    )


@session_group.command("set-plant")
@click.argument("path")
@click.option("--tf", "tf_spec", default=None,
              help="inline coefficients 'num;den', ascending degree, e.g. '1;0,1'")
@click.option("--frd", "frd_path", default=None, help="FRD CSV file to import")
@click.option("--example", "example_kind", default=None,
              type=click.Choice([k.value for k in ExamplePlantKind]))
@click.option("--masses", default=None, help="comma-separated kg values")
@click.option("--stiffnesses", default=None, help="comma-separated N/m values")
@click.option("--dampings", default=None, help="comma-separated N·s/m values")
def session_set_plant(path, tf_spec, frd_path, example_kind, masses, stiffnesses, dampings):
    """Replace the session's plant with a transfer function, FRD file, or example."""
    given = [x for x in (tf_spec, frd_path, example_kind) if x]
    if len(given) != 1:
        raise click.UsageError("pass exactly one of --tf, --frd, --example")
    session = _load_session_file(path)
    if tf_spec:
        num_s, _, den_s = tf_spec.partition(";")
        try:
            num = tuple(float(x) for x in num_s.split(","))
            den = tuple(float(x) for x in den_s.split(","))
        except ValueError:
            raise click.UsageError(f"--tf expects 'num;den' comma lists, got {tf_spec!r}")
        source = TfPlantSource(num, den)
    elif frd_path:
        frd = import_frd(Path(frd_path).read_text())
        source = FrdPlantSource(frd, source_file=frd_path)
    else:
        def _floats(s, flag):
            if not s:
                raise click.UsageError(f"--example needs {flag}")
            return tuple(float(x) for x in s.split(","))

        source = ExamplePlantSource(
            ExamplePlantSpec(
                ExamplePlantKind(example_kind),
                _floats(masses, "--masses"),
                _floats(stiffnesses, "--stiffnesses"),
                _floats(dampings, "--dampings"),
            )
        )
    from dataclasses import replace

    Path(path).write_text(save_session(replace(session, plant=source)))
    click.echo(f"updated plant in {path}")


@session_group.command("add-filter")
@click.argument("path")
@click.option("--controller", "cname", required=True)
@click.option("--kind", required=True, type=click.Choice([k.value for k in FilterKind]))
@click.option("--param", "params", multiple=True, help="NAME=VALUE, repeatable")
@click.option("--method", default="crone", show_default=True,
              type=click.Choice([m.value for m in ApproxMethod]))
@click.option("--approx-band", default=None, help="LO:HI in Hz")
def session_add_filter(path, cname, kind, params, method, approx_band):
    """Append a filter (the controller is created when absent)."""
    session = _load_session_file(path)
    pmap = {}
    for p in params:
        name, _, value = p.partition("=")
        try:
            pmap[name] = float(value)
        except ValueError:
            raise click.UsageError(f"--param expects NAME=VALUE, got {p!r}")
    band = None
    if approx_band:
        lo_s, _, hi_s = approx_band.partition(":")
        band = (float(lo_s), float(hi_s))
    spec = FilterSpec(FilterKind(kind), pmap, ApproxMethod(method), band)

    from dataclasses import replace

    names = [c.name for c in session.controllers]
    if cname in names:
        controllers = tuple(
            ControllerDef(c.name, c.filters + (spec,), c.prefilter) if c.name == cname else c
            for c in session.controllers
        )
    else:
        controllers = session.controllers + (ControllerDef(cname, (spec,)),)
    active = session.active_controller or cname
    Path(path).write_text(
        save_session(replace(session, controllers=controllers, active_controller=active))
    )
    click.echo(f"added {kind} filter to {cname!r} in {path}")


@session_group.command("export")
@click.argument("path")
@click.option("--controller", default=None)
@click.option("--sample-period", type=float, default=None,
              help="emit discrete coefficients at this period instead of continuous")
@click.option("--out", default=None)
def session_export(path, controller, sample_period, out):
    """Controller coefficient document (JSON)."""
    session = _load_session_file(path)
    cdef = _pick(session, controller)
    tf = assemble_controller(cdef)
    doc = export_controller(tf, cdef.filters, sample_period)
    _write_text(out, json.dumps(doc, indent=2) + "\n")


# --- service ----------------------------------------------------------------------


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True,
              envvar="FRACSHAPE_HOST", help="bind address (loopback unless overridden)")
@click.option("--port", default=8760, show_default=True, type=int,
              envvar="FRACSHAPE_PORT")
def serve(host, port):
    """Start the local JSON API (and the web UI when its build is present)."""
    import uvicorn

    from .service import app

    uvicorn.run(app, host=host, port=port, log_level="info")


def run() -> int:
    try:
        main.main(standalone_mode=False)
    except click.UsageError as exc:
        exc.show()
        return 2
    except click.ClickException as exc:
        exc.show()
        return 1
    except FracshapeError as exc:
        click.echo(f"error [{exc.name}]: {exc}", err=True)
        return 1
    except click.exceptions.Abort:
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(run())
