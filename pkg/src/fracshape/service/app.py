"""Local JSON-over-HTTP API exposing sessions, plant import, filter editing,
analysis data, and simulation.

Optimistic concurrency: every session carries a revision that increments on
each mutation; mutating requests must present the revision they are based on
(`base_revision` query parameter) and stale writes get 409. Pure reads are
deterministic functions of (session state, query params); plot data is computed
on demand and never cached across mutations.
"""
from __future__ import annotations

import math
import threading
import uuid
from dataclasses import replace
from pathlib import Path

from fastapi import FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .. import presets
from ..analysis import (
    FreqGrid,
    PlotView,
    Requirements,
    Subsystem,
    margins,
    open_loop,
    plot_data,
)
from ..errors import FracshapeError, InvalidSpec, SchemaViolation, UnknownName
from ..filters import ControllerDef, assemble_controller
from ..session import (
    FrdPlantSource,
    Session,
    TfPlantSource,
    _filter_from_doc,
    _plant_from_doc,
    export_controller,
    import_frd,
    resolve_plant,
    session_from_document,
    session_to_document,
    simconfig_from_document,
    tf_from_document,
)
from ..timesim import simulate
from . import schemas

app = FastAPI(title="fracshape", version="0.1.0")


class RevisionConflict(Exception):
    def __init__(self, current: int, got: int):
        self.current = current
        self.got = got


class _Store:
    """In-memory session store; each session mutates under its own lock."""

    def __init__(self) -> None:
        self._sessions: dict[str, tuple[Session, int]] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._global = threading.Lock()

    def create(self, session: Session) -> tuple[str, int]:
        sid = uuid.uuid4().hex[:12]
        with self._global:
            self._sessions[sid] = (session, 0)
            self._locks[sid] = threading.Lock()
        return sid, 0

    def get(self, sid: str) -> tuple[Session, int]:
        try:
            return self._sessions[sid]
        except KeyError:
            raise UnknownName(f"no session {sid!r}") from None

    def drop(self, sid: str) -> None:
        with self._global:
            if sid not in self._sessions:
                raise UnknownName(f"no session {sid!r}")
            del self._sessions[sid]
            del self._locks[sid]

    def ids(self) -> list[str]:
        return list(self._sessions)

    def mutate(self, sid: str, base_revision: int, fn) -> tuple[Session, int]:
        """Apply fn(session) -> session under the session lock, bumping revision."""
        with self._global:
            if sid not in self._locks:
                raise UnknownName(f"no session {sid!r}")
            lock = self._locks[sid]
        with lock:
            session, revision = self.get(sid)
            if base_revision != revision:
                raise RevisionConflict(revision, base_revision)
            new_session = fn(session)
            self._sessions[sid] = (new_session, revision + 1)
            return new_session, revision + 1


store = _Store()


@app.exception_handler(RequestValidationError)
async def _validation_handler(request: Request, exc: RequestValidationError):
    # schema violations respond 400 with the offending field path
    errors = [
        {"path": ".".join(str(p) for p in e["loc"]), "message": e["msg"]}
        for e in exc.errors()
    ]
    return JSONResponse(status_code=400, content={"error": "SchemaViolation", "detail": errors})


@app.exception_handler(FracshapeError)
async def _domain_handler(request: Request, exc: FracshapeError):
    if isinstance(exc, UnknownName):
        return JSONResponse(status_code=404, content={"error": exc.name, "detail": str(exc)})
    if isinstance(exc, SchemaViolation):
        return JSONResponse(status_code=400, content={"error": exc.name, "detail": str(exc)})
    return JSONResponse(status_code=422, content={"error": exc.name, "detail": str(exc)})


@app.exception_handler(RevisionConflict)
async def _conflict_handler(request: Request, exc: RevisionConflict):
    return JSONResponse(
        status_code=409,
        content={
            "error": "RevisionConflict",
            "detail": f"session is at revision {exc.current}, request based on {exc.got}",
        },
    )


def _default_session() -> Session:
    return Session(plant=TfPlantSource((1.0,), (1.0,)))


def _envelope(sid: str, revision: int) -> dict:
    return {"session_id": sid, "revision": revision}


# --- session lifecycle -------------------------------------------------------------


@app.post("/api/v1/sessions", response_model=schemas.SessionStateResponse)
def create_session(body: schemas.CreateSessionRequest | None = None):
    body = body or schemas.CreateSessionRequest()
    if body.document is not None:
        session = session_from_document(body.document)
    elif body.demo:
        session = presets.demo_session()
    else:
        session = _default_session()
    sid, rev = store.create(session)
    return {**_envelope(sid, rev), "document": session_to_document(session)}


@app.get("/api/v1/sessions")
def list_sessions():
    return {"sessions": [{"session_id": s, "revision": store.get(s)[1]} for s in store.ids()]}


@app.get("/api/v1/sessions/{sid}", response_model=schemas.SessionStateResponse)
def get_session(sid: str):
    session, rev = store.get(sid)
    return {**_envelope(sid, rev), "document": session_to_document(session)}


@app.get("/api/v1/sessions/{sid}/document")
def get_document(sid: str):
    """The saveable `.flores` document (revision travels in a header so the
    body stays a valid session file)."""
    session, rev = store.get(sid)
    return JSONResponse(
        content=session_to_document(session),
        headers={"x-session-revision": str(rev)},
    )


@app.delete("/api/v1/sessions/{sid}")
def delete_session(sid: str):
    store.drop(sid)
    return {"deleted": sid}


# --- plant / grid / requirements ----------------------------------------------------


@app.put("/api/v1/sessions/{sid}/plant", response_model=schemas.SessionEnvelope)
def set_plant(sid: str, body: schemas.PlantRequest, base_revision: int = Query(...)):
    source = _plant_from_doc(body.plant)
    resolve_plant(source)  # validate eagerly
    _, rev = store.mutate(sid, base_revision, lambda s: replace(s, plant=source))
    return _envelope(sid, rev)


@app.put("/api/v1/sessions/{sid}/plant/frd-csv", response_model=schemas.SessionEnvelope)
async def set_plant_frd_csv(
    sid: str,
    request: Request,
    base_revision: int = Query(...),
    source_file: str | None = None,
):
    """Upload a raw FRD CSV table; parsing happens server-side."""
    text = (await request.body()).decode("utf-8")
    frd = import_frd(text)
    source = FrdPlantSource(frd, source_file)
    _, rev = store.mutate(sid, base_revision, lambda s: replace(s, plant=source))
    return _envelope(sid, rev)


@app.put("/api/v1/sessions/{sid}/grid", response_model=schemas.SessionEnvelope)
def set_grid(sid: str, body: schemas.GridRequest, base_revision: int = Query(...)):
    grid = FreqGrid(body.f_min_hz, body.f_max_hz, body.points_per_decade)
    _, rev = store.mutate(sid, base_revision, lambda s: replace(s, grid=grid))
    return _envelope(sid, rev)


@app.put("/api/v1/sessions/{sid}/requirements", response_model=schemas.SessionEnvelope)
def set_requirements(
    sid: str, body: schemas.RequirementsRequest, base_revision: int = Query(...)
):
    reqs = Requirements(body.min_gm_db, body.min_pm_deg, body.min_mm, body.bw_range_hz)
    _, rev = store.mutate(sid, base_revision, lambda s: replace(s, requirements=reqs))
    return _envelope(sid, rev)


@app.put("/api/v1/sessions/{sid}/active-controller", response_model=schemas.SessionEnvelope)
def set_active_controller(
    sid: str, body: schemas.ActiveControllerRequest, base_revision: int = Query(...)
):
    def fn(s: Session) -> Session:
        s.controller(body.name)  # raises UnknownName
        return replace(s, active_controller=body.name)

    _, rev = store.mutate(sid, base_revision, fn)
    return _envelope(sid, rev)


# --- controller / filter CRUD ---------------------------------------------------------


@app.post("/api/v1/sessions/{sid}/controllers", response_model=schemas.SessionEnvelope)
def add_controller(
    sid: str, body: schemas.ControllerCreateRequest, base_revision: int = Query(...)
):
    def fn(s: Session) -> Session:
        if any(c.name == body.name for c in s.controllers):
            raise InvalidSpec(f"controller {body.name!r} already exists")
        active = s.active_controller or body.name
        return replace(
            s,
            controllers=s.controllers + (ControllerDef(body.name),),
            active_controller=active,
        )

    _, rev = store.mutate(sid, base_revision, fn)
    return _envelope(sid, rev)


@app.delete("/api/v1/sessions/{sid}/controllers/{name}", response_model=schemas.SessionEnvelope)
def delete_controller(sid: str, name: str, base_revision: int = Query(...)):
    def fn(s: Session) -> Session:
        s.controller(name)
        remaining = tuple(c for c in s.controllers if c.name != name)
        active = s.active_controller
        if active == name:
            active = remaining[0].name if remaining else None
        return replace(s, controllers=remaining, active_controller=active)

    _, rev = store.mutate(sid, base_revision, fn)
    return _envelope(sid, rev)


def _replace_controller(s: Session, name: str, new: ControllerDef) -> Session:
    s.controller(name)
    return replace(
        s, controllers=tuple(new if c.name == name else c for c in s.controllers)
    )


@app.post(
    "/api/v1/sessions/{sid}/controllers/{name}/filters",
    response_model=schemas.SessionEnvelope,
)
def append_filter(
    sid: str, name: str, body: schemas.FilterRequest, base_revision: int = Query(...)
):
    spec = _filter_from_doc(body.filter, "filter")

    def fn(s: Session) -> Session:
        c = s.controller(name)
        return _replace_controller(
            s, name, ControllerDef(c.name, c.filters + (spec,), c.prefilter)
        )

    _, rev = store.mutate(sid, base_revision, fn)
    return _envelope(sid, rev)


@app.put(
    "/api/v1/sessions/{sid}/controllers/{name}/filters",
    response_model=schemas.SessionEnvelope,
)
def set_filters(
    sid: str, name: str, body: schemas.FilterListRequest, base_revision: int = Query(...)
):
    specs = tuple(
        _filter_from_doc(doc, f"filters[{i}]") for i, doc in enumerate(body.filters)
    )

    def fn(s: Session) -> Session:
        c = s.controller(name)
        return _replace_controller(s, name, ControllerDef(c.name, specs, c.prefilter))

    _, rev = store.mutate(sid, base_revision, fn)
    return _envelope(sid, rev)


@app.put(
    "/api/v1/sessions/{sid}/controllers/{name}/filters/{index}",
    response_model=schemas.SessionEnvelope,
)
def replace_filter(
    sid: str,
    name: str,
    index: int,
    body: schemas.FilterRequest,
    base_revision: int = Query(...),
):
    spec = _filter_from_doc(body.filter, "filter")

    def fn(s: Session) -> Session:
        c = s.controller(name)
        if not (0 <= index < len(c.filters)):
            raise UnknownName(f"no filter index {index}")
        fs = list(c.filters)
        fs[index] = spec
        return _replace_controller(s, name, ControllerDef(c.name, tuple(fs), c.prefilter))

    _, rev = store.mutate(sid, base_revision, fn)
    return _envelope(sid, rev)


@app.delete(
    "/api/v1/sessions/{sid}/controllers/{name}/filters/{index}",
    response_model=schemas.SessionEnvelope,
)
def delete_filter(sid: str, name: str, index: int, base_revision: int = Query(...)):
    def fn(s: Session) -> Session:
        c = s.controller(name)
        if not (0 <= index < len(c.filters)):
            raise UnknownName(f"no filter index {index}")
        fs = list(c.filters)
        del fs[index]
        return _replace_controller(s, name, ControllerDef(c.name, tuple(fs), c.prefilter))

    _, rev = store.mutate(sid, base_revision, fn)
    return _envelope(sid, rev)


@app.put(
    "/api/v1/sessions/{sid}/controllers/{name}/prefilter",
    response_model=schemas.SessionEnvelope,
)
def set_prefilter(
    sid: str, name: str, body: schemas.PrefilterRequest, base_revision: int = Query(...)
):
    pf = tf_from_document(body.prefilter, "prefilter")

    def fn(s: Session) -> Session:
        c = s.controller(name)
        return _replace_controller(s, name, ControllerDef(c.name, c.filters, pf))

    _, rev = store.mutate(sid, base_revision, fn)
    return _envelope(sid, rev)


# --- analysis reads ---------------------------------------------------------------------


def _pick_controller(session: Session, name: str | None) -> ControllerDef:
    if name:
        return session.controller(name)
    if session.active_controller:
        return session.controller(session.active_controller)
    raise UnknownName("session has no active controller")


@app.get("/api/v1/sessions/{sid}/margins", response_model=schemas.MarginsResponse)
def get_margins(sid: str, controller: str | None = None):
    session, rev = store.get(sid)
    cdef = _pick_controller(session, controller)
    tf = assemble_controller(cdef)
    plant = resolve_plant(session.plant)
    loop = open_loop(plant, tf, session.grid)
    report = margins(loop, session.requirements)
    gm = report.gain_margin_db
    return {
        **_envelope(sid, rev),
        "controller": cdef.name,
        "controller_order": tf.order,
        "gain_margin_db": None if math.isinf(gm) else gm,
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


@app.get("/api/v1/sessions/{sid}/plot", response_model=schemas.PlotResponse)
def get_plot(
    sid: str,
    subsystem: str = Query("open_loop"),
    view: str = Query("bode"),
    controller: str | None = None,
    wrap_phase: bool = False,
    f_min_hz: float | None = None,
    f_max_hz: float | None = None,
    points_per_decade: int | None = None,
):
    session, rev = store.get(sid)
    cdef = _pick_controller(session, controller)
    tf = assemble_controller(cdef)
    plant = resolve_plant(session.plant)
    grid = session.grid
    if f_min_hz is not None or f_max_hz is not None or points_per_decade is not None:
        grid = FreqGrid(
            f_min_hz if f_min_hz is not None else grid.f_min_hz,
            f_max_hz if f_max_hz is not None else grid.f_max_hz,
            points_per_decade if points_per_decade is not None else grid.points_per_decade,
        )
    try:
        sub = Subsystem(subsystem)
    except ValueError:
        raise SchemaViolation("subsystem", f"unknown subsystem {subsystem!r}") from None
    try:
        vw = PlotView(view)
    except ValueError:
        raise SchemaViolation("view", f"unknown view {view!r}") from None
    series = plot_data(plant, tf, sub, vw, grid, wrap_phase)
    return {
        **_envelope(sid, rev),
        "subsystem": sub.value,
        "view": vw.value,
        "controller": cdef.name,
        "controller_order": tf.order,
        "column_names": list(series.column_names),
        "columns": series.as_dict(),
    }


@app.post("/api/v1/sessions/{sid}/simulate", response_model=schemas.SimulateResponse)
def post_simulate(sid: str, body: schemas.SimulateRequest):
    session, rev = store.get(sid)
    cdef = _pick_controller(session, body.controller)
    cfg = simconfig_from_document(body.config)
    tf = assemble_controller(cdef)
    plant = resolve_plant(session.plant)
    result = simulate(plant, tf, cdef.prefilter, cfg)
    return {
        **_envelope(sid, rev),
        "time_s": result.time_s.tolist(),
        "reference": result.reference.tolist(),
        "output": result.output.tolist(),
        "control_effort": result.control_effort.tolist(),
        "output_no_prefilter": (
            result.output_no_prefilter.tolist()
            if result.output_no_prefilter is not None
            else None
        ),
        "diverged": result.diverged,
        "diverged_at_index": result.diverged_at_index,
        "seeds": result.seeds,
    }


@app.get(
    "/api/v1/sessions/{sid}/controllers/{name}/export",
    response_model=schemas.ExportResponse,
)
def get_export(sid: str, name: str, sample_period_s: float | None = None):
    session, rev = store.get(sid)
    cdef = session.controller(name)
    tf = assemble_controller(cdef)
    doc = export_controller(tf, cdef.filters, sample_period_s)
    return {**_envelope(sid, rev), "controller": cdef.name, "export": doc}


# --- static UI (if built) ----------------------------------------------------------------

_UI_DIR = Path(__file__).resolve().parents[3] / "frontend" / "dist"
if _UI_DIR.is_dir():  # pragma: no cover - depends on frontend build
    app.mount("/", StaticFiles(directory=str(_UI_DIR), html=True), name="ui")
