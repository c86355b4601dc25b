"""Design-session persistence, FRD import/export, example plants, and
controller coefficient export.

Session documents are JSON-compatible dicts saved with the `.flores` extension;
numbers round-trip bit-exactly (shortest-repr float serialization). The FRD file
format is UTF-8 CSV with a one-line header choosing exactly one column schema:
`freq_hz,re,im` or `freq_hz,mag_db,phase_deg`; `#` comment lines are allowed.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .analysis import FreqGrid, Requirements
from .errors import (
    ImproperTransferFunction,
    MalformedRow,
    MixedColumnSchemas,
    NonMonotoneFrequencies,
    SchemaViolation,
    UnknownName,
    VersionUnsupported,
)
from .filters import ApproxMethod, ControllerDef, FilterKind, FilterSpec
from .tfcore import Domain, FrdData, PlantModel, RationalTF
from . import timesim

__all__ = [
    "FORMAT_VERSION",
    "ExamplePlantKind",
    "ExamplePlantSpec",
    "TfPlantSource",
    "FrdPlantSource",
    "ExamplePlantSource",
    "Session",
    "make_example_plant",
    "resolve_plant",
    "save_session",
    "load_session",
    "session_to_document",
    "session_from_document",
    "import_frd",
    "serialize_frd",
    "export_controller",
    "tf_from_document",
]

FORMAT_VERSION = 1


class ExamplePlantKind(enum.Enum):
    MASS_SPRING_DAMPER = "mass_spring_damper"
    DOUBLE_MASS_SPRING = "double_mass_spring"
    DOUBLE_MASS_SPRING_COLLOCATED = "double_mass_spring_collocated"


@dataclass(frozen=True)
class ExamplePlantSpec:
    """Parametric demo plant. Double kinds are a grounded two-mass chain
    (ground - k1,c1 - m1 - k2,c2 - m2) with force applied at m1; the collocated
    variant measures x1 (driven mass), the plain variant measures x2."""

    kind: ExamplePlantKind
    masses_kg: tuple[float, ...]
    stiffnesses_n_per_m: tuple[float, ...]
    dampings_ns_per_m: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "masses_kg", tuple(float(x) for x in self.masses_kg))
        object.__setattr__(
            self, "stiffnesses_n_per_m", tuple(float(x) for x in self.stiffnesses_n_per_m)
        )
        object.__setattr__(
            self, "dampings_ns_per_m", tuple(float(x) for x in self.dampings_ns_per_m)
        )
        want = 1 if self.kind is ExamplePlantKind.MASS_SPRING_DAMPER else 2
        for name, vals in (
            ("masses_kg", self.masses_kg),
            ("stiffnesses_n_per_m", self.stiffnesses_n_per_m),
            ("dampings_ns_per_m", self.dampings_ns_per_m),
        ):
            if len(vals) != want:
                raise ValueError(f"{self.kind.value} needs {want} {name} value(s)")
            if any(not (v > 0 and math.isfinite(v)) for v in vals):
                raise ValueError(f"{name} must be positive and finite")


def make_example_plant(spec: ExamplePlantSpec) -> RationalTF:
    """Force-to-position transfer function of the selected mechanical example."""
    if spec.kind is ExamplePlantKind.MASS_SPRING_DAMPER:
        (m,) = spec.masses_kg
        (k,) = spec.stiffnesses_n_per_m
        (c,) = spec.dampings_ns_per_m
        return RationalTF.from_coeffs([1.0], [k, c, m])
    m1, m2 = spec.masses_kg
    k1, k2 = spec.stiffnesses_n_per_m
    c1, c2 = spec.dampings_ns_per_m
    # X1 (m1 s^2 + c1 s + k1 + c2 s + k2) - X2 (c2 s + k2) = F
    # X2 (m2 s^2 + c2 s + k2) = X1 (c2 s + k2)
    d2 = np.array([k2, c2, m2])
    kc = np.array([k2, c2])
    a = np.array([k1 + k2, c1 + c2, m1])
    den = _padd(np.convolve(a, d2), -np.convolve(kc, kc))
    num = d2 if spec.kind is ExamplePlantKind.DOUBLE_MASS_SPRING_COLLOCATED else kc
    return RationalTF.from_coeffs(num, den)


def _padd(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = max(len(a), len(b))
    out = np.zeros(n)
    out[: len(a)] += a
    out[: len(b)] += b
    return out


# --- plant sources ---------------------------------------------------------------


@dataclass(frozen=True)
class TfPlantSource:
    num: tuple[float, ...]
    den: tuple[float, ...]
    sample_period_s: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "num", tuple(float(x) for x in self.num))
        object.__setattr__(self, "den", tuple(float(x) for x in self.den))


@dataclass(frozen=True)
class FrdPlantSource:
    frd: FrdData
    source_file: str | None = None


@dataclass(frozen=True)
class ExamplePlantSource:
    spec: ExamplePlantSpec


PlantSource = TfPlantSource | FrdPlantSource | ExamplePlantSource


def resolve_plant(source: PlantSource) -> PlantModel:
    if isinstance(source, TfPlantSource):
        domain = Domain.DISCRETE_Z if source.sample_period_s else Domain.CONTINUOUS_S
        return PlantModel.from_tf(
            RationalTF.from_coeffs(source.num, source.den, domain, source.sample_period_s)
        )
    if isinstance(source, FrdPlantSource):
        return PlantModel.from_frd(source.frd)
    return PlantModel.from_tf(make_example_plant(source.spec))


# --- session ----------------------------------------------------------------------


@dataclass(frozen=True)
class Session:
    """Plant + ordered controllers + requirements + view grid: the persisted
    design document."""

    plant: PlantSource
    controllers: tuple[ControllerDef, ...] = ()
    requirements: Requirements = field(default_factory=Requirements)
    grid: FreqGrid = field(default_factory=lambda: FreqGrid(0.01, 10000.0, 100))
    active_controller: str | None = None
    format_version: int = FORMAT_VERSION

    def __post_init__(self):
        object.__setattr__(self, "controllers", tuple(self.controllers))
        names = [c.name for c in self.controllers]
        if len(set(names)) != len(names):
            raise ValueError("controller names must be unique")
        if self.active_controller is not None and self.active_controller not in names:
            raise UnknownName(f"active controller {self.active_controller!r} not defined")

    def controller(self, name: str) -> ControllerDef:
        for c in self.controllers:
            if c.name == name:
                return c
        raise UnknownName(f"no controller named {name!r}")


# --- document (de)serialization -----------------------------------------------------


def _tf_doc(tf: RationalTF) -> dict:
    doc = {
        "num": list(tf.num.coeffs),
        "den": list(tf.den.coeffs),
        "domain": tf.domain.value,
    }
    if tf.sample_period_s is not None:
        doc["sample_period_s"] = tf.sample_period_s
    return doc


def tf_from_document(doc: dict, path: str = "tf") -> RationalTF:
    num = _expect(doc, "num", list, path)
    den = _expect(doc, "den", list, path)
    domain = doc.get("domain", "s")
    if domain not in ("s", "z"):
        raise SchemaViolation(f"{path}.domain", f"unknown domain {domain!r}")
    ts = doc.get("sample_period_s")
    try:
        return RationalTF.from_coeffs(
            num, den, Domain(domain), float(ts) if ts is not None else None
        )
    except (TypeError, ValueError) as exc:
        raise SchemaViolation(path, str(exc)) from None


def _filter_doc(spec: FilterSpec) -> dict:
    doc = {"kind": spec.kind.value, "params": dict(spec.params)}
    if spec.kind.value.startswith("frac"):
        doc["approx_method"] = spec.approx_method.value
    if spec.approx_band_hz is not None:
        doc["approx_band_hz"] = list(spec.approx_band_hz)
    return doc


def _filter_from_doc(doc: dict, path: str) -> FilterSpec:
    kind_s = _expect(doc, "kind", str, path)
    try:
        kind = FilterKind(kind_s)
    except ValueError:
        raise SchemaViolation(f"{path}.kind", f"unknown filter kind {kind_s!r}") from None
    params = _expect(doc, "params", dict, path)
    method_s = doc.get("approx_method", "crone")
    try:
        method = ApproxMethod(method_s)
    except ValueError:
        raise SchemaViolation(
            f"{path}.approx_method", f"unknown method {method_s!r}"
        ) from None
    band = doc.get("approx_band_hz")
    try:
        return FilterSpec(
            kind,
            {str(k): float(v) for k, v in params.items()},
            method,
            tuple(float(b) for b in band) if band is not None else None,
        )
    except Exception as exc:
        raise SchemaViolation(path, str(exc)) from None


def _plant_doc(source: PlantSource) -> dict:
    if isinstance(source, TfPlantSource):
        doc = {"type": "tf", "num": list(source.num), "den": list(source.den)}
        if source.sample_period_s is not None:
            doc["sample_period_s"] = source.sample_period_s
        return doc
    if isinstance(source, FrdPlantSource):
        doc = {
            "type": "frd",
            "freqs_hz": list(source.frd.freqs_hz),
            "re": [v.real for v in source.frd.values],
            "im": [v.imag for v in source.frd.values],
        }
        if source.source_file:
            doc["source_file"] = source.source_file
        return doc
    spec = source.spec
    return {
        "type": "example",
        "kind": spec.kind.value,
        "masses_kg": list(spec.masses_kg),
        "stiffnesses_n_per_m": list(spec.stiffnesses_n_per_m),
        "dampings_ns_per_m": list(spec.dampings_ns_per_m),
    }


def _plant_from_doc(doc: dict, path: str = "plant") -> PlantSource:
    kind = _expect(doc, "type", str, path)
    if kind == "tf":
        ts = doc.get("sample_period_s")
        return TfPlantSource(
            tuple(_expect(doc, "num", list, path)),
            tuple(_expect(doc, "den", list, path)),
            float(ts) if ts is not None else None,
        )
    if kind == "frd":
        freqs = _expect(doc, "freqs_hz", list, path)
        re = _expect(doc, "re", list, path)
        im = _expect(doc, "im", list, path)
        if not (len(freqs) == len(re) == len(im)):
            raise SchemaViolation(f"{path}.freqs_hz", "column lengths differ")
        try:
            frd = FrdData(freqs, [complex(a, b) for a, b in zip(re, im)])
        except ValueError as exc:
            raise SchemaViolation(f"{path}.freqs_hz", str(exc)) from None
        return FrdPlantSource(frd, doc.get("source_file"))
    if kind == "example":
        try:
            spec = ExamplePlantSpec(
                ExamplePlantKind(_expect(doc, "kind", str, path)),
                tuple(_expect(doc, "masses_kg", list, path)),
                tuple(_expect(doc, "stiffnesses_n_per_m", list, path)),
                tuple(_expect(doc, "dampings_ns_per_m", list, path)),
            )
        except ValueError as exc:
            raise SchemaViolation(path, str(exc)) from None
        return ExamplePlantSource(spec)
    raise SchemaViolation(f"{path}.type", f"unknown plant type {kind!r}")


def _expect(doc: dict, key: str, typ, path: str):
    if key not in doc:
        raise SchemaViolation(f"{path}.{key}", "missing")
    val = doc[key]
    if not isinstance(val, typ):
        names = (
            "/".join(t.__name__ for t in typ) if isinstance(typ, tuple) else typ.__name__
        )
        raise SchemaViolation(f"{path}.{key}", f"expected {names}")
    return val


def session_to_document(s: Session) -> dict:
    controllers = []
    for c in s.controllers:
        cdoc = {"name": c.name, "filters": [_filter_doc(fs) for fs in c.filters]}
        if c.prefilter is not None:
            cdoc["prefilter"] = _tf_doc(c.prefilter)
        controllers.append(cdoc)
    reqs = {}
    if s.requirements.min_gm_db is not None:
        reqs["min_gm_db"] = s.requirements.min_gm_db
    if s.requirements.min_pm_deg is not None:
        reqs["min_pm_deg"] = s.requirements.min_pm_deg
    if s.requirements.min_mm is not None:
        reqs["min_mm"] = s.requirements.min_mm
    if s.requirements.bw_range_hz is not None:
        reqs["bw_range_hz"] = list(s.requirements.bw_range_hz)
    return {
        "format_version": s.format_version,
        "plant": _plant_doc(s.plant),
        "controllers": controllers,
        "requirements": reqs,
        "grid": {
            "f_min_hz": s.grid.f_min_hz,
            "f_max_hz": s.grid.f_max_hz,
            "points_per_decade": s.grid.points_per_decade,
        },
        "active_controller": s.active_controller,
    }


def session_from_document(doc: dict) -> Session:
    if not isinstance(doc, dict):
        raise SchemaViolation("$", "document must be an object")
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise VersionUnsupported(f"format_version {version!r} (supported: {FORMAT_VERSION})")
    plant = _plant_from_doc(_expect(doc, "plant", dict, "$"))
    controllers = []
    for i, cdoc in enumerate(doc.get("controllers", [])):
        path = f"controllers[{i}]"
        name = _expect(cdoc, "name", str, path)
        filters = [
            _filter_from_doc(fdoc, f"{path}.filters[{j}]")
            for j, fdoc in enumerate(cdoc.get("filters", []))
        ]
        pf = cdoc.get("prefilter")
        prefilter = tf_from_document(pf, f"{path}.prefilter") if pf else None
        controllers.append(ControllerDef(name, filters, prefilter))
    rdoc = doc.get("requirements", {}) or {}
    bw = rdoc.get("bw_range_hz")
    try:
        reqs = Requirements(
            rdoc.get("min_gm_db"),
            rdoc.get("min_pm_deg"),
            rdoc.get("min_mm"),
            tuple(bw) if bw is not None else None,
        )
    except ValueError as exc:
        raise SchemaViolation("requirements", str(exc)) from None
    gdoc = doc.get("grid") or {}
    try:
        grid = FreqGrid(
            float(gdoc.get("f_min_hz", 0.01)),
            float(gdoc.get("f_max_hz", 10000.0)),
            int(gdoc.get("points_per_decade", 100)),
        )
    except ValueError as exc:
        raise SchemaViolation("grid", str(exc)) from None
    try:
        return Session(plant, tuple(controllers), reqs, grid, doc.get("active_controller"))
    except (ValueError, UnknownName) as exc:
        raise SchemaViolation("$", str(exc)) from None


def save_session(s: Session) -> str:
    """Serialize to the `.flores` JSON text (lossless float round-trip)."""
    return json.dumps(session_to_document(s), indent=2) + "\n"


def load_session(text: str) -> Session:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaViolation("$", f"not valid JSON: {exc}") from None
    return session_from_document(doc)


# --- FRD CSV ------------------------------------------------------------------------

_SCHEMAS = {
    ("freq_hz", "re", "im"): "cartesian",
    ("freq_hz", "mag_db", "phase_deg"): "polar",
}


def import_frd(text: str) -> FrdData:
    """Parse an FRD CSV table (see module docstring for the two schemas)."""
    freqs: list[float] = []
    values: list[complex] = []
    schema = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        cells = [c.strip() for c in line.split(",")]
        if schema is None:
            header = tuple(c.lower() for c in cells)
            if header not in _SCHEMAS:
                raise MixedColumnSchemas(
                    f"header must be exactly one of "
                    f"{[','.join(h) for h in _SCHEMAS]}, got {','.join(header)!r}"
                )
            schema = _SCHEMAS[header]
            continue
        if len(cells) != 3:
            raise MalformedRow(f"expected 3 columns, got {len(cells)}", lineno)
        try:
            a, b, c = (float(x) for x in cells)
        except ValueError:
            raise MalformedRow(f"non-numeric cell in {line!r}", lineno) from None
        if schema == "cartesian":
            val = complex(b, c)
        else:
            mag = 10.0 ** (b / 20.0)
            val = mag * complex(math.cos(math.radians(c)), math.sin(math.radians(c)))
        freqs.append(a)
        values.append(val)
    if schema is None:
        raise MixedColumnSchemas("missing header line")
    if any(b <= a for a, b in zip(freqs, freqs[1:])):
        raise NonMonotoneFrequencies("freq_hz must be strictly increasing")
    try:
        return FrdData(freqs, values)
    except ValueError as exc:
        raise MalformedRow(str(exc), 1) from None


def serialize_frd(frd: FrdData, schema: str = "cartesian") -> str:
    """Inverse of import_frd; `cartesian` round-trips bit-exactly."""
    lines = []
    if schema == "cartesian":
        lines.append("freq_hz,re,im")
        for f, v in zip(frd.freqs_hz, frd.values):
            lines.append(f"{f!r},{v.real!r},{v.imag!r}")
    elif schema == "polar":
        lines.append("freq_hz,mag_db,phase_deg")
        for f, v in zip(frd.freqs_hz, frd.values):
            mag_db = 20.0 * math.log10(abs(v))
            phase = math.degrees(math.atan2(v.imag, v.real))
            lines.append(f"{f!r},{mag_db!r},{phase!r}")
    else:
        raise ValueError(f"unknown schema {schema!r}")
    return "\n".join(lines) + "\n"


# --- simulation config document -------------------------------------------------------


def _signal_from_doc(doc: dict, path: str) -> timesim.SignalSpec:
    shape_s = _expect(doc, "shape", str, path)
    try:
        shape = timesim.SignalShape(shape_s)
    except ValueError:
        raise SchemaViolation(f"{path}.shape", f"unknown shape {shape_s!r}") from None
    try:
        return timesim.SignalSpec(
            shape=shape,
            amplitude=float(doc.get("amplitude", 1.0)),
            frequency_hz=_opt_float(doc, "frequency_hz"),
            std_dev=_opt_float(doc, "std_dev"),
            seed=int(doc["seed"]) if doc.get("seed") is not None else None,
            start_time_s=float(doc.get("start_time_s", 0.0)),
        )
    except Exception as exc:
        raise SchemaViolation(path, str(exc)) from None


def _signal_doc(spec: timesim.SignalSpec) -> dict:
    doc: dict = {"shape": spec.shape.value, "amplitude": spec.amplitude}
    if spec.frequency_hz is not None:
        doc["frequency_hz"] = spec.frequency_hz
    if spec.std_dev is not None:
        doc["std_dev"] = spec.std_dev
    if spec.seed is not None:
        doc["seed"] = spec.seed
    if spec.start_time_s:
        doc["start_time_s"] = spec.start_time_s
    return doc


def _opt_float(doc: dict, key: str) -> float | None:
    v = doc.get(key)
    return float(v) if v is not None else None


def simconfig_from_document(doc: dict) -> timesim.SimConfig:
    if not isinstance(doc, dict):
        raise SchemaViolation("$", "simulation config must be an object")
    ref = _expect(doc, "reference", dict, "$")
    dist = doc.get("disturbance")
    noise = doc.get("noise")
    try:
        return timesim.SimConfig(
            duration_s=float(_expect(doc, "duration_s", (int, float), "$")),
            sample_period_s=float(_expect(doc, "sample_period_s", (int, float), "$")),
            reference=_signal_from_doc(ref, "reference"),
            disturbance=_signal_from_doc(dist, "disturbance") if dist else None,
            noise=_signal_from_doc(noise, "noise") if noise else None,
            use_prefilter=bool(doc.get("use_prefilter", False)),
        )
    except SchemaViolation:
        raise
    except Exception as exc:
        raise SchemaViolation("$", str(exc)) from None


def simconfig_to_document(cfg: timesim.SimConfig) -> dict:
    doc: dict = {
        "duration_s": cfg.duration_s,
        "sample_period_s": cfg.sample_period_s,
        "reference": _signal_doc(cfg.reference),
        "use_prefilter": cfg.use_prefilter,
    }
    if cfg.disturbance is not None:
        doc["disturbance"] = _signal_doc(cfg.disturbance)
    if cfg.noise is not None:
        doc["noise"] = _signal_doc(cfg.noise)
    return doc


# --- controller export ----------------------------------------------------------------


def export_controller(
    controller: RationalTF,
    filters: tuple[FilterSpec, ...] = (),
    sample_period_s: float | None = None,
) -> dict:
    """Coefficient document for implementation elsewhere (ascending-degree arrays,
    domain tag, generating filter list for traceability). Passing a sample period
    exports the bilinear discretization instead of the continuous coefficients."""
    tf = controller
    if sample_period_s is not None and controller.domain is Domain.CONTINUOUS_S:
        tf = timesim.discretize(controller, sample_period_s)
    elif sample_period_s is not None:
        if not controller.is_proper:
            raise ImproperTransferFunction("discrete export needs a proper function")
    doc = _tf_doc(tf)
    doc["order"] = tf.order
    doc["filters"] = [_filter_doc(fs) for fs in filters]
    return doc
