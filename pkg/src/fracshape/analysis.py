"""Open-loop composition, stability margins, bandwidth, requirement checking,
and Bode/Nyquist/Nichols plot-series generation.

Margins are computed from the sampled loop response with crossover refinement by
bisection on the log-frequency interpolant of the samples (measured plants have
no analytic form, so refinement never re-evaluates the underlying system).
Stability verdicts are deliberately not issued; margins are reported raw.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientGrid
from .tfcore import (
    FreqResponse,
    PlantModel,
    RationalTF,
    SensitivityKind,
    eval_response,
    interp_frd,
    sensitivity,
)

__all__ = [
    "FreqGrid",
    "Requirements",
    "MarginReport",
    "Subsystem",
    "PlotView",
    "PlotSeries",
    "open_loop",
    "margins",
    "plot_data",
]

#: relative frequency tolerance of crossover bisection
_REFINE_RTOL = 1e-6


@dataclass(frozen=True)
class FreqGrid:
    """Logarithmic frequency grid in Hz."""

    f_min_hz: float
    f_max_hz: float
    points_per_decade: int = 100

    def __post_init__(self):
        if not (0 < self.f_min_hz < self.f_max_hz):
            raise ValueError("need 0 < f_min < f_max")
        if not (10 <= self.points_per_decade <= 1000):
            raise ValueError("points_per_decade must be in 10..1000")

    def clamped_to(self, lo_hz: float, hi_hz: float) -> "FreqGrid":
        """Restrict to the intersection with [lo, hi] (measured-plant ranges)."""
        lo = max(self.f_min_hz, lo_hz)
        hi = min(self.f_max_hz, hi_hz)
        if not lo < hi:
            lo, hi = lo_hz, hi_hz
        return FreqGrid(lo, hi, self.points_per_decade)

    def frequencies(self) -> np.ndarray:
        decades = math.log10(self.f_max_hz / self.f_min_hz)
        n = max(2, int(round(decades * self.points_per_decade)) + 1)
        return np.geomspace(self.f_min_hz, self.f_max_hz, n)


@dataclass(frozen=True)
class Requirements:
    """Optional performance requirements; absent entries are not evaluated."""

    min_gm_db: float | None = None
    min_pm_deg: float | None = None
    min_mm: float | None = None
    bw_range_hz: tuple[float, float] | None = None

    def __post_init__(self):
        for name in ("min_gm_db", "min_pm_deg", "min_mm"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ValueError(f"{name} must be positive")
        if self.bw_range_hz is not None:
            lo, hi = self.bw_range_hz
            if not (0 < lo < hi):
                raise ValueError("bw_range_hz must be an increasing positive pair")


@dataclass(frozen=True)
class MarginReport:
    """Gain/phase/modulus margins, crossover frequencies, bandwidth, and
    requirement pass/fail flags (True pass, False fail, None not evaluated)."""

    gain_margin_db: float          # +inf when no phase crossover exists
    gm_freq_hz: float | None
    phase_margin_deg: float | None
    pm_freq_hz: float | None
    modulus_margin: float
    mm_freq_hz: float
    bandwidth_hz: float | None
    closed_loop_bw_hz: float | None
    gain_crossovers_hz: tuple[float, ...]
    phase_crossovers_hz: tuple[float, ...]
    flags: dict[str, bool | None] = field(default_factory=dict)


def open_loop(plant: PlantModel, controller: RationalTF, grid: FreqGrid) -> FreqResponse:
    """Pointwise product C(jw) * P(jw) on the grid (clamped to the measured range
    for FRD plants, which set their visible range automatically)."""
    if plant.is_frd:
        grid = grid.clamped_to(plant.frd.f_min_hz, plant.frd.f_max_hz)
    f = grid.frequencies()
    p = eval_response(plant, f).values
    c = eval_response(controller, f).values
    return FreqResponse(f, p * c)


# --- margin machinery -----------------------------------------------------------


def _interp_at(loop: FreqResponse, f: float) -> complex:
    return complex(interp_frd(loop.freqs_hz, loop.values, np.array([f]))[0])


def _bisect(loop: FreqResponse, f_lo: float, f_hi: float, func, target: float) -> float:
    """Refine a bracketed crossing of func(value) = target in log frequency."""
    g_lo = func(_interp_at(loop, f_lo)) - target
    for _ in range(80):
        f_mid = math.sqrt(f_lo * f_hi)
        if (f_hi - f_lo) <= _REFINE_RTOL * f_mid:
            break
        g_mid = func(_interp_at(loop, f_mid)) - target
        if (g_lo <= 0) == (g_mid <= 0):
            f_lo, g_lo = f_mid, g_mid
        else:
            f_hi = f_mid
    return math.sqrt(f_lo * f_hi)


def _refine_minimum(loop: FreqResponse, i: int) -> tuple[float, float]:
    """Golden-section refinement of min |1 + L| around sample index i."""
    f = loop.freqs_hz
    lo = f[max(i - 1, 0)]
    hi = f[min(i + 1, len(f) - 1)]
    if lo == hi:
        return f[i], abs(1.0 + loop.values[i])
    func = lambda x: abs(1.0 + _interp_at(loop, x))
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = math.log(lo), math.log(hi)
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = func(math.exp(c)), func(math.exp(d))
    for _ in range(60):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = func(math.exp(c))
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = func(math.exp(d))
        if (b - a) <= _REFINE_RTOL:
            break
    fm = math.exp((a + b) / 2.0)
    return fm, func(fm)


def _unwrapped_phase_deg(values: np.ndarray) -> np.ndarray:
    return np.degrees(np.unwrap(np.angle(values)))


def _phase_at(loop: FreqResponse, f: float, phase_samples: np.ndarray) -> float:
    """Interpolated phase in deg, lifted onto the unwrapped branch of the samples."""
    raw = math.degrees(np.angle(_interp_at(loop, f)))
    anchor = float(np.interp(np.log(f), np.log(loop.freqs_hz), phase_samples))
    return raw + 360.0 * round((anchor - raw) / 360.0)


def margins(loop: FreqResponse, reqs: Requirements | None = None) -> MarginReport:
    """Stability margins of a sampled open-loop response.

    Phase margin and bandwidth are taken at the lowest gain crossover; among
    multiple phase crossovers the one yielding the smallest gain margin wins
    (conservative); the modulus margin is the refined minimum of |1 + L|.
    """
    f = loop.freqs_hz
    if len(f) < 10 or f[-1] / f[0] < 10.0:
        raise InsufficientGrid("need >= 10 points spanning >= 1 decade")
    reqs = reqs or Requirements()

    mag = np.abs(loop.values)
    with np.errstate(divide="ignore"):
        logmag = np.log10(mag)
    phase = _unwrapped_phase_deg(loop.values)

    # gain crossovers: sign change of log|L|
    gain_cross: list[float] = []
    for i in range(len(f) - 1):
        a, b = logmag[i], logmag[i + 1]
        if a == 0.0:
            gain_cross.append(float(f[i]))
        elif (a < 0) != (b < 0) and np.isfinite(a) and np.isfinite(b):
            gain_cross.append(_bisect(loop, f[i], f[i + 1], lambda v: math.log10(abs(v)), 0.0))
    if logmag[-1] == 0.0:
        gain_cross.append(float(f[-1]))

    pm = pm_freq = None
    if gain_cross:
        pm_freq = gain_cross[0]
        pm = 180.0 + _phase_at(loop, pm_freq, phase)

    # phase crossovers: unwrapped phase through -180 + 360k for any integer k
    phase_cross: list[float] = []
    for i in range(len(f) - 1):
        a, b = phase[i], phase[i + 1]
        lo, hi = min(a, b), max(a, b)
        k0 = math.ceil((lo + 180.0) / 360.0)
        k1 = math.floor((hi + 180.0) / 360.0)
        for k in range(k0, k1 + 1):
            level = -180.0 + 360.0 * k
            if lo <= level <= hi and a != b:
                if a == level:
                    phase_cross.append(float(f[i]))
                else:
                    phase_cross.append(
                        _bisect_phase(loop, f[i], f[i + 1], phase, level)
                    )
    gm_db = math.inf
    gm_freq = None
    for fc in phase_cross:
        mag_c = abs(_interp_at(loop, fc))
        if mag_c > 0:
            cand = -20.0 * math.log10(mag_c)
            if cand < gm_db:
                gm_db, gm_freq = cand, fc

    # modulus margin: refined minimum of |1 + L|
    dist = np.abs(1.0 + loop.values)
    i_min = int(np.argmin(dist))
    mm_freq, mm = _refine_minimum(loop, i_min)
    if dist[i_min] < mm:
        mm, mm_freq = float(dist[i_min]), float(f[i_min])

    bandwidth = gain_cross[0] if gain_cross else None

    # informational closed-loop -3 dB frequency from the same samples: T = L/(1+L)
    tmag = np.abs(loop.values / (1.0 + loop.values))
    cl_bw = None
    below = np.where(tmag < tmag[0] / math.sqrt(2.0))[0]
    if below.size:
        i = int(below[0])
        if i == 0:
            cl_bw = float(f[0])
        else:
            x0, x1 = math.log10(f[i - 1]), math.log10(f[i])
            y0, y1 = math.log10(tmag[i - 1]), math.log10(tmag[i])
            target = math.log10(tmag[0] / math.sqrt(2.0))
            cl_bw = float(10.0 ** (x0 + (target - y0) * (x1 - x0) / (y1 - y0)))

    flags: dict[str, bool | None] = {
        "gain_margin": None,
        "phase_margin": None,
        "modulus_margin": None,
        "bandwidth": None,
    }
    if reqs.min_gm_db is not None:
        flags["gain_margin"] = bool(gm_db >= reqs.min_gm_db)
    if reqs.min_pm_deg is not None:
        flags["phase_margin"] = bool(pm >= reqs.min_pm_deg) if pm is not None else None
    if reqs.min_mm is not None:
        flags["modulus_margin"] = bool(mm >= reqs.min_mm)
    if reqs.bw_range_hz is not None:
        if bandwidth is None:
            flags["bandwidth"] = None
        else:
            lo, hi = reqs.bw_range_hz
            flags["bandwidth"] = bool(lo <= bandwidth <= hi)

    return MarginReport(
        gain_margin_db=gm_db,
        gm_freq_hz=gm_freq,
        phase_margin_deg=pm,
        pm_freq_hz=pm_freq,
        modulus_margin=float(mm),
        mm_freq_hz=float(mm_freq),
        bandwidth_hz=bandwidth,
        closed_loop_bw_hz=cl_bw,
        gain_crossovers_hz=tuple(gain_cross),
        phase_crossovers_hz=tuple(phase_cross),
        flags=flags,
    )


def _bisect_phase(
    loop: FreqResponse, f_lo: float, f_hi: float, phase_samples: np.ndarray, level: float
) -> float:
    lo, hi = f_lo, f_hi
    g_lo = _phase_at(loop, lo, phase_samples) - level
    for _ in range(80):
        mid = math.sqrt(lo * hi)
        if (hi - lo) <= _REFINE_RTOL * mid:
            break
        g_mid = _phase_at(loop, mid, phase_samples) - level
        if (g_lo <= 0) == (g_mid <= 0):
            lo, g_lo = mid, g_mid
        else:
            hi = mid
    return math.sqrt(lo * hi)


# --- plot data -------------------------------------------------------------------


class Subsystem(enum.Enum):
    PLANT = "plant"
    CONTROLLER = "controller"
    OPEN_LOOP = "open_loop"
    CLOSED_LOOP = "closed_loop"
    SENSITIVITY = "sensitivity"
    PROCESS_SENSITIVITY = "process_sensitivity"
    CONTROL_SENSITIVITY = "control_sensitivity"


class PlotView(enum.Enum):
    BODE = "bode"
    NYQUIST = "nyquist"
    NICHOLS = "nichols"


@dataclass(frozen=True, eq=False)
class PlotSeries:
    """Equal-length plot columns; frequencies ascending, units Hz/dB/deg."""

    subsystem: Subsystem
    view: PlotView
    column_names: tuple[str, ...]
    columns: tuple[np.ndarray, ...]

    def as_dict(self) -> dict[str, list[float]]:
        return {n: c.tolist() for n, c in zip(self.column_names, self.columns)}


def subsystem_response(
    plant: PlantModel, controller: RationalTF, subsystem: Subsystem, grid: FreqGrid
) -> FreqResponse:
    if plant.is_frd:
        grid = grid.clamped_to(plant.frd.f_min_hz, plant.frd.f_max_hz)
    f = grid.frequencies()
    if subsystem is Subsystem.PLANT:
        return eval_response(plant, f)
    if subsystem is Subsystem.CONTROLLER:
        return eval_response(controller, f)
    if subsystem is Subsystem.OPEN_LOOP:
        return open_loop(plant, controller, grid)
    kinds = {
        Subsystem.CLOSED_LOOP: SensitivityKind.COMPLEMENTARY,
        Subsystem.SENSITIVITY: SensitivityKind.SENSITIVITY,
        Subsystem.PROCESS_SENSITIVITY: SensitivityKind.PROCESS,
        Subsystem.CONTROL_SENSITIVITY: SensitivityKind.CONTROL,
    }
    return sensitivity(plant, controller, kinds[subsystem], f)


def plot_data(
    plant: PlantModel,
    controller: RationalTF,
    subsystem: Subsystem,
    view: PlotView,
    grid: FreqGrid,
    wrap_phase: bool = False,
) -> PlotSeries:
    """Plot-ready arrays; rendering itself belongs to the UI."""
    resp = subsystem_response(plant, controller, subsystem, grid)
    mag_db = 20.0 * np.log10(np.abs(resp.values))
    phase = _unwrapped_phase_deg(resp.values)
    if wrap_phase:
        phase = -np.mod(-phase + 180.0, 360.0) + 180.0  # into (-180, 180]
    if view is PlotView.BODE:
        return PlotSeries(
            subsystem, view,
            ("freq_hz", "magnitude_db", "phase_deg"),
            (resp.freqs_hz, mag_db, phase),
        )
    if view is PlotView.NYQUIST:
        return PlotSeries(
            subsystem, view,
            ("freq_hz", "re", "im"),
            (resp.freqs_hz, resp.values.real, resp.values.imag),
        )
    if view is PlotView.NICHOLS:
        return PlotSeries(
            subsystem, view,
            ("freq_hz", "phase_deg", "magnitude_db"),
            (resp.freqs_hz, phase, mag_db),
        )
    raise ValueError(view)  # pragma: no cover
