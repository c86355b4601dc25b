"""Closed-loop time-domain simulation with reference, disturbance, and noise.

Topology: e = r_f - (y + n), u = C e, y = P (u + d), with r_f the (optionally
pre-filtered) reference. The loop is simulated through the four closed-loop
transfer functions realized individually and discretized with the bilinear rule,
so the algebraic loop is resolved exactly and no artificial one-sample delay is
inserted:

    y = T r_f + PS d - T n      u = CS r_f - T d - CS n

with T = PC/(1+PC), PS = P/(1+PC), CS = C/(1+PC). Simulation requires a
transfer-function plant; measured-frd plants are rejected.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .errors import (
    BilinearSingularity,
    FrdPlantUnsupported,
    ImproperTransferFunction,
    InvalidSignal,
)
from .tfcore import ComposeOp, Domain, PlantModel, RationalTF, tf_compose

__all__ = [
    "SignalShape",
    "SignalSpec",
    "SimConfig",
    "SimResult",
    "discretize",
    "simulate",
    "sim_result_csv",
]

_DIVERGENCE_LIMIT = 1e9


class SignalShape(enum.Enum):
    STEP = "step"
    SINE = "sine"
    SAWTOOTH = "sawtooth"
    GAUSSIAN = "gaussian"


_ALLOWED_BY_ROLE = {
    "reference": {SignalShape.STEP, SignalShape.SINE, SignalShape.SAWTOOTH},
    "disturbance": {SignalShape.STEP, SignalShape.SINE, SignalShape.GAUSSIAN},
    "noise": {SignalShape.SINE, SignalShape.GAUSSIAN},
}


@dataclass(frozen=True)
class SignalSpec:
    """One test signal. Gaussian signals must carry a seed for reproducibility."""

    shape: SignalShape
    amplitude: float = 1.0
    frequency_hz: float | None = None
    std_dev: float | None = None
    seed: int | None = None
    start_time_s: float = 0.0

    def __post_init__(self):
        if self.start_time_s < 0:
            raise InvalidSignal("start_time_s must be nonnegative")
        if self.shape in (SignalShape.SINE, SignalShape.SAWTOOTH):
            if self.frequency_hz is None or not self.frequency_hz > 0:
                raise InvalidSignal(f"{self.shape.value} needs a positive frequency_hz")
        if self.shape is SignalShape.GAUSSIAN:
            if self.std_dev is None or not self.std_dev > 0:
                raise InvalidSignal("gaussian needs a positive std_dev")
            if self.seed is None:
                raise InvalidSignal("gaussian needs a seed (reproducibility contract)")

    def samples(self, t: np.ndarray) -> np.ndarray:
        active = t >= self.start_time_s
        out = np.zeros_like(t)
        tau = t[active] - self.start_time_s
        if self.shape is SignalShape.STEP:
            out[active] = self.amplitude
        elif self.shape is SignalShape.SINE:
            out[active] = self.amplitude * np.sin(2.0 * np.pi * self.frequency_hz * tau)
        elif self.shape is SignalShape.SAWTOOTH:
            # rising ramp 0 -> amplitude with period 1/f, instantaneous reset
            out[active] = self.amplitude * np.mod(tau * self.frequency_hz, 1.0)
        elif self.shape is SignalShape.GAUSSIAN:
            rng = np.random.default_rng(self.seed)
            noise = rng.normal(0.0, self.std_dev, size=t.shape)
            out[active] = self.amplitude * noise[active]
        return out


@dataclass(frozen=True)
class SimConfig:
    duration_s: float
    sample_period_s: float
    reference: SignalSpec
    disturbance: SignalSpec | None = None
    noise: SignalSpec | None = None
    use_prefilter: bool = False

    def __post_init__(self):
        if not (self.duration_s > 0 and self.sample_period_s > 0):
            raise InvalidSignal("duration and sample period must be positive")
        if self.duration_s / self.sample_period_s > 1e7:
            raise InvalidSignal("more than 1e7 samples requested")
        _check_role(self.reference, "reference")
        if self.disturbance is not None:
            _check_role(self.disturbance, "disturbance")
        if self.noise is not None:
            _check_role(self.noise, "noise")


def _check_role(spec: SignalSpec, role: str) -> None:
    if spec.shape not in _ALLOWED_BY_ROLE[role]:
        allowed = ", ".join(sorted(s.value for s in _ALLOWED_BY_ROLE[role]))
        raise InvalidSignal(f"{role} accepts only: {allowed}")


@dataclass(frozen=True, eq=False)
class SimResult:
    time_s: np.ndarray
    reference: np.ndarray
    output: np.ndarray
    control_effort: np.ndarray
    output_no_prefilter: np.ndarray | None = None
    diverged: bool = False
    diverged_at_index: int | None = None
    seeds: dict[str, int] | None = None


def discretize(tf: RationalTF, sample_period_s: float) -> RationalTF:
    """Bilinear (trapezoidal) substitution s = (2/T)(z-1)/(z+1).

    Preserves DC gain exactly for functions finite at s = 0. Requires a proper
    function and no pole at exactly 2/T (where the map is singular).
    """
    if tf.domain is Domain.DISCRETE_Z:
        raise ValueError("already discrete")
    if not tf.is_proper:
        raise ImproperTransferFunction(
            f"numerator degree {tf.num.degree} > denominator degree {tf.den.degree}"
        )
    t = float(sample_period_s)
    if not t > 0:
        raise ValueError("sample period must be positive")
    c = 2.0 / t
    den_at_c = tf.den(c)
    # cancellation scale of the evaluation, not a coefficient-magnitude bound
    den_scale = sum(abs(a) * c**k for k, a in enumerate(tf.den.coeffs))
    if abs(den_at_c) < 1e-12 * den_scale:
        raise BilinearSingularity(f"pole at 2/T = {c:g} rad/s")

    n = tf.den.degree
    num_z = _bilinear_poly(tf.num.coeffs, n, c)
    den_z = _bilinear_poly(tf.den.coeffs, n, c)
    return RationalTF.from_coeffs(num_z, den_z, Domain.DISCRETE_Z, t)


def _bilinear_poly(coeffs: tuple[float, ...], n: int, c: float) -> np.ndarray:
    """sum_k coeffs[k] * c**k * (z-1)**k * (z+1)**(n-k), ascending in z."""
    out = np.zeros(n + 1)
    zm1 = np.array([-1.0, 1.0])
    zp1 = np.array([1.0, 1.0])
    for k, a in enumerate(coeffs):
        if a == 0.0:
            continue
        term = np.array([a * c ** k])
        for _ in range(k):
            term = np.convolve(term, zm1)
        for _ in range(n - k):
            term = np.convolve(term, zp1)
        out[: len(term)] += term
    return out


def _closed_loop_tfs(plant_tf: RationalTF, controller: RationalTF):
    loop = tf_compose(plant_tf, controller, ComposeOp.SERIES)
    t = tf_compose(loop, RationalTF.constant(1.0), ComposeOp.FEEDBACK)   # PC/(1+PC)
    ps = tf_compose(plant_tf, controller, ComposeOp.FEEDBACK)            # P/(1+PC)
    cs = tf_compose(controller, plant_tf, ComposeOp.FEEDBACK)            # C/(1+PC)
    return t, ps, cs


def _run_filter(tf_z: RationalTF, x: np.ndarray) -> np.ndarray:
    n = tf_z.den.degree
    b = np.zeros(n + 1)
    b[n - tf_z.num.degree :] = np.asarray(tf_z.num.coeffs)[::-1]
    a = np.asarray(tf_z.den.coeffs)[::-1]
    return lfilter(b, a, x)


def simulate(
    plant: PlantModel,
    controller: RationalTF,
    prefilter: RationalTF | None,
    cfg: SimConfig,
) -> SimResult:
    """Deterministic closed-loop simulation (given the signal seeds).

    The output is truncated with a diverged flag if it exceeds 1e9 or leaves the
    finite range.
    """
    if plant.is_frd:
        raise FrdPlantUnsupported("time response needs a transfer-function plant")
    p = plant.tf

    t_cl, ps, cs = _closed_loop_tfs(p, controller)
    for name, tf in (("closed loop", t_cl), ("process sensitivity", ps),
                     ("control sensitivity", cs)):
        if not tf.is_proper:
            raise ImproperTransferFunction(f"{name} transfer function is improper")
    ts = cfg.sample_period_s
    t_d = discretize(t_cl, ts)
    ps_d = discretize(ps, ts)
    cs_d = discretize(cs, ts)

    _warn_if_undersampled(t_d, ts)

    n = int(math.floor(cfg.duration_s / ts)) + 1
    time = np.arange(n) * ts
    r = cfg.reference.samples(time)
    d = cfg.disturbance.samples(time) if cfg.disturbance else None
    nz = cfg.noise.samples(time) if cfg.noise else None

    use_pf = cfg.use_prefilter and prefilter is not None
    if use_pf:
        if not prefilter.is_proper:
            raise ImproperTransferFunction("pre-filter is improper")
        pf_d = discretize(prefilter, ts)
        r_f = _run_filter(pf_d, r)
    else:
        r_f = r

    y = _run_filter(t_d, r_f)
    u = _run_filter(cs_d, r_f)
    if d is not None:
        y = y + _run_filter(ps_d, d)
        u = u - _run_filter(t_d, d)
    if nz is not None:
        y = y - _run_filter(t_d, nz)
        u = u - _run_filter(cs_d, nz)

    y_nopf = None
    if use_pf:
        y_nopf = _run_filter(t_d, r)
        if d is not None:
            y_nopf = y_nopf + _run_filter(ps_d, d)
        if nz is not None:
            y_nopf = y_nopf - _run_filter(t_d, nz)

    diverged = False
    div_idx = None
    bad = ~np.isfinite(y) | (np.abs(y) > _DIVERGENCE_LIMIT)
    if np.any(bad):
        diverged = True
        div_idx = int(np.argmax(bad))
        sl = slice(0, div_idx)
        time, r, y, u = time[sl], r[sl], y[sl], u[sl]
        if y_nopf is not None:
            y_nopf = y_nopf[sl]

    seeds = {}
    if cfg.disturbance is not None and cfg.disturbance.seed is not None:
        seeds["disturbance"] = cfg.disturbance.seed
    if cfg.noise is not None and cfg.noise.seed is not None:
        seeds["noise"] = cfg.noise.seed

    return SimResult(
        time_s=time,
        reference=r,
        output=y,
        control_effort=u,
        output_no_prefilter=y_nopf,
        diverged=diverged,
        diverged_at_index=div_idx,
        seeds=seeds or None,
    )


def _warn_if_undersampled(t_d: RationalTF, ts: float) -> None:
    """Advise when the sample rate is below 20x the closed-loop bandwidth."""
    nyq = 0.5 / ts
    f = np.geomspace(max(nyq * 1e-6, 1e-9), nyq * 0.999, 200)
    z = np.exp(2j * np.pi * f * ts)
    mag = np.abs(t_d.num(z) / t_d.den(z))
    ref = mag[0]
    if ref == 0 or not np.isfinite(ref):
        return
    below = np.where(mag < ref / math.sqrt(2.0))[0]
    if below.size == 0:
        bw = nyq
    else:
        bw = f[below[0]]
    if ts > 1.0 / (20.0 * bw):
        warnings.warn(
            f"sample period {ts:g} s exceeds 1/(20*bandwidth) = {1.0/(20.0*bw):g} s",
            stacklevel=3,
        )


def sim_result_csv(result: SimResult) -> str:
    """CSV export: header t,r,y,u[,y_nopf], full double precision."""
    cols = [result.time_s, result.reference, result.output, result.control_effort]
    header = "t,r,y,u"
    if result.output_no_prefilter is not None:
        cols.append(result.output_no_prefilter)
        header += ",y_nopf"
    lines = [header]
    for row in zip(*cols):
        lines.append(",".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"
