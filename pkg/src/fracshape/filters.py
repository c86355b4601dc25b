"""Loop-shaping filter catalog and controller assembly.

Integer filters (gain, PI, PD, lead-lag, notch, low-pass) and their fractional
variants. A controller is an ordered series product of realized filters; filter
corner frequencies are entered in Hz and converted internally to rad/s.

Fractional kinds raise the integer two-corner shape to a fractional power. With
the default recursive method the zero/pole pairs span exactly the corners the
engineer typed (at power 1 the interior pairs coincide and the response reduces
to the integer filter exactly, extra coincident poles notwithstanding). The
interpolation method instead fits the exact target over a band one guard decade
beyond the corners; discrete methods substitute their generating map into the
target and truncate its expansion.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidSpec, UnsupportedOrder
from .fracapprox import (
    _crone_pairs,
    _pairs_to_tf,
    carlson,
    matsuda_points,
    pade_from_series,
)
from .tfcore import (
    ComposeOp,
    Domain,
    Polynomial,
    RationalTF,
    _trim_cancelled,
    tf_compose,
)

__all__ = [
    "FilterKind",
    "ApproxMethod",
    "FilterSpec",
    "ControllerDef",
    "realize_filter",
    "assemble_controller",
    "default_band_hz",
]

TWO_PI = 2.0 * math.pi


class FilterKind(enum.Enum):
    GAIN = "gain"
    PI = "pi"
    PD = "pd"
    LEAD_LAG = "leadlag"
    NOTCH = "notch"
    LOW_PASS = "lowpass"
    FRAC_PI = "frac_pi"
    FRAC_PD = "frac_pd"
    FRAC_LEAD_LAG = "frac_leadlag"


class ApproxMethod(enum.Enum):
    CRONE = "crone"
    CARLSON = "carlson"
    MATSUDA = "matsuda"
    TUSTIN = "tustin"
    SOBFD = "sobfd"
    TOBFD = "tobfd"


_DISCRETE_METHODS = {ApproxMethod.TUSTIN, ApproxMethod.SOBFD, ApproxMethod.TOBFD}

FRACTIONAL_KINDS = {FilterKind.FRAC_PI, FilterKind.FRAC_PD, FilterKind.FRAC_LEAD_LAG}

#: required parameter names per kind; fractional kinds additionally take n_pairs
#: and, for discrete methods only, sample_period_s.
_REQUIRED_PARAMS: dict[FilterKind, tuple[str, ...]] = {
    FilterKind.GAIN: ("Kp",),
    FilterKind.PI: ("f_i",),
    FilterKind.PD: ("f_d", "f_t"),
    FilterKind.LEAD_LAG: ("f_z", "f_p"),
    FilterKind.NOTCH: ("f_notch", "damping_num", "damping_den"),
    FilterKind.LOW_PASS: ("f_cutoff", "order"),
    FilterKind.FRAC_PI: ("f_i", "lambda", "n_pairs"),
    FilterKind.FRAC_PD: ("f_d", "f_t", "alpha", "n_pairs"),
    FilterKind.FRAC_LEAD_LAG: ("f_z", "f_p", "alpha", "n_pairs"),
}

_OPTIONAL_PARAMS: dict[FilterKind, tuple[str, ...]] = {
    FilterKind.FRAC_PI: ("sample_period_s",),
    FilterKind.FRAC_PD: ("sample_period_s",),
    FilterKind.FRAC_LEAD_LAG: ("sample_period_s",),
}


@dataclass(frozen=True)
class FilterSpec:
    """One loop-shaping filter: kind, named parameters, approximation settings."""

    kind: FilterKind
    params: dict[str, float]
    approx_method: ApproxMethod = ApproxMethod.CRONE
    approx_band_hz: tuple[float, float] | None = None

    def __post_init__(self):
        object.__setattr__(self, "params", dict(self.params))
        validate_spec(self)

    def param(self, name: str) -> float:
        return float(self.params[name])


def validate_spec(spec: FilterSpec) -> None:
    required = _REQUIRED_PARAMS[spec.kind]
    optional = _OPTIONAL_PARAMS.get(spec.kind, ())
    missing = [p for p in required if p not in spec.params]
    if missing:
        raise InvalidSpec(f"{spec.kind.value}: missing parameters {missing}")
    unknown = [p for p in spec.params if p not in required + optional]
    if unknown:
        raise InvalidSpec(f"{spec.kind.value}: unknown parameters {unknown}")
    for name, value in spec.params.items():
        v = float(value)
        if not math.isfinite(v):
            raise InvalidSpec(f"{spec.kind.value}: {name} must be finite")
        if name != "Kp" and v <= 0:
            raise InvalidSpec(f"{spec.kind.value}: {name} must be positive")
    if spec.kind in (FilterKind.FRAC_PD, FilterKind.PD):
        if not spec.param("f_d") < spec.param("f_t"):
            raise InvalidSpec("derivative start f_d must lie below taming f_t")
    if spec.kind is FilterKind.LOW_PASS:
        order = spec.param("order")
        if order != int(order) or order < 1:
            raise InvalidSpec("low-pass order must be a positive integer")
    if spec.kind in FRACTIONAL_KINDS:
        exp_name = "lambda" if spec.kind is FilterKind.FRAC_PI else "alpha"
        exponent = spec.param(exp_name)
        if not (0.0 < exponent <= 2.0):
            raise InvalidSpec(f"fractional order {exp_name} must be in (0, 2]")
        n_pairs = spec.param("n_pairs")
        if n_pairs != int(n_pairs) or not (1 <= n_pairs <= 50):
            raise InvalidSpec("n_pairs must be an integer in 1..50")
        if spec.approx_method in _DISCRETE_METHODS and "sample_period_s" not in spec.params:
            raise InvalidSpec(
                f"{spec.approx_method.value} realization needs params['sample_period_s']"
            )
    if spec.approx_band_hz is not None:
        lo, hi = spec.approx_band_hz
        if not (0 < lo < hi):
            raise InvalidSpec("approx_band_hz must be an increasing positive pair")


@dataclass(frozen=True)
class ControllerDef:
    """Named, ordered filter list with an optional reference pre-filter."""

    name: str
    filters: tuple[FilterSpec, ...] = ()
    prefilter: RationalTF | None = None

    def __init__(self, name, filters=(), prefilter=None):
        if not name:
            raise InvalidSpec("controller name must be nonempty")
        fs = tuple(filters)
        if len(fs) > 32:
            raise InvalidSpec("at most 32 filters per controller")
        object.__setattr__(self, "name", str(name))
        object.__setattr__(self, "filters", fs)
        object.__setattr__(self, "prefilter", prefilter)


# --- integer shapes ---------------------------------------------------------------

def _pi_tf(f_i: float) -> RationalTF:
    wi = TWO_PI * f_i
    return RationalTF.from_coeffs([wi, 1.0], [0.0, 1.0])  # (s + wi)/s = 1 + wi/s


def _two_corner_tf(f_zero: float, f_pole: float) -> RationalTF:
    wz, wp = TWO_PI * f_zero, TWO_PI * f_pole
    return RationalTF.from_coeffs([1.0, 1.0 / wz], [1.0, 1.0 / wp])


def _notch_tf(f_notch: float, zeta_num: float, zeta_den: float) -> RationalTF:
    wn = TWO_PI * f_notch
    return RationalTF.from_coeffs(
        [wn * wn, 2.0 * zeta_num * wn, 1.0], [wn * wn, 2.0 * zeta_den * wn, 1.0]
    )


def _lowpass_tf(f_cutoff: float, order: int) -> RationalTF:
    wc = TWO_PI * f_cutoff
    den = Polynomial((1.0,))
    cell = (1.0, 1.0 / wc)
    for _ in range(order):
        den = Polynomial(np.convolve(den.coeffs, cell))
    return RationalTF(Polynomial((1.0,)), den)


# --- fractional two-corner realization ---------------------------------------------

def default_band_hz(spec: FilterSpec) -> tuple[float, float]:
    """Validity/sampling band: one guard decade beyond the shape's corners
    (integrator hold-off corner f_i/1000 for the fractional PI)."""
    if spec.approx_band_hz is not None:
        return spec.approx_band_hz
    if spec.kind is FilterKind.FRAC_PD:
        return spec.param("f_d") / 10.0, spec.param("f_t") * 10.0
    if spec.kind is FilterKind.FRAC_LEAD_LAG:
        lo = min(spec.param("f_z"), spec.param("f_p"))
        hi = max(spec.param("f_z"), spec.param("f_p"))
        return lo / 10.0, hi * 10.0
    if spec.kind is FilterKind.FRAC_PI:
        return spec.param("f_i") / 1000.0, spec.param("f_i") * 10.0
    raise InvalidSpec(f"{spec.kind.value} has no approximation band")


def _frac_corners(spec: FilterSpec) -> tuple[float, float, float, float]:
    """(f numerator corner, f denominator corner, exponent, dc gain) of the target."""
    if spec.kind is FilterKind.FRAC_PD:
        return spec.param("f_d"), spec.param("f_t"), spec.param("alpha"), 1.0
    if spec.kind is FilterKind.FRAC_LEAD_LAG:
        return spec.param("f_z"), spec.param("f_p"), spec.param("alpha"), 1.0
    # fractional PI: (1 + wi/s)^lam, band-limited to ((s+wi)/(s+wlo))^lam
    f_i = spec.param("f_i")
    lam = spec.param("lambda")
    f_lo = default_band_hz(spec)[0]
    return f_i, f_lo, lam, (f_i / f_lo) ** lam


def _frac_target_fn(spec: FilterSpec):
    """Exact target as a function of real positive s (rad/s), and its DC gain."""
    f_num, f_den, alpha, dc = _frac_corners(spec)
    wz, wp = TWO_PI * f_num, TWO_PI * f_den

    def target(x):
        x = np.asarray(x, dtype=float)
        return dc * ((1.0 + x / wz) / (1.0 + x / wp)) ** alpha

    return target


def _realize_frac_crone(spec: FilterSpec) -> RationalTF:
    """Recursive pole/zero distribution between the exact corners, DC-anchored."""
    f_num, f_den, alpha, dc = _frac_corners(spec)
    wz, wp = TWO_PI * f_num, TWO_PI * f_den
    wl, wh = min(wz, wp), max(wz, wp)
    nu_eff = alpha if wz < wp else -alpha
    n = int(spec.param("n_pairs"))
    zeros, poles = _crone_pairs(nu_eff, wl, wh, n)
    return _pairs_to_tf(zeros, poles).scaled(dc)


def _realize_frac_matsuda(spec: FilterSpec) -> RationalTF:
    """Continued-fraction interpolation of the exact target over the guard band."""
    lo_hz, hi_hz = default_band_hz(spec)
    n = int(spec.param("n_pairs"))
    m = 2 * n + 1
    edges = np.linspace(math.log10(TWO_PI * lo_hz), math.log10(TWO_PI * hi_hz), m + 1)
    x = 10.0 ** ((edges[:-1] + edges[1:]) / 2.0)
    return matsuda_points(x, _frac_target_fn(spec)(x), allow_early_exact=True)


def _realize_frac_carlson(spec: FilterSpec) -> RationalTF:
    """Compose the Newton-iteration operator approximant with the integer shape.

    x**alpha is approximated around the centre of the target's magnitude range
    (x**a = c**a * (x/c)**a), then the integer two-corner ratio is substituted in.
    The Newton iteration converges uniformly on compact subsets of the slit plane,
    and the two-corner ratio's frequency locus is such a compact, so the
    composition inherits the operator approximant's accuracy.
    """
    f_num, f_den, alpha, dc = _frac_corners(spec)
    inv = 1.0 / alpha
    if abs(inv - round(inv)) > 1e-9 or round(inv) == 0:
        raise UnsupportedOrder(f"1/alpha must be a nonzero integer, got 1/{alpha:g}")
    shape = _two_corner_tf(f_num, f_den)
    ratio = f_den / f_num  # |shape| spans [min(1, ratio), max(1, ratio)]
    c = math.sqrt(ratio)
    h = carlson(alpha, iterations=int(spec.param("n_pairs")))
    # c**a * H(x/c): substitute x -> x/c, i.e. scale coefficient k by c**-k
    hn = np.array(h.num.coeffs) * np.array([c ** -k for k in range(len(h.num.coeffs))])
    hd = np.array(h.den.coeffs) * np.array([c ** -k for k in range(len(h.den.coeffs))])
    hn = hn * (c ** alpha)
    num, den = _compose_rational(hn, hd, shape)
    return RationalTF(num, den).scaled(dc)


def _compose_rational(
    hn: np.ndarray, hd: np.ndarray, inner: RationalTF
) -> tuple[Polynomial, Polynomial]:
    """H(inner(s)) for H = hn/hd given by ascending coefficient arrays.

    Trailing coefficients are dropped only when they are cancellation residue
    relative to the magnitudes summed into them (per degree).
    """
    q = max(len(hn), len(hd)) - 1
    gn, gd = np.array(inner.num.coeffs), np.array(inner.den.coeffs)

    def build(coeffs: np.ndarray) -> tuple[float, ...]:
        acc = np.zeros(1)
        mags = np.zeros(1)
        for k in range(q + 1):
            ck = coeffs[k] if k < len(coeffs) else 0.0
            term = np.array([ck])
            for _ in range(k):
                term = np.convolve(term, gn)
            for _ in range(q - k):
                term = np.convolve(term, gd)
            n_ = max(len(acc), len(term))
            new = np.zeros(n_)
            new_m = np.zeros(n_)
            new[: len(acc)] += acc
            new_m[: len(mags)] += mags
            new[: len(term)] += term
            new_m[: len(term)] += np.abs(term)
            acc, mags = new, new_m
        return _trim_cancelled(acc, mags)

    return Polynomial(build(hn)), Polynomial(build(hd))


def _realize_frac_discrete(spec: FilterSpec) -> RationalTF:
    """Generating-map substitution: expand target(s(z)) in powers of z**-1 and
    truncate to the [N/N] convergent, mirroring the pure-operator recipe."""
    t = spec.param("sample_period_s")
    n = int(spec.param("n_pairs"))
    f_num, f_den, alpha, dc = _frac_corners(spec)
    wz, wp = TWO_PI * f_num, TWO_PI * f_den
    gen_num, gen_den = _generating_map(spec.approx_method, t)
    # R(x) = (1 + gen/wz)/(1 + gen/wp) = (wp/wz) * (wz*gd + gn)/(wp*gd + gn)
    rn = _arr_add(wz * gen_den, gen_num) * (wp / wz)
    rd = _arr_add(wp * gen_den, gen_num)
    k = 2 * n + 1
    series = _series_pow(_series_div(rn, rd, k), alpha, k) * dc
    num_x, den_x = pade_from_series(series, n)
    nmax = max(len(num_x), len(den_x)) - 1
    num_z = np.zeros(nmax + 1)
    den_z = np.zeros(nmax + 1)
    num_z[nmax - (len(num_x) - 1):] = num_x[::-1]
    den_z[nmax - (len(den_x) - 1):] = den_x[::-1]
    return RationalTF.from_coeffs(num_z, den_z, Domain.DISCRETE_Z, t)


def _generating_map(method: ApproxMethod, t: float) -> tuple[np.ndarray, np.ndarray]:
    """The s(x) substitution of each discrete method, x = z**-1, as num/den arrays."""
    if method is ApproxMethod.TUSTIN:
        return np.array([2.0 / t, -2.0 / t]), np.array([1.0, 1.0])
    if method is ApproxMethod.SOBFD:
        return np.array([3.0, -4.0, 1.0]) / (2.0 * t), np.array([1.0])
    if method is ApproxMethod.TOBFD:
        return np.array([11.0, -18.0, 9.0, -2.0]) / (6.0 * t), np.array([1.0])
    raise InvalidSpec(f"{method.value} is not a discrete method")


def _arr_add(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = max(len(a), len(b))
    out = np.zeros(n)
    out[: len(a)] += a
    out[: len(b)] += b
    return out


def _series_div(num: np.ndarray, den: np.ndarray, k: int) -> np.ndarray:
    """First k coefficients of num(x)/den(x); den[0] must be nonzero."""
    out = np.zeros(k)
    num = np.concatenate([num, np.zeros(max(0, k - len(num)))])
    for i in range(k):
        acc = num[i] if i < len(num) else 0.0
        for j in range(1, min(i, len(den) - 1) + 1):
            acc -= den[j] * out[i - j]
        out[i] = acc / den[0]
    return out


def _series_pow(c: np.ndarray, alpha: float, k: int) -> np.ndarray:
    """First k coefficients of (sum c_i x^i)**alpha for c[0] > 0.

    Uses the standard recurrence for powers of a series (differentiate
    y = u**alpha -> u y' = alpha u' y), avoiding log/exp series round-off.
    """
    if c[0] <= 0:
        raise InvalidSpec("series power needs a positive leading coefficient")
    y = np.zeros(k)
    y[0] = c[0] ** alpha
    for n_ in range(1, k):
        acc = 0.0
        for i in range(1, min(n_, len(c) - 1) + 1):
            acc += ((alpha + 1.0) * i / n_ - 1.0) * c[i] * y[n_ - i]
        y[n_] = acc / c[0]
    return y


# --- public operations --------------------------------------------------------------

def realize_filter(spec: FilterSpec) -> RationalTF:
    """Realize one filter specification as a rational transfer function."""
    k = spec.kind
    if k is FilterKind.GAIN:
        return RationalTF.constant(spec.param("Kp"))
    if k is FilterKind.PI:
        return _pi_tf(spec.param("f_i"))
    if k is FilterKind.PD:
        return _two_corner_tf(spec.param("f_d"), spec.param("f_t"))
    if k is FilterKind.LEAD_LAG:
        return _two_corner_tf(spec.param("f_z"), spec.param("f_p"))
    if k is FilterKind.NOTCH:
        return _notch_tf(
            spec.param("f_notch"), spec.param("damping_num"), spec.param("damping_den")
        )
    if k is FilterKind.LOW_PASS:
        return _lowpass_tf(spec.param("f_cutoff"), int(spec.param("order")))
    if k in FRACTIONAL_KINDS:
        method = spec.approx_method
        if method is ApproxMethod.CRONE:
            return _realize_frac_crone(spec)
        if method is ApproxMethod.MATSUDA:
            return _realize_frac_matsuda(spec)
        if method is ApproxMethod.CARLSON:
            return _realize_frac_carlson(spec)
        return _realize_frac_discrete(spec)
    raise InvalidSpec(f"unknown filter kind {k!r}")  # pragma: no cover


def assemble_controller(cdef: ControllerDef) -> RationalTF:
    """Series product of the realized filters, in list order (empty list = 1).

    The returned function's ``.order`` property reports max(deg num, deg den),
    the number displayed alongside a controller.
    """
    out = RationalTF.constant(1.0)
    for spec in cdef.filters:
        tf = realize_filter(spec)
        if out.order == 0 and out.domain is not tf.domain:
            out = RationalTF(out.num, out.den, tf.domain, tf.sample_period_s)
        out = tf_compose(out, tf, ComposeOp.SERIES)
    return out
