"""Rational approximation of the fractional operator s**nu.

Three continuous methods (recursive pole/zero distribution, Newton iteration,
continued-fraction interpolation of log-spaced samples) and three discrete
methods built on the same recipe: substitute a generating s(z) map, raise to the
fractional power, expand in powers of z**-1, and truncate the continued fraction
(equivalently, take the [N/N] Pade approximant of the expansion).

All operators here are pure functions of their arguments and safe to evaluate in
parallel.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import (
    ComplexResidue,
    DegenerateInterpolation,
    IterationBudget,
    OrderOutOfRange,
    PoleArgument,
    UnsupportedOrder,
)
from .tfcore import Domain, Polynomial, RationalTF

__all__ = [
    "CroneConfig",
    "CfeConfig",
    "CfeMethod",
    "gamma_fn",
    "reciprocal_gamma",
    "crone",
    "carlson",
    "matsuda",
    "cfe_discretize",
]

NU_SANITY_BOUND = 5.0

#: Spare-pair budget, in decades, spent widening the synthesis band per side.
#: The ideal band-limited operator's phase sags ~nu*(180/pi)*(w/w_high) near the
#: band edge, so a fixed comb over the bare band cannot be accurate one decade
#: inside it; widening is only affordable when there is more than one pair per
#: decade, otherwise mid-band ripple dominates.
_GUARD_CAP_DECADES = 0.6


@dataclass(frozen=True)
class CroneConfig:
    """Approximation band [rad/s] and number of zero/pole pairs."""

    omega_low_rad_s: float
    omega_high_rad_s: float
    n_pairs: int

    def __post_init__(self):
        if not (0 < self.omega_low_rad_s < self.omega_high_rad_s):
            raise ValueError("need 0 < omega_low < omega_high")
        if not (1 <= self.n_pairs <= 50):
            raise ValueError("n_pairs must be in 1..50")


@dataclass(frozen=True)
class CfeConfig:
    """Sample period and truncation order for the discrete methods."""

    sample_period_s: float
    order: int

    def __post_init__(self):
        if not self.sample_period_s > 0:
            raise ValueError("sample period must be positive")
        if not (1 <= self.order <= 20):
            raise ValueError("order must be in 1..20")


class CfeMethod(enum.Enum):
    TUSTIN = "tustin"
    SOBFD = "sobfd"
    TOBFD = "tobfd"


def _check_nu(nu: float, bound: float = NU_SANITY_BOUND) -> float:
    nu = float(nu)
    if not math.isfinite(nu) or abs(nu) > bound:
        raise OrderOutOfRange(f"|nu| must be finite and <= {bound}")
    return nu


# --- gamma utilities -----------------------------------------------------------

def gamma_fn(x: float) -> float:
    """Gamma function; errors at its poles (non-positive integers)."""
    x = float(x)
    if x <= 0 and x == math.floor(x):
        raise PoleArgument(f"gamma pole at {x:g}")
    return float(special.gamma(x))


def reciprocal_gamma(x: float) -> float:
    """1/Gamma(x), defined for all reals; exactly 0 at non-positive integers."""
    return float(special.rgamma(float(x)))


def _frac_binom(a: float, j: int) -> float:
    """Generalized binomial C(a, j) as a falling-factorial product.

    Identical to Gamma(a+1)/(Gamma(j+1)*Gamma(a-j+1)) wherever that quotient is
    defined, but finite for every real a: terms whose gamma argument would hit a
    non-positive integer come out exactly zero, matching the reciprocal-gamma
    treatment of pole terms.
    """
    out = 1.0
    for i in range(j):
        out *= (a - i) / (i + 1)
    return out


# --- CRONE (recursive pole/zero distribution) -----------------------------------

def _crone_pairs(nu: float, wl: float, wh: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Zero and pole corner frequencies of the recursive distribution.

    zeros_k = wl * r**((2k-1-nu)/(2N)), poles_k = wl * r**((2k-1+nu)/(2N)).
    Negative nu swaps the roles automatically (zeros land above poles).
    """
    r = wh / wl
    k = np.arange(1, n + 1)
    zeros = wl * r ** ((2 * k - 1 - nu) / (2 * n))
    poles = wl * r ** ((2 * k - 1 + nu) / (2 * n))
    return zeros, poles


def _pairs_to_tf(zeros: np.ndarray, poles: np.ndarray) -> RationalTF:
    num = Polynomial((1.0,))
    den = Polynomial((1.0,))
    for z in zeros:
        num = Polynomial(np.convolve(num.coeffs, (1.0, 1.0 / z)))
    for p in poles:
        den = Polynomial(np.convolve(den.coeffs, (1.0, 1.0 / p)))
    return RationalTF(num, den)


def _mul_integrators(tf: RationalTF, n: int) -> RationalTF:
    """Multiply by s**n (n may be negative)."""
    if n == 0:
        return tf
    mono = Polynomial((0.0,) * abs(n) + (1.0,))
    if n > 0:
        return RationalTF(Polynomial(np.convolve(tf.num.coeffs, mono.coeffs)), tf.den)
    return RationalTF(tf.num, Polynomial(np.convolve(tf.den.coeffs, mono.coeffs)))


def crone(nu: float, cfg: CroneConfig) -> RationalTF:
    """Band-limited rational approximation of s**nu with exactly N zero/pole pairs.

    Fractional orders beyond +-1 are split into an exact integer power times the
    fractional remainder. The magnitude at the band's geometric centre
    w_u = sqrt(wl*wh) equals w_u**nu exactly (gain anchoring).

    The pair comb is synthesised over a band widened by up to 0.3 decade per side
    when the pair budget exceeds one pair per decade; this pushes the intrinsic
    band-edge phase sag of any band-limited approximant outside the usable range
    without inflating mid-band ripple for sparse combs.
    """
    nu = _check_nu(nu)
    if nu == 0.0:
        return RationalTF.constant(1.0)

    n_int = math.trunc(nu) if abs(nu) > 1.0 else 0
    frac = nu - n_int

    wl, wh = cfg.omega_low_rad_s, cfg.omega_high_rad_s
    wu = math.sqrt(wl * wh)

    if frac == 0.0:
        return _normalize_gain(_mul_integrators(RationalTF.constant(1.0), n_int), nu, wu)

    band_decades = math.log10(wh / wl)
    guard = min(_GUARD_CAP_DECADES, max(0.0, cfg.n_pairs - band_decades)) / 2.0
    g = 10.0 ** guard
    zeros, poles = _crone_pairs(frac, wl / g, wh * g, cfg.n_pairs)
    tf = _mul_integrators(_pairs_to_tf(zeros, poles), n_int)
    return _normalize_gain(tf, nu, wu)


def _normalize_gain(tf: RationalTF, nu: float, wu: float) -> RationalTF:
    target = wu ** nu
    got = abs(tf(1j * wu))
    return tf.scaled(target / got)


# --- Carlson (Newton iteration) --------------------------------------------------

def carlson(nu: float, iterations: int) -> RationalTF:
    """Newton-style iteration converging to s**nu, for nu the reciprocal of an
    integer. Starts from F0 = 1; every iterate satisfies F(1) = 1 exactly.

    The denominator degree grows as d -> (|q|+1)*d + 1 per iteration (q = 1/nu),
    so the budget guard rejects runs whose degree would exceed 64.
    """
    nu = _check_nu(nu)
    if nu == 0.0:
        return RationalTF.constant(1.0)
    q_real = 1.0 / nu
    q = round(q_real)
    if q == 0 or abs(q_real - q) > 1e-9:
        raise UnsupportedOrder(f"1/nu must be a nonzero integer, got 1/{nu:g}")
    if iterations < 1:
        raise ValueError("iterations must be >= 1")

    deg = 0
    for _ in range(iterations):
        deg = (abs(q) + 1) * deg + 1
    if deg > 64:
        raise IterationBudget(f"result degree {deg} exceeds 64")

    num = Polynomial((1.0,))
    den = Polynomial((1.0,))
    qa = abs(q)
    for _ in range(iterations):
        npow, dpow = Polynomial((1.0,)), Polynomial((1.0,))
        for _ in range(qa):
            npow = Polynomial(np.convolve(npow.coeffs, num.coeffs))
            dpow = Polynomial(np.convolve(dpow.coeffs, den.coeffs))
        if q < 0:
            npow, dpow = dpow, npow  # F**q with negative q inverts the power
        # F_{i} = F_{i-1} * ((q-1) F^q + (q+1) s) / ((q+1) F^q + (q-1) s)
        s_dpow = Polynomial((0.0,) + dpow.coeffs)
        upper = _poly_lincomb(q - 1, npow, q + 1, s_dpow)
        lower = _poly_lincomb(q + 1, npow, q - 1, s_dpow)
        num = Polynomial(np.convolve(num.coeffs, upper.coeffs))
        den = Polynomial(np.convolve(den.coeffs, lower.coeffs))
    return RationalTF(num, den)


def _poly_lincomb(ka: float, a: Polynomial, kb: float, b: Polynomial) -> Polynomial:
    n = max(len(a.coeffs), len(b.coeffs))
    out = np.zeros(n)
    out[: len(a.coeffs)] += ka * np.asarray(a.coeffs)
    out[: len(b.coeffs)] += kb * np.asarray(b.coeffs)
    # no trimming: Carlson coefficients are exact integer combinations
    end = len(out)
    while end > 1 and out[end - 1] == 0.0:
        end -= 1
    return Polynomial(out[:end])


# --- Matsuda (continued-fraction interpolation) ----------------------------------

def matsuda(nu: float, band: CroneConfig) -> RationalTF:
    """Continued-fraction rational interpolant of w**nu at 2N+1 log-spaced points.

    Sample points sit at the midpoints of 2N+1 equal log-cells spanning the band
    (cell-centred sampling has measurably lower minimax error than edge-inclusive
    spacing at equal order). The result is biproper with N poles and matches the
    target exactly at every sample point.
    """
    nu = _check_nu(nu)
    if nu == 0.0:
        return RationalTF.constant(1.0)
    if abs(nu) >= 1.0:
        raise OrderOutOfRange("matsuda supports |nu| < 1")
    m = 2 * band.n_pairs + 1
    edges = np.linspace(
        math.log10(band.omega_low_rad_s), math.log10(band.omega_high_rad_s), m + 1
    )
    x = 10.0 ** ((edges[:-1] + edges[1:]) / 2.0)
    targets = x ** nu
    a, nodes = _thiele_coefficients(x, targets)
    return _flatten_continued_fraction(a, nodes)


def matsuda_points(
    points: np.ndarray, targets: np.ndarray, allow_early_exact: bool = False
) -> RationalTF:
    """General continued-fraction interpolant through (points, targets).

    Used by the filter realizations to fit arbitrary positive real-axis samples.
    With ``allow_early_exact`` the recursion may terminate early when the target
    is itself rational of lower order (all remaining divided differences vanish),
    returning the exact lower-order interpolant instead of erroring.
    """
    a, nodes = _thiele_coefficients(
        np.asarray(points, float), np.asarray(targets, float), allow_early_exact
    )
    return _flatten_continued_fraction(a, nodes)


def _thiele_coefficients(
    x: np.ndarray, f: np.ndarray, allow_early_exact: bool = False
) -> tuple[list[float], np.ndarray]:
    m = len(x)
    a: list[float] = []
    d = np.asarray(f, dtype=float).copy()
    alive = np.ones(m, dtype=bool)
    for i in range(m):
        a.append(float(d[i]))
        if i == m - 1:
            break
        diffs = d[i + 1 :] - a[i]
        small = np.abs(diffs) < 1e-12
        if np.any(small):
            if allow_early_exact and np.all(small):
                break  # target already matched exactly by the partial fraction
            raise DegenerateInterpolation(
                f"divided difference below 1e-12 at stage {i} "
                "(sample points too close or order pathological)"
            )
        d[i + 1 :] = (x[i + 1 :] - x[i]) / diffs
    return a, x[: len(a)]


def _flatten_continued_fraction(a: list[float], x: np.ndarray) -> RationalTF:
    """Collapse a_0 + (s-x0)/(a_1 + (s-x1)/(...)) into a single rational function."""
    m = len(a)
    num = np.array([a[m - 1]])
    den = np.array([1.0])
    for i in range(m - 2, -1, -1):
        lin = np.array([-x[i], 1.0])
        t = np.convolve(lin, den)
        base = a[i] * num
        new = np.zeros(max(len(base), len(t)))
        new[: len(base)] += base
        new[: len(t)] += t
        num, den = new, num
    return RationalTF.from_coeffs(num, den)


# --- discrete methods (generating map + series + truncation) ---------------------

# second root pair of the TOBFD generating cubic 11 - 18x + 9x^2 - 2x^3
_TOBFD_BASE = complex(-7.0 / 4.0, -math.sqrt(39.0) / 4.0)


def _tustin_series(v: float, n_terms: int) -> np.ndarray:
    """Power-series coefficients of ((1-x)/(1+x))**v, x = z**-1."""
    c = np.empty(n_terms)
    for k in range(n_terms):
        c[k] = sum(
            _frac_binom(v, j) * (-1) ** j * _frac_binom(-v, k - j) for j in range(k + 1)
        )
    return c


def _sobfd_series(v: float, n_terms: int) -> np.ndarray:
    """Power-series coefficients of (3 - 4x + x**2)**v = ((1-x)(3-x))**v."""
    c = np.empty(n_terms)
    for k in range(n_terms):
        c[k] = sum(
            _frac_binom(v, j) * 3.0 ** (v - j) * (-1) ** k * _frac_binom(v, k - j)
            for j in range(k + 1)
        )
    return c


def _tobfd_series(v: float, n_terms: int) -> np.ndarray:
    """Power-series coefficients of ((11 - 18x + 9x^2 - 2x^3)/2)**v.

    The cubic factors as 2(1-x)(x+b)(x+conj(b)); the conjugate pairing makes the
    coefficients real in exact arithmetic. Any residual imaginary part beyond
    1e-9 relative aborts (the method is known to produce unusable complex results
    in pathological configurations).
    """
    b = _TOBFD_BASE
    bb = b.conjugate()
    c = np.empty(n_terms, dtype=complex)
    for k in range(n_terms):
        s = 0j
        for t in range(k + 1):
            for p in range(t + 1):
                s += (
                    _frac_binom(v, p)
                    * (-1) ** p
                    * _frac_binom(v, t - p)
                    * b ** (v - t + p)
                    * _frac_binom(v, k - t)
                    * bb ** (v - k + t)
                )
        c[k] = s
    scale = np.abs(c.real).max()
    if scale > 0 and np.abs(c.imag).max() > 1e-9 * scale:
        raise ComplexResidue(
            f"imaginary residue {np.abs(c.imag).max() / scale:.3e} exceeds 1e-9"
        )
    return c.real


def pade_from_series(c: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """[n/n] Pade approximant of sum c_k x^k; needs len(c) >= 2n+1.

    Returns (num, den) coefficient arrays in ascending powers of x with den[0]=1.
    Solved in least squares so confluent (lower-order-exact) cases still work.
    """
    A = np.zeros((n, n))
    rhs = -c[n + 1 : 2 * n + 1]
    for i in range(n):
        for m_ in range(1, n + 1):
            idx = n + 1 + i - m_
            if idx >= 0:
                A[i, m_ - 1] = c[idx]
    bcoef, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    den = np.concatenate([[1.0], bcoef])
    num = np.array(
        [sum(den[m_] * c[k - m_] for m_ in range(0, min(k, n) + 1)) for k in range(n + 1)]
    )
    return num, den


def _zinv_to_z(num_x: np.ndarray, den_x: np.ndarray, t: float) -> RationalTF:
    """Rewrite num(x)/den(x), x = z**-1, as a rational in z (ascending degree)."""
    n = max(len(num_x), len(den_x)) - 1
    num_z = np.zeros(n + 1)
    den_z = np.zeros(n + 1)
    num_z[n - (len(num_x) - 1) :] = num_x[::-1]
    den_z[n - (len(den_x) - 1) :] = den_x[::-1]
    return RationalTF.from_coeffs(num_z, den_z, Domain.DISCRETE_Z, t)


def cfe_discretize(nu: float, cfg: CfeConfig, method: CfeMethod) -> RationalTF:
    """Discrete-domain approximation of s**nu with numerator and denominator of
    degree N in z**-1 (hence N poles in z).

    The generating map is raised to the fractional power, expanded as a power
    series in z**-1 through the explicit binomial-product summations, and the
    expansion is truncated to its [N/N] continued-fraction convergent.
    """
    nu = _check_nu(nu)
    if abs(nu) > 1.0:
        raise OrderOutOfRange("discrete methods support |nu| <= 1")
    if nu == 0.0:
        return RationalTF.from_coeffs([1.0], [1.0], Domain.DISCRETE_Z, cfg.sample_period_s)
    n = cfg.order
    t = cfg.sample_period_s
    n_terms = 2 * n + 1
    if method is CfeMethod.TUSTIN:
        c = _tustin_series(nu, n_terms) * (2.0 / t) ** nu
    elif method is CfeMethod.SOBFD:
        c = _sobfd_series(nu, n_terms) / (2.0 * t) ** nu
    elif method is CfeMethod.TOBFD:
        c = _tobfd_series(nu, n_terms) / (3.0 * t) ** nu
    else:  # pragma: no cover
        raise ValueError(method)
    if not np.all(np.isfinite(c)):
        raise ComplexResidue("series coefficients are not finite")
    num_x, den_x = pade_from_series(c, n)
    return _zinv_to_z(num_x, den_x, t)
