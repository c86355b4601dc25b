"""Polynomial and rational transfer-function algebra, frequency evaluation,
loop interconnection, and the four closed-loop sensitivity functions.

Conventions
-----------
* Polynomial coefficients are stored ascending in degree: ``coeffs[k]`` multiplies
  ``x**k``.
* User-facing frequencies are always Hz; evaluation converts internally via
  ``omega = 2 * pi * f``.
* Continuous systems are evaluated at ``s = j*omega``; discrete systems at
  ``z = exp(j*omega*T)``.
* No pole-zero cancellation is ever performed. Margins and responses are computed
  from frequency data, which is insensitive to uncancelled common factors.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import AboveNyquist, DomainMismatch, OutsideFrdRange

__all__ = [
    "Polynomial",
    "Domain",
    "RationalTF",
    "FrdData",
    "PlantModel",
    "FreqResponse",
    "PolyOp",
    "ComposeOp",
    "SensitivityKind",
    "poly_arith",
    "tf_compose",
    "eval_response",
    "sensitivity",
    "interp_frd",
]

#: Relative threshold for recognizing a cancelled coefficient as residue noise.
COEFF_TRIM_REL = 1e-14


def _trim(coeffs: Sequence[float]) -> tuple[float, ...]:
    """Drop exactly-zero trailing (high-degree) coefficients."""
    arr = [float(c) for c in coeffs]
    if not arr:
        return (0.0,)
    end = len(arr)
    while end > 1 and arr[end - 1] == 0.0:
        end -= 1
    return tuple(arr[:end])


def _trim_cancelled(result: np.ndarray, scale_per_degree: np.ndarray) -> tuple[float, ...]:
    """Drop trailing coefficients that are cancellation residue.

    A coefficient is residue when it is below COEFF_TRIM_REL times the magnitude
    of the contributions that summed into it (per degree, not a global maximum:
    a global threshold would amputate the genuinely small leading coefficients
    of wide-frequency-range polynomials).
    """
    end = len(result)
    while end > 1 and abs(result[end - 1]) <= COEFF_TRIM_REL * scale_per_degree[end - 1]:
        end -= 1
    out = tuple(float(c) for c in result[:end])
    if len(out) == 1 and abs(out[0]) <= COEFF_TRIM_REL * scale_per_degree[0]:
        return (0.0,)
    return out


@dataclass(frozen=True)
class Polynomial:
    """Real polynomial with ascending-degree coefficients.

    The coefficient list is nonempty, all entries finite, and the leading
    (highest-degree) coefficient is nonzero unless the polynomial is the literal
    zero polynomial ``(0.0,)``.
    """

    coeffs: tuple[float, ...]

    def __init__(self, coeffs: Iterable[float]):
        cs = tuple(float(c) for c in coeffs)
        if not cs:
            raise ValueError("polynomial needs at least one coefficient")
        if any(not math.isfinite(c) for c in cs):
            raise ValueError("polynomial coefficients must be finite")
        if len(cs) > 1 and cs[-1] == 0.0:
            raise ValueError("leading coefficient must be nonzero (pass a trimmed list)")
        object.__setattr__(self, "coeffs", cs)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return self.coeffs == (0.0,)

    def __call__(self, x):
        """Evaluate at a scalar or ndarray (real or complex) via Horner."""
        acc = np.zeros_like(np.asarray(x), dtype=complex) if isinstance(x, np.ndarray) else 0j
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def scaled(self, k: float) -> "Polynomial":
        if k == 0.0:
            return Polynomial((0.0,))
        return Polynomial(tuple(k * c for c in self.coeffs))

    def __repr__(self) -> str:
        return f"Polynomial({list(self.coeffs)})"


class PolyOp(enum.Enum):
    ADD = "add"
    MUL = "mul"


def poly_arith(a: Polynomial, b: Polynomial, op: PolyOp) -> Polynomial:
    """Exact coefficient arithmetic; trailing coefficients that cancel to
    double-precision residue (relative threshold 1e-14) are trimmed."""
    if op is PolyOp.ADD:
        n = max(len(a.coeffs), len(b.coeffs))
        out = np.zeros(n)
        scale = np.zeros(n)
        out[: len(a.coeffs)] += a.coeffs
        out[: len(b.coeffs)] += b.coeffs
        scale[: len(a.coeffs)] += np.abs(a.coeffs)
        scale[: len(b.coeffs)] += np.abs(b.coeffs)
        return Polynomial(_trim_cancelled(out, scale))
    if op is PolyOp.MUL:
        if a.is_zero or b.is_zero:
            return Polynomial((0.0,))
        # the leading convolution coefficient is a single product, never a
        # cancellation, so only exact zeros (possible through underflow) are
        # trimmed here
        return Polynomial(_trim(np.convolve(a.coeffs, b.coeffs)))
    raise ValueError(op)  # pragma: no cover - enum is closed


def _padd(a: Polynomial, b: Polynomial) -> Polynomial:
    return poly_arith(a, b, PolyOp.ADD)


def _pmul(a: Polynomial, b: Polynomial) -> Polynomial:
    return poly_arith(a, b, PolyOp.MUL)


class Domain(enum.Enum):
    CONTINUOUS_S = "s"
    DISCRETE_Z = "z"


@dataclass(frozen=True)
class RationalTF:
    """Real-coefficient rational function in s or z.

    ``sample_period_s`` is present exactly when the domain is discrete. Equality of
    the dataclass is structural (coefficient-level); ``equivalent_to`` compares up
    to a common scalar on the (num, den) pair.
    """

    num: Polynomial
    den: Polynomial
    domain: Domain = Domain.CONTINUOUS_S
    sample_period_s: float | None = None

    def __post_init__(self):
        if self.den.is_zero:
            raise ValueError("denominator must not be the zero polynomial")
        if self.domain is Domain.DISCRETE_Z:
            if self.sample_period_s is None or not self.sample_period_s > 0:
                raise ValueError("discrete system needs a positive sample period")
        elif self.sample_period_s is not None:
            raise ValueError("continuous system must not carry a sample period")

    # -- constructors ---------------------------------------------------------

    @staticmethod
    def from_coeffs(
        num: Iterable[float],
        den: Iterable[float],
        domain: Domain = Domain.CONTINUOUS_S,
        sample_period_s: float | None = None,
    ) -> "RationalTF":
        return RationalTF(
            Polynomial(_trim(list(num))), Polynomial(_trim(list(den))), domain, sample_period_s
        )

    @staticmethod
    def constant(k: float) -> "RationalTF":
        return RationalTF.from_coeffs([k], [1.0])

    @staticmethod
    def integrator() -> "RationalTF":
        """1/s."""
        return RationalTF.from_coeffs([1.0], [0.0, 1.0])

    @staticmethod
    def differentiator() -> "RationalTF":
        """s."""
        return RationalTF.from_coeffs([0.0, 1.0], [1.0])

    # -- introspection ---------------------------------------------------------

    @property
    def order(self) -> int:
        """max(deg num, deg den): the displayed controller order."""
        return max(self.num.degree, self.den.degree)

    @property
    def is_proper(self) -> bool:
        return self.num.degree <= self.den.degree

    def __call__(self, x) -> complex:
        """Evaluate at a point in the complex plane (s or z as appropriate)."""
        return self.num(x) / self.den(x)

    def equivalent_to(self, other: "RationalTF", rtol: float = 1e-9) -> bool:
        """True when (num, den) pairs agree up to one common nonzero scalar."""
        if self.domain is not other.domain or self.sample_period_s != other.sample_period_s:
            return False
        a = np.concatenate([self.num.coeffs, self.den.coeffs])
        b = np.concatenate([other.num.coeffs, other.den.coeffs])
        if len(self.num.coeffs) != len(other.num.coeffs) or len(a) != len(b):
            return False
        ia = int(np.argmax(np.abs(b)))
        if a[ia] == 0.0:
            return False
        k = b[ia] / a[ia]
        return bool(np.allclose(k * a, b, rtol=rtol, atol=rtol * np.abs(b).max()))

    def scaled(self, k: float) -> "RationalTF":
        return RationalTF(self.num.scaled(k), self.den, self.domain, self.sample_period_s)

    def __repr__(self) -> str:
        tag = "s" if self.domain is Domain.CONTINUOUS_S else f"z,T={self.sample_period_s}"
        return f"RationalTF({list(self.num.coeffs)}, {list(self.den.coeffs)}, {tag})"


@dataclass(frozen=True)
class FrdData:
    """Tabulated complex frequency response: strictly increasing positive Hz grid."""

    freqs_hz: tuple[float, ...]
    values: tuple[complex, ...]

    def __init__(self, freqs_hz: Iterable[float], values: Iterable[complex]):
        fs = tuple(float(f) for f in freqs_hz)
        vs = tuple(complex(v) for v in values)
        if len(fs) != len(vs):
            raise ValueError("frequency and value lengths differ")
        if len(fs) < 2:
            raise ValueError("need at least 2 frequency points")
        if fs[0] <= 0 or any(not math.isfinite(f) for f in fs):
            raise ValueError("frequencies must be positive and finite")
        if any(b <= a for a, b in zip(fs, fs[1:])):
            raise ValueError("frequencies must be strictly increasing")
        if any(not (math.isfinite(v.real) and math.isfinite(v.imag)) for v in vs):
            raise ValueError("values must be finite")
        object.__setattr__(self, "freqs_hz", fs)
        object.__setattr__(self, "values", vs)

    @property
    def f_min_hz(self) -> float:
        return self.freqs_hz[0]

    @property
    def f_max_hz(self) -> float:
        return self.freqs_hz[-1]


@dataclass(frozen=True)
class PlantModel:
    """Either a rational transfer function or measured frequency-response data."""

    tf: RationalTF | None = None
    frd: FrdData | None = None

    def __post_init__(self):
        if (self.tf is None) == (self.frd is None):
            raise ValueError("exactly one of tf/frd must be given")

    @property
    def is_frd(self) -> bool:
        return self.frd is not None

    @staticmethod
    def from_tf(tf: RationalTF) -> "PlantModel":
        return PlantModel(tf=tf)

    @staticmethod
    def from_frd(frd: FrdData) -> "PlantModel":
        return PlantModel(frd=frd)


@dataclass(frozen=True, eq=False)
class FreqResponse:
    """Computed complex response on an ascending Hz grid (never imported)."""

    freqs_hz: np.ndarray
    values: np.ndarray

    def __init__(self, freqs_hz, values):
        f = np.asarray(freqs_hz, dtype=float)
        v = np.asarray(values, dtype=complex)
        if f.shape != v.shape or f.ndim != 1:
            raise ValueError("freqs and values must be equal-length 1-D arrays")
        if f.size < 1 or np.any(f <= 0) or not np.all(np.isfinite(f)):
            raise ValueError("frequencies must be positive and finite")
        if np.any(np.diff(f) <= 0):
            raise ValueError("frequencies must be strictly increasing")
        f.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "freqs_hz", f)
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return int(self.freqs_hz.size)


class ComposeOp(enum.Enum):
    SERIES = "series"
    PARALLEL = "parallel"
    FEEDBACK = "feedback"


def tf_compose(a: RationalTF, b: RationalTF, op: ComposeOp) -> RationalTF:
    """Interconnect two rational functions without cancelling common factors.

    Series = a*b, Parallel = a+b, Feedback = a/(1 + a*b) (the unity-feedback
    closure when b is the constant 1).
    """
    if a.domain is not b.domain:
        raise DomainMismatch(f"{a.domain.value!r} vs {b.domain.value!r}")
    if a.domain is Domain.DISCRETE_Z and a.sample_period_s != b.sample_period_s:
        raise DomainMismatch(
            f"sample periods differ: {a.sample_period_s} vs {b.sample_period_s}"
        )
    if op is ComposeOp.SERIES:
        num = _pmul(a.num, b.num)
        den = _pmul(a.den, b.den)
    elif op is ComposeOp.PARALLEL:
        num = _padd(_pmul(a.num, b.den), _pmul(b.num, a.den))
        den = _pmul(a.den, b.den)
    elif op is ComposeOp.FEEDBACK:
        num = _pmul(a.num, b.den)
        den = _padd(_pmul(a.den, b.den), _pmul(a.num, b.num))
    else:  # pragma: no cover
        raise ValueError(op)
    return RationalTF(num, den, a.domain, a.sample_period_s)


def interp_frd(freqs_hz: np.ndarray, values: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Interpolate tabulated complex data: linear in (log f, Re) and (log f, Im).

    Exact (bit-for-bit) at tabulated frequencies; raises OutsideFrdRange beyond
    the table (no extrapolation).
    """
    f = np.asarray(f, dtype=float)
    if np.any(f < freqs_hz[0]) or np.any(f > freqs_hz[-1]):
        raise OutsideFrdRange(
            f"requested {f.min():g}..{f.max():g} Hz outside "
            f"[{freqs_hz[0]:g}, {freqs_hz[-1]:g}] Hz"
        )
    logf = np.log(freqs_hz)
    out = np.empty(f.shape, dtype=complex)
    idx = np.searchsorted(freqs_hz, f)
    exact = (idx < len(freqs_hz)) & (freqs_hz[np.minimum(idx, len(freqs_hz) - 1)] == f)
    out[exact] = values[idx[exact]]
    rest = ~exact
    if np.any(rest):
        re = np.interp(np.log(f[rest]), logf, values.real)
        im = np.interp(np.log(f[rest]), logf, values.imag)
        out[rest] = re + 1j * im
    return out


System = Union[PlantModel, RationalTF]


def eval_response(sys: System, freqs_hz) -> FreqResponse:
    """Evaluate a system on an Hz grid.

    Continuous rationals at s = j*2*pi*f; discrete at z = exp(j*2*pi*f*T) with
    every frequency strictly below Nyquist; measured data exactly at its own grid
    points and log-frequency interpolated between them.
    """
    f = np.asarray(freqs_hz, dtype=float)
    if isinstance(sys, PlantModel):
        if sys.is_frd:
            frd = sys.frd
            vals = interp_frd(np.asarray(frd.freqs_hz), np.asarray(frd.values), f)
            return FreqResponse(f, vals)
        sys = sys.tf
    if sys.domain is Domain.CONTINUOUS_S:
        x = 2j * np.pi * f
    else:
        t = sys.sample_period_s
        nyq = 0.5 / t
        if np.any(f >= nyq):
            raise AboveNyquist(f"frequencies must be < {nyq:g} Hz (T = {t:g} s)")
        x = np.exp(2j * np.pi * f * t)
    return FreqResponse(f, sys.num(x) / sys.den(x))


class SensitivityKind(enum.Enum):
    COMPLEMENTARY = "complementary"      # y/r = PC/(1+PC)
    PROCESS = "process"                  # y/d = P/(1+PC)
    CONTROL = "control"                  # u/r = C/(1+PC)
    SENSITIVITY = "sensitivity"          # y/n magnitude path, e/r = 1/(1+PC)


def sensitivity(
    plant: System, controller: RationalTF, which: SensitivityKind, freqs_hz
) -> FreqResponse:
    """Closed-loop sensitivity function, computed pointwise on evaluated responses.

    Works identically for rational and measured plants because only the evaluated
    complex responses enter the arithmetic.
    """
    f = np.asarray(freqs_hz, dtype=float)
    p = eval_response(plant, f).values
    c = eval_response(controller, f).values
    one_plus_l = 1.0 + p * c
    if which is SensitivityKind.COMPLEMENTARY:
        vals = p * c / one_plus_l
    elif which is SensitivityKind.PROCESS:
        vals = p / one_plus_l
    elif which is SensitivityKind.CONTROL:
        vals = c / one_plus_l
    elif which is SensitivityKind.SENSITIVITY:
        vals = 1.0 / one_plus_l
    else:  # pragma: no cover
        raise ValueError(which)
    return FreqResponse(f, vals)
