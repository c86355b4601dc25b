"""Exception hierarchy shared by all fracshape modules.

Every domain error derives from FracshapeError so callers (CLI, HTTP service)
can map failures uniformly; the class name doubles as the wire-level error code.
"""


class FracshapeError(Exception):
    """Base class for all domain errors."""

    @property
    def name(self) -> str:
        return type(self).__name__


# --- transfer-function core ---------------------------------------------------

class DomainMismatch(FracshapeError):
    """Operands live in different domains (s vs z) or have unequal sample periods."""


class AboveNyquist(FracshapeError):
    """A requested frequency is at or above the Nyquist frequency of a discrete system."""


class OutsideFrdRange(FracshapeError):
    """A requested frequency lies outside a measured frequency-response grid."""


# --- fractional approximation -------------------------------------------------

class PoleArgument(FracshapeError):
    """Gamma function requested at a non-positive integer."""


class OrderOutOfRange(FracshapeError):
    """Fractional order outside the range a method supports."""


class UnsupportedOrder(FracshapeError):
    """Carlson iteration requires 1/nu to be a nonzero integer."""


class IterationBudget(FracshapeError):
    """Carlson iteration would exceed the polynomial degree budget."""


class DegenerateInterpolation(FracshapeError):
    """Matsuda recursion hit a near-zero divisor at a sample point."""


class ComplexResidue(FracshapeError):
    """Discrete approximation left a non-negligible imaginary residue."""


# --- filters ------------------------------------------------------------------

class InvalidSpec(FracshapeError):
    """A filter specification violates its parameter contract."""


# --- analysis -----------------------------------------------------------------

class InsufficientGrid(FracshapeError):
    """Margin computation needs at least 10 points spanning at least a decade."""


# --- time simulation ----------------------------------------------------------

class ImproperTransferFunction(FracshapeError):
    """Numerator degree exceeds denominator degree where a proper function is required."""


class BilinearSingularity(FracshapeError):
    """Continuous system has a pole at exactly 2/T, where the bilinear map blows up."""


class FrdPlantUnsupported(FracshapeError):
    """Time simulation is unavailable for plants given as measured frequency response."""


class InvalidSignal(FracshapeError):
    """A signal specification violates its shape/role contract."""


# --- session / file formats ---------------------------------------------------

class MalformedRow(FracshapeError):
    """A data file row failed to parse; carries the 1-based line number."""

    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class NonMonotoneFrequencies(FracshapeError):
    """Frequency column is not strictly increasing."""


class MixedColumnSchemas(FracshapeError):
    """File header does not match exactly one supported column schema."""


class VersionUnsupported(FracshapeError):
    """Session document has an unknown format version."""


class SchemaViolation(FracshapeError):
    """Session document field failed validation; carries the field path."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


class UnknownName(FracshapeError):
    """A referenced controller or session does not exist."""
