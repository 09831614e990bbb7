"""Arbitrary-precision real arithmetic under an explicit decimal-digit budget.

Every other module computes against a PrecisionContext.  A "Real" is simply
an mpf bound to the context's own mpmath context, so arithmetic between
Reals of the same context is carried out at that context's precision and is
fully deterministic.  Contexts are independent objects, never global state,
so runs at different precisions can coexist (and run in parallel).
"""

import re

from mpmath.ctx_mp import MPContext
from mpmath.libmp import fhalf, mpf_add, to_int

__all__ = [
    "PrecisionContext",
    "UnsupportedConstantError",
    "with_precision",
    "eval_constant",
    "nearest_int",
    "real_to_str",
    "str_to_real",
]

MIN_DIGITS = 10

_CONSTANT_RE = re.compile(
    r"^(?:pi|ln2|sqrt\((\d+)\)|nthroot\((\d+)\s*,\s*(\d+)\))$"
)


class UnsupportedConstantError(ValueError):
    """Raised for a symbolic constant id outside the supported vocabulary."""


class PrecisionContext:
    """A fixed decimal-digit working precision plus its private mpmath context.

    All Reals produced through this object carry at least ``digits``
    significant decimal digits; +, -, *, / and sqrt are accurate to one unit
    in the last retained digit (mpmath's correctly-rounded mpf contract).
    Read-only after construction.
    """

    def __init__(self, digits):
        if not isinstance(digits, int) or digits < MIN_DIGITS:
            raise ValueError(
                f"working precision must be an integer >= {MIN_DIGITS} "
                f"decimal digits, got {digits!r}"
            )
        self.digits = digits
        mp = MPContext()
        mp.dps = digits
        self.mp = mp

    def __repr__(self):
        return f"PrecisionContext(digits={self.digits})"

    def __eq__(self, other):
        return isinstance(other, PrecisionContext) and other.digits == self.digits

    # -- Real construction ------------------------------------------------

    def real(self, x):
        """Coerce ``x`` (int, float, str or mpf) to a Real of this context."""
        if isinstance(x, str):
            return self.mp.mpf(x.strip())
        return self.mp.mpf(x)

    def sqrt(self, x):
        return self.mp.sqrt(self.real(x))

    @property
    def pi(self):
        return +self.mp.pi

    @property
    def ln2(self):
        return self.mp.ln(2)

    @property
    def eps(self):
        """One unit in the last retained decimal digit, relative to 1."""
        return self.mp.mpf(10) ** (-self.digits)


def with_precision(digits):
    """Create a PrecisionContext with ``digits`` decimal digits (>= 10)."""
    return PrecisionContext(digits)


def eval_constant(name, ctx):
    """Evaluate a symbolic constant id to ``ctx.digits`` correct digits.

    Supported ids: ``pi``, ``ln2``, ``sqrt(k)`` for integer k >= 2, and
    ``nthroot(k, d)`` (the d-th root of k).
    """
    m = _CONSTANT_RE.match(name.strip())
    if not m:
        raise UnsupportedConstantError(f"unknown constant id {name!r}")
    if name.strip() == "pi":
        return ctx.pi
    if name.strip() == "ln2":
        return ctx.ln2
    if m.group(1) is not None:
        k = int(m.group(1))
        if k < 2:
            raise UnsupportedConstantError(f"sqrt argument must be >= 2, got {k}")
        return ctx.sqrt(k)
    k, d = int(m.group(2)), int(m.group(3))
    if k < 1 or d < 1:
        raise UnsupportedConstantError(f"bad nthroot arguments in {name!r}")
    return ctx.mp.root(ctx.real(k), d)


def nearest_int(x):
    """Round to the nearest integer, ties toward +inf: floor(x + 1/2).

    Exact regardless of any working precision: the addition of 1/2 and the
    floor are both performed on the unrounded binary representation.  Note
    the tie direction (2.5 -> 3, -2.5 -> -2) is part of the contract and
    differs from round-half-even.
    """
    if isinstance(x, int):
        return x
    if isinstance(x, float):
        import math

        return math.floor(x + 0.5)
    return int(to_int(mpf_add(x._mpf_, fhalf, 0, "f"), "f"))


def real_to_str(x, digits=None):
    """Serialize a Real as scientific notation with explicit digit count.

    Format: ``<mantissa>e<exp>@<digits>``, e.g. ``3.1415926536e0@11``.
    """
    ctx = getattr(x, "context", None)
    if digits is None:
        digits = ctx.dps if ctx is not None else 17
    if ctx is not None:
        s = ctx.nstr(x, digits, min_fixed=1, max_fixed=0)
    else:
        s = repr(float(x))
    if "e" not in s and "inf" not in s and "nan" not in s:
        s += "e0"
    return f"{s}@{digits}"


def str_to_real(s, ctx=None):
    """Parse the ``real_to_str`` format back into a Real.

    The trailing ``@N`` digit count selects the parse precision when no
    context is supplied.
    """
    body, sep, count = s.rpartition("@")
    if not sep:
        body, count = s, None
    if ctx is None:
        digits = max(int(count), MIN_DIGITS) if count else 2 * MIN_DIGITS
        ctx = PrecisionContext(digits)
    return ctx.real(body)
