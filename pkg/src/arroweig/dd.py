"""Double-double scalar arithmetic.

A value is kept as an unevaluated sum ``hi + lo`` of two IEEE doubles with
``hi = fl(hi + lo)``, which gives roughly twice the significand of the
working precision.  Only the operations the solvers need are provided:
add, subtract, multiply, divide, comparison, absolute value, square root
(one Newton step from a working-precision seed) and conversions.

The building blocks are the classic error-free transformations: Knuth's
branch-free two_sum and an error-free product.  The product uses
``math.fma`` when the interpreter provides it and falls back to Dekker
splitting otherwise; both variants satisfy the same error bounds.
"""

from __future__ import annotations

import math
from decimal import Decimal, InvalidOperation
from fractions import Fraction

__all__ = [
    "ULP_UNIT",
    "DoubleDouble",
    "two_sum",
    "two_prod",
    "dd_add",
    "dd_sub",
    "dd_mul",
    "dd_div",
    "dd_sqrt",
    "dd_abs",
    "dd_from_float",
    "dd_from_decimal_string",
]

# Machine precision of the working format (binary64): 2**-52.
ULP_UNIT = 2.0 ** -52

_HAVE_FMA = hasattr(math, "fma")

# Dekker splitter for binary64: 2**27 + 1.
_SPLITTER = 134217729.0


def _two_sum(a, b):
    """Knuth two_sum on raw floats; returns (s, e) with s + e == a + b."""
    s = a + b
    bb = s - a
    e = (a - (s - bb)) + (b - bb)
    return s, e


def _quick_two_sum(a, b):
    # requires |a| >= |b| or a == 0
    s = a + b
    e = b - (s - a)
    return s, e


def _split(a):
    t = _SPLITTER * a
    hi = t - (t - a)
    return hi, a - hi


def _two_prod_dekker(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    e = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, e


def _two_prod_fma(a, b):
    p = a * b
    return p, math.fma(a, b, -p)


_two_prod = _two_prod_fma if _HAVE_FMA else _two_prod_dekker


# ---------------------------------------------------------------------------
# Tuple kernels.  These are the hot path for the reference bisection; the
# DoubleDouble class below is a thin wrapper around them.
# ---------------------------------------------------------------------------

def _add(xh, xl, yh, yl):
    # Accurate (non-sloppy) addition; relative error O(ulp^2) even under
    # cancellation of the leading parts.
    sh, sl = _two_sum(xh, yh)
    th, tl = _two_sum(xl, yl)
    sl += th
    sh, sl = _quick_two_sum(sh, sl)
    sl += tl
    return _quick_two_sum(sh, sl)


def _neg(xh, xl):
    return -xh, -xl


def _mul(xh, xl, yh, yl):
    ph, pl = _two_prod(xh, yh)
    pl += xh * yl + xl * yh
    return _quick_two_sum(ph, pl)


def _div(xh, xl, yh, yl):
    q1 = xh / yh
    # r = x - q1*y
    th, tl = _mul(q1, 0.0, yh, yl)
    rh, rl = _add(xh, xl, -th, -tl)
    q2 = rh / yh
    th, tl = _mul(q2, 0.0, yh, yl)
    rh, rl = _add(rh, rl, -th, -tl)
    q3 = rh / yh
    qh, ql = _quick_two_sum(q1, q2)
    return _add(qh, ql, q3, 0.0)


def _sub_float(xh, xl, y):
    sh, sl = _two_sum(xh, -y)
    sl += xl
    return _quick_two_sum(sh, sl)


class DoubleDouble:
    """Unevaluated sum of two doubles: ``hi + lo`` with |lo| <= 1/2 ulp(hi)."""

    __slots__ = ("hi", "lo")

    def __init__(self, hi=0.0, lo=0.0):
        hi = float(hi)
        lo = float(lo)
        if lo != 0.0:
            hi, lo = _two_sum(hi, lo)
        elif hi == 0.0:
            lo = 0.0
        self.hi = hi
        self.lo = lo

    # -- constructors -------------------------------------------------------

    @staticmethod
    def from_float(x):
        return DoubleDouble(float(x), 0.0)

    @staticmethod
    def _raw(hi, lo):
        out = object.__new__(DoubleDouble)
        out.hi = hi
        out.lo = lo
        return out

    # -- conversions ---------------------------------------------------------

    def __float__(self):
        return self.hi

    def as_fraction(self):
        return Fraction(self.hi) + Fraction(self.lo)

    def is_finite(self):
        return math.isfinite(self.hi) and math.isfinite(self.lo)

    # -- arithmetic ----------------------------------------------------------

    def _coerce(other):
        if isinstance(other, DoubleDouble):
            return other
        if isinstance(other, (int, float)):
            return DoubleDouble.from_float(other)
        return None

    def __add__(self, other):
        o = DoubleDouble._coerce(other)
        if o is None:
            return NotImplemented
        return dd_add(self, o)

    __radd__ = __add__

    def __sub__(self, other):
        o = DoubleDouble._coerce(other)
        if o is None:
            return NotImplemented
        return dd_sub(self, o)

    def __rsub__(self, other):
        o = DoubleDouble._coerce(other)
        if o is None:
            return NotImplemented
        return dd_sub(o, self)

    def __mul__(self, other):
        o = DoubleDouble._coerce(other)
        if o is None:
            return NotImplemented
        return dd_mul(self, o)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = DoubleDouble._coerce(other)
        if o is None:
            return NotImplemented
        return dd_div(self, o)

    def __rtruediv__(self, other):
        o = DoubleDouble._coerce(other)
        if o is None:
            return NotImplemented
        return dd_div(o, self)

    def __neg__(self):
        return DoubleDouble._raw(-self.hi, -self.lo)

    def __abs__(self):
        return -self if self.hi < 0.0 else self

    # -- comparisons ---------------------------------------------------------

    def _cmp(self, other):
        o = DoubleDouble._coerce(other)
        if o is None:
            return NotImplemented
        if self.hi != o.hi:
            return -1 if self.hi < o.hi else 1
        if self.lo != o.lo:
            return -1 if self.lo < o.lo else 1
        return 0

    def __eq__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is NotImplemented else c == 0

    def __lt__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is NotImplemented else c < 0

    def __le__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is NotImplemented else c <= 0

    def __gt__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is NotImplemented else c > 0

    def __ge__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is NotImplemented else c >= 0

    def __hash__(self):
        return hash((self.hi, self.lo))

    def __repr__(self):
        return f"DoubleDouble({self.hi!r}, {self.lo!r})"


def _check_finite(hi, lo, op):
    if not (math.isfinite(hi) and math.isfinite(lo)):
        raise OverflowError(f"range error in double-double {op}")


def two_sum(a, b):
    """Error-free sum of two doubles: hi + lo == a + b exactly."""
    hi, lo = _two_sum(float(a), float(b))
    _check_finite(hi, lo, "two_sum")
    return DoubleDouble._raw(hi, lo)


def two_prod(a, b):
    """Error-free product of two doubles: hi + lo == a * b exactly."""
    hi, lo = _two_prod(float(a), float(b))
    _check_finite(hi, lo, "two_prod")
    return DoubleDouble._raw(hi, lo)


def dd_add(x, y):
    """Sum; relative error <= 4 ulp^2 of the working precision."""
    hi, lo = _add(x.hi, x.lo, y.hi, y.lo)
    _check_finite(hi, lo, "add")
    return DoubleDouble._raw(hi, lo)


def dd_sub(x, y):
    """Difference; relative error <= 4 ulp^2."""
    hi, lo = _add(x.hi, x.lo, -y.hi, -y.lo)
    _check_finite(hi, lo, "sub")
    return DoubleDouble._raw(hi, lo)


def dd_mul(x, y):
    """Product; relative error <= 8 ulp^2."""
    hi, lo = _mul(x.hi, x.lo, y.hi, y.lo)
    _check_finite(hi, lo, "mul")
    return DoubleDouble._raw(hi, lo)


def dd_div(x, y):
    """Quotient; relative error <= 16 ulp^2."""
    if y.hi == 0.0 and y.lo == 0.0:
        raise ZeroDivisionError("double-double division by zero")
    hi, lo = _div(x.hi, x.lo, y.hi, y.lo)
    _check_finite(hi, lo, "div")
    return DoubleDouble._raw(hi, lo)


def dd_abs(x):
    return abs(x)


def dd_sqrt(x):
    """Square root via one Newton step from the working-precision seed."""
    if x.hi < 0.0:
        raise ValueError("double-double sqrt of a negative value")
    if x.hi == 0.0:
        return DoubleDouble._raw(0.0, 0.0)
    s = math.sqrt(x.hi)
    # r = s + (x - s^2) / (2 s), with the residual formed error-free
    e = dd_sub(x, two_prod(s, s))
    hi, lo = _add(s, 0.0, e.hi / (2.0 * s), 0.0)
    return DoubleDouble._raw(hi, lo)


def dd_from_float(x):
    """Binary promotion: pads the significand with zeros, (x, 0)."""
    return DoubleDouble.from_float(x)


def dd_from_decimal_string(s):
    """Decimal promotion: correctly rounded double-double of a decimal literal.

    The string is interpreted as an exact decimal number (the reading under
    which trailing decimal digits beyond the 16th are zero) and rounded to
    the nearest double-double.
    """
    try:
        dec = Decimal(s)
    except InvalidOperation as exc:
        raise ValueError(f"invalid decimal literal: {s!r}") from exc
    if not dec.is_finite():
        raise ValueError(f"decimal literal must be finite: {s!r}")
    num, den = dec.as_integer_ratio()
    exact = Fraction(num, den)
    hi = float(exact)
    if not math.isfinite(hi):
        raise OverflowError(f"decimal literal overflows: {s!r}")
    lo = float(exact - Fraction(hi))
    return DoubleDouble._raw(*_two_sum(hi, lo))
