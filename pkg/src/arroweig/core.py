"""Shift-and-invert eigensolver core for ordered irreducible arrowhead matrices.

The k-th eigenvalue is obtained as ``lambda = d_i + 1/nu`` where ``d_i`` is
the pole nearest to it and ``nu`` is an extreme eigenvalue of the shifted
inverse ``(A - d_i I)^{-1}``.  The inverse is again an arrowhead matrix up
to a symmetric permutation, so the same bisection routine locates its
leftmost or rightmost eigenvalue.  All entries of the inverse are exact up
to a few rounding errors except the single element ``b`` on the shaft,
which can suffer cancellation; callers may request it in doubled precision.

Eigenvalue and shift indices in the public functions are 1-based and
eigenvalues are ordered decreasingly (lambda_1 is the largest), matching
the usual statement of the interlacing property.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dd import DoubleDouble, dd_add, dd_div, dd_mul, dd_sub, two_prod, two_sum
from .errors import PoleError
from .matrices import ArrowheadMatrix

__all__ = [
    "EPS",
    "BISECT_ITER_CAP",
    "ShiftedInverseRep",
    "EigenPair",
    "pick_eval",
    "bisect_extreme",
    "eigvec",
    "choose_shift",
    "shifted_inverse",
    "aheig_basic",
]

EPS = float(np.finfo(float).eps)  # 2**-52
_TINY = float(np.finfo(float).tiny)
# 4 * (significand bits) + 10; guards against stalls under nonmonotone rounding
BISECT_ITER_CAP = 4 * 53 + 10


def _check_side(side):
    if side not in ("L", "R"):
        raise ValueError(f"side must be 'L' or 'R', got {side!r}")


class SingularShaftTip(ArithmeticError):
    """The doubled-precision tip of the inverse cancelled to exact zero.

    The shifted matrix is numerically singular; the shift pole itself is an
    eigenvalue to working precision, with the corresponding unit eigenvector.
    """


# ---------------------------------------------------------------------------
# Shift sources: exact shift-dependent quantities.
#
# The derived solvers (squared-pole arrowheads from triangular SVD, reduced
# DPR1 matrices, Hermitian moduli) must form pole differences and the
# doubled-precision tip from their original data to keep relative accuracy;
# they do so by subclassing _ShiftSource.
# ---------------------------------------------------------------------------

class _ShiftSource:
    """Plain arrowhead data with its shift-dependent quantities.

    Indices here are 0-based.  ``lo`` arrays carry double-double trailing
    parts of decimal-promoted inputs and only affect the doubled-precision
    tip computation.
    """

    def __init__(self, d, z, alpha, d_lo=None, z_lo=None, alpha_lo=0.0):
        self.d = np.asarray(d, dtype=float)
        self.z = np.asarray(z, dtype=float)
        self.alpha = float(alpha)
        self.d_lo = d_lo
        self.z_lo = z_lo
        self.alpha_lo = float(alpha_lo)
        self.z2 = self.z * self.z
        if not np.all(np.isfinite(self.z2)):
            raise OverflowError("coupling weights overflow in working precision")

    @classmethod
    def from_matrix(cls, A: ArrowheadMatrix):
        return cls(A.d, A.z, A.alpha, A.d_lo, A.z_lo, A.alpha_lo)

    @property
    def n(self):
        return self.d.size + 1

    # -- working precision hooks --------------------------------------------

    def pole_diffs(self, i):
        """d - d[i]; entry i is exactly zero."""
        out = self.d - self.d[i]
        out[i] = 0.0
        return out

    def tip_shift(self, i):
        return self.alpha - self.d[i]

    # -- doubled precision hooks --------------------------------------------

    def _d_dd(self, j):
        if self.d_lo is None:
            return DoubleDouble.from_float(self.d[j])
        return two_sum(self.d[j], self.d_lo[j])

    def _z_dd(self, j):
        if self.z_lo is None:
            return DoubleDouble.from_float(self.z[j])
        return two_sum(self.z[j], self.z_lo[j])

    def _alpha_dd(self):
        return two_sum(self.alpha, self.alpha_lo)

    def zeta_sq_dd(self, j):
        zj = self._z_dd(j)
        return dd_mul(zj, zj)

    def pole_dd(self, j):
        """The j-th pole of the (possibly derived) arrowhead as a double-double."""
        return self._d_dd(j)

    def tip_dd(self):
        return self._alpha_dd()

    def extreme_direct(self, side):
        """Cached direct bisection of the matrix itself for one extreme."""
        cache = getattr(self, "_direct_extremes", None)
        if cache is None:
            cache = self._direct_extremes = {}
        if side not in cache:
            cache[side] = bisect_extreme(self.d, self.z, self.alpha, side)
        return cache[side]

    def neg_tip_terms_dd(self, i):
        """Terms summing to -(alpha - d_i), each routed by its own sign."""
        return [dd_sub(self._d_dd(i), self._alpha_dd())]

    def pole_term_dd(self, i, j):
        """zeta_j^2 / (d_j - d_i) in doubled precision."""
        return dd_div(self.zeta_sq_dd(j), dd_sub(self._d_dd(j), self._d_dd(i)))

    # -- tip of the shifted inverse ------------------------------------------

    def b_standard(self, i):
        diffs = self.pole_diffs(i)
        a = self.tip_shift(i)
        s1 = float(np.sum(self.z2[:i] / diffs[:i])) if i else 0.0
        s2 = float(np.sum(self.z2[i + 1:] / diffs[i + 1:])) if i + 1 < self.d.size else 0.0
        return ((-a + s1) + s2) / (self.z[i] * self.z[i])

    def b_doubled(self, i):
        """Tip via the sign-split accumulation: every added term is >= 0.

        Raises :class:`SingularShaftTip` when the positive and negative
        accumulations cancel exactly.
        """
        pos = DoubleDouble()
        neg = DoubleDouble()
        for t in self.neg_tip_terms_dd(i):
            if t.hi >= 0.0:
                pos = dd_add(pos, t)
            else:
                neg = dd_sub(neg, t)
        for j in range(self.d.size):
            if j == i:
                continue
            t = self.pole_term_dd(i, j)
            if t.hi >= 0.0:
                pos = dd_add(pos, t)
            else:
                neg = dd_sub(neg, t)
        num = dd_sub(pos, neg)
        if num.hi == 0.0 and num.lo == 0.0:
            raise SingularShaftTip
        return dd_div(num, self.zeta_sq_dd(i))

    def cancellation_kb(self, i):
        """Cancellation condition number of the inverse tip, Kb.

        +inf signals an exactly zero working-precision denominator.
        """
        diffs = self.pole_diffs(i)
        a = self.tip_shift(i)
        s1 = float(np.sum(self.z2[:i] / diffs[:i])) if i else 0.0
        s2 = float(np.sum(self.z2[i + 1:] / diffs[i + 1:])) if i + 1 < self.d.size else 0.0
        den = (-a + s1) + s2
        num = abs(a) + abs(s1) + abs(s2)
        if den == 0.0:
            return math.inf
        return num / abs(den)


# ---------------------------------------------------------------------------
# Secular function and bisection
# ---------------------------------------------------------------------------

def pick_eval(A: ArrowheadMatrix, lam: float) -> float:
    """Evaluate the secular function f(lam) = alpha - lam - sum z_i^2/(d_i - lam).

    Its zeros are the eigenvalues of ``A``.  Raises :class:`PoleError` when
    ``lam`` coincides with a diagonal entry.
    """
    lam = float(lam)
    if np.any(A.d == lam):
        raise PoleError(f"evaluation point {lam!r} is a pole")
    z2 = A.z * A.z
    if not np.all(np.isfinite(z2)):
        raise OverflowError("coupling weights overflow in working precision")
    return (A.alpha - lam) - float(np.sum(z2 / (A.d - lam)))


def _bisect_loop(feval, left, right, move_left_on_positive=True,
                 cap=BISECT_ITER_CAP):
    """Bisection with the relative stop (right-left)/|middle| <= 2 eps.

    Falls back to an absolute width test when the interval straddles zero
    and to an iteration cap to guarantee termination.  A zero (or NaN)
    function value moves the right endpoint.
    """
    two_eps = 2.0 * EPS
    middle = (left + right) / 2.0
    for _ in range(cap):
        width = right - left
        if middle == 0.0:
            if width <= _TINY:
                break
        elif width / abs(middle) <= two_eps:
            break
        F = feval(middle)
        go_left = (F > 0.0) if move_left_on_positive else (F < 0.0)
        if go_left:
            left = middle
        else:
            right = middle
        middle = (left + right) / 2.0
    return right


def bisect_extreme(d, z, alpha, side) -> float:
    """Leftmost (side='L') or rightmost (side='R') eigenvalue by bisection.

    Works for any symmetric arrowhead matrix: the diagonal need not be
    ordered and zero couplings are permitted.  The starting interval comes
    from Gershgorin-type bounds min/max over {d_i -+ |z_i|, alpha -+ ||z||_1},
    with the 1-norm accumulated exactly to keep the bracket tight.
    """
    _check_side(side)
    d = np.asarray(d, dtype=float)
    z = np.asarray(z, dtype=float)
    alpha = float(alpha)
    if d.shape != z.shape or d.ndim != 1 or d.size < 1:
        raise ValueError("d and z must be 1-d arrays of equal positive length")
    if not (np.all(np.isfinite(d)) and np.all(np.isfinite(z)) and np.isfinite(alpha)):
        raise ValueError("bisection inputs must be finite")
    z2 = z * z
    if not np.all(np.isfinite(z2)):
        raise OverflowError("coupling weights overflow in working precision")

    zl1 = math.fsum(np.abs(z))
    if side == "L":
        left = min(float(np.min(d - np.abs(z))), alpha - zl1)
        right = float(np.min(d))
    else:
        right = max(float(np.max(d + np.abs(z))), alpha + zl1)
        left = float(np.max(d))
    if not (math.isfinite(left) and math.isfinite(right)):
        raise OverflowError("bisection interval overflows in working precision")

    # zero couplings contribute nothing to f, even at their own pole
    keep = z2 != 0.0
    dk = d[keep] if not keep.all() else d
    z2k = z2[keep] if not keep.all() else z2

    def feval(x):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            s = float(np.sum(z2k / (dk - x)))
        return (alpha - x) - s

    return _bisect_loop(feval, left, right, move_left_on_positive=True)


def _unit(x):
    nrm = float(np.linalg.norm(x))
    if math.isfinite(nrm) and nrm > 0.0:
        return x / nrm
    big = np.isinf(x)
    if big.any():
        v = np.zeros_like(x)
        v[big] = np.sign(x[big])
        return v / np.linalg.norm(v)
    m = float(np.max(np.abs(x)))
    y = x / m
    return y / np.linalg.norm(y)


def _eigvec_from_diffs(diffs, z, mu):
    """Unnormalized eigenvector from shifted pole distances, last entry -1."""
    with np.errstate(over="ignore"):
        x = np.empty(z.size + 1)
        x[:-1] = z / (diffs - mu)
        x[-1] = -1.0
    return _unit(x)


def eigvec(d, z, lam) -> np.ndarray:
    """Unit eigenvector for eigenvalue ``lam``: x_j = z_j/(d_j - lam), x_n = -1.

    The sign convention keeps the last component negative before
    normalization, so the output is deterministic.
    """
    d = np.asarray(d, dtype=float)
    z = np.asarray(z, dtype=float)
    lam = float(lam)
    if np.any(d == lam):
        raise PoleError(f"eigenvalue {lam!r} coincides with a pole")
    return _eigvec_from_diffs(d - lam, z, 0.0)


# ---------------------------------------------------------------------------
# Shift selection, structured inverse, and the basic solver
# ---------------------------------------------------------------------------

def choose_shift(A, k, source=None):
    """Pole index (1-based) nearest to lambda_k and the side lambda_k is on.

    Exterior eigenvalues shift to the outermost poles; for interior ones the
    sign of f at the midpoint of the bracketing poles decides whether
    lambda_k is right of d_k or left of d_{k-1}.
    """
    src = source or _ShiftSource.from_matrix(A)
    n = src.n
    if not 1 <= k <= n:
        raise ValueError(f"k must be in 1..{n}, got {k}")
    if k == 1:
        return 1, "R"
    if k == n:
        return n - 1, "L"
    diffs = src.pole_diffs(k - 1)          # shift to the lower pole d_k
    atemp = src.tip_shift(k - 1)
    middle = diffs[k - 2] / 2.0
    with np.errstate(over="ignore"):
        fmiddle = (atemp - middle) - float(np.sum(src.z2 / (diffs - middle)))
    if fmiddle < 0.0:
        return k, "R"
    return k - 1, "L"


@dataclass
class ShiftedInverseRep:
    """Structured inverse of A - d_i I.

    As a matrix it is an arrowhead permuted so that row ``i`` becomes the
    shaft: diagonal blocks ``invD1``/``invD2`` flank a zero diagonal entry
    coupled through ``w_zeta = 1/zeta_i``, and ``b`` sits at position
    (i, i).  ``b`` is a float in working precision or a
    :class:`DoubleDouble` when doubled precision was requested.
    """

    invD1: np.ndarray
    invD2: np.ndarray
    w1: np.ndarray
    w2: np.ndarray
    w_zeta: float
    b: object
    shift_index: int      # 1-based
    shift_value: float

    def b_float(self):
        return float(self.b)

    def inverse_arrowhead(self):
        """The permuted-arrowhead view (diagonal, coupling, tip) of the inverse."""
        diag = np.concatenate([self.invD1, [0.0], self.invD2])
        coupling = np.concatenate([self.w1, [self.w_zeta], self.w2])
        return diag, coupling, self.b_float()


def shifted_inverse(A, i, precision="working", source=None) -> ShiftedInverseRep:
    """Structured inverse of the arrowhead shifted to its i-th pole (1-based).

    With ``precision='doubled'`` the tip ``b`` is accumulated in
    double-double arithmetic with positive and negative contributions kept
    separate, and returned as a :class:`DoubleDouble`.
    """
    src = source or _ShiftSource.from_matrix(A)
    n = src.n
    if not 1 <= i <= n - 1:
        raise ValueError(f"shift index must be in 1..{n - 1}, got {i}")
    if precision not in ("working", "doubled"):
        raise ValueError(f"precision must be 'working' or 'doubled', got {precision!r}")
    ii = i - 1
    diffs = src.pole_diffs(ii)
    zi = src.z[ii]
    invD1 = 1.0 / diffs[:ii]
    invD2 = 1.0 / diffs[ii + 1:]
    w1 = -(src.z[:ii] / diffs[:ii]) / zi
    w2 = -(src.z[ii + 1:] / diffs[ii + 1:]) / zi
    if precision == "doubled":
        b = src.b_doubled(ii)
    else:
        b = src.b_standard(ii)
    return ShiftedInverseRep(invD1, invD2, w1, w2, 1.0 / zi, b,
                             shift_index=i, shift_value=float(src.d[ii]))


@dataclass
class EigenPair:
    """Eigenvalue with its shift decomposition and unit eigenvector.

    ``lam == shift_value + mu`` up to one rounding; keeping the pair
    (shift_value, mu) preserves the eigenvalue to roughly doubled
    precision when no remedy was needed.
    """

    lam: float
    vector: np.ndarray
    shift_index: int | None   # 1-based pole index, None for non-pole shifts
    shift_value: float
    mu: float
    nu: float
    side: str | None
    flags: tuple = field(default_factory=tuple)

    def dd_value(self):
        """shift_value + mu as a double-double."""
        return two_sum(self.shift_value, self.mu)


def _pole_eigenpair(src, i, side, flag):
    """Exact eigenpair (d_i, e_i) for a numerically singular shift."""
    v = np.zeros(src.n)
    v[i - 1] = 1.0
    return EigenPair(float(src.d[i - 1]), v, i, float(src.d[i - 1]),
                     0.0, math.inf, side, flags=(flag,))


def _solve_at_shift(src, i, side, precision):
    """Run the inverse bisection at pole i (1-based); returns an EigenPair."""
    try:
        rep = shifted_inverse(None, i, precision=precision, source=src)
    except SingularShaftTip:
        return _pole_eigenpair(src, i, side, "numerically-singular-shift")
    diag, coupling, tip = rep.inverse_arrowhead()
    nu = bisect_extreme(diag, coupling, tip, side)
    if nu == 0.0:
        raise ArithmeticError("inverse bisection returned zero; inputs out of range")
    mu = 1.0 / nu
    vec = _eigvec_from_diffs(src.pole_diffs(i - 1), src.z, mu)
    lam = float(src.d[i - 1] + mu)
    return EigenPair(lam, vec, i, float(src.d[i - 1]), mu, nu, side)


def aheig_basic(A, k, precision="working", source=None) -> EigenPair:
    """k-th eigenpair of an ordered irreducible arrowhead matrix (Algorithm 1).

    ``precision`` selects how the tip of the shifted inverse is computed;
    everything else runs in working precision.
    """
    src = source or _ShiftSource.from_matrix(A)
    i, side = choose_shift(None, k, source=src)
    return _solve_at_shift(src, i, side, precision)
