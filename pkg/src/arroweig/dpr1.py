"""Diagonal-plus-rank-one eigensolvers.

Two entry points: :func:`dpr1_extreme` finds the leftmost or rightmost
eigenvalue of diag(d) + rho*u*u^T by bisection on the rational function
phi (used when arrowhead eigenvalues are recovered from inverses), and
:func:`dpr1_eig` computes full eigenpairs of the rho = 1 class by reducing
the matrix to an arrowhead with one less row, solving that, and mapping
the eigenvector back through the reducing factor.
"""

from __future__ import annotations

import math

import numpy as np

from .core import _ShiftSource, _bisect_loop
from .dd import DoubleDouble, dd_add, dd_mul, two_prod, two_sum
from .errors import PoleError, UnsupportedFormError
from .matrices import DPR1Matrix

__all__ = ["phi_eval", "dpr1_extreme", "dpr1_eig"]


def phi_eval(m: DPR1Matrix, lam: float) -> float:
    """Evaluate phi(lam) = 1 + rho * sum u_j^2/(d_j - lam).

    Zeros of phi are the eigenvalues of the matrix.  Raises
    :class:`PoleError` at the poles d_j.
    """
    lam = float(lam)
    if np.any(m.d == lam):
        raise PoleError(f"evaluation point {lam!r} is a pole")
    u2 = m.u * m.u
    if not np.all(np.isfinite(u2)):
        raise OverflowError("rank-one weights overflow in working precision")
    return 1.0 + m.rho_float() * float(np.sum(u2 / (m.d - lam)))


def dpr1_extreme(m: DPR1Matrix, side) -> float:
    """Leftmost (side='L') or rightmost (side='R') eigenvalue of the matrix.

    For rho > 0 the spectrum lies in (d_min, d_max + rho*u^Tu] and
    interlaces the diagonal from above; for rho < 0 it mirrors below.  The
    bracketing interval follows from that, and the bisection uses the same
    termination policy as the arrowhead solver.
    """
    if side not in ("L", "R"):
        raise ValueError(f"side must be 'L' or 'R', got {side!r}")
    rho = m.rho_float()
    d = m.d
    u2 = m.u * m.u
    if not np.all(np.isfinite(u2)):
        raise OverflowError("rank-one weights overflow in working precision")
    if rho == 0.0:
        return float(np.min(d)) if side == "L" else float(np.max(d))
    shift_mag = abs(rho) * math.fsum(u2)

    order = np.argsort(d)
    d_sorted = d[order]
    if rho > 0.0:
        if side == "R":
            left, right = float(d_sorted[-1]), float(d_sorted[-1] + shift_mag)
        else:
            # smallest eigenvalue sits just above the smallest pole
            left = float(d_sorted[0])
            right = float(d_sorted[1]) if d.size > 1 else float(d_sorted[0] + shift_mag)
    else:
        if side == "L":
            left, right = float(d_sorted[0] - shift_mag), float(d_sorted[0])
        else:
            right = float(d_sorted[-1])
            left = float(d_sorted[-2]) if d.size > 1 else float(d_sorted[-1] - shift_mag)
    if not (math.isfinite(left) and math.isfinite(right)):
        raise OverflowError("bisection interval overflows in working precision")

    keep = u2 != 0.0
    dk = d[keep] if not keep.all() else d
    u2k = u2[keep] if not keep.all() else u2

    def feval(x):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            s = float(np.sum(u2k / (dk - x)))
        return 1.0 + rho * s

    # phi is increasing between poles for rho > 0 (negative left of each
    # zero) and decreasing for rho < 0; orient the loop accordingly
    return _bisect_loop(feval, left, right, move_left_on_positive=(rho < 0.0))


class _DPR1ArrowSource(_ShiftSource):
    """Arrowhead reduction of an ordered irreducible D + u u^T.

    Poles are d_1..d_{n-1}, couplings are u_j * sqrt(d_j - d_n) and the tip
    is d_n + u^Tu.  Doubled-precision tip contributions are formed from the
    original (d, u) data: the squared couplings u_j^2 (d_j - d_n) and the
    pole differences are exact products of error-free transforms, so no
    square-root rounding enters the cancellation-prone sum.
    """

    def __init__(self, d, u):
        self.d0 = np.asarray(d, dtype=float)
        self.u0 = np.asarray(u, dtype=float)
        dn = self.d0[-1]
        delta = np.sqrt(self.d0[:-1] - dn)
        self.delta = delta
        z = self.u0[:-1] * delta
        alpha = dn + float(np.sum(self.u0 * self.u0))
        self.signs = np.where(z < 0, -1.0, 1.0)
        super().__init__(self.d0[:-1], np.abs(z), alpha)

    def zeta_sq_dd(self, j):
        # u_j^2 (d_j - d_n), both factors error-free
        return dd_mul(two_prod(self.u0[j], self.u0[j]),
                      two_sum(self.d0[j], -self.d0[-1]))

    def neg_tip_terms_dd(self, i):
        # -(alpha - d_i) = d_i - d_n - sum_j u_j^2
        terms = [two_sum(self.d0[i], -self.d0[-1])]
        for j in range(self.u0.size):
            t = two_prod(self.u0[j], self.u0[j])
            terms.append(DoubleDouble(-t.hi, -t.lo))
        return terms

    def tip_dd(self):
        acc = DoubleDouble.from_float(self.d0[-1])
        for j in range(self.u0.size):
            acc = dd_add(acc, two_prod(self.u0[j], self.u0[j]))
        return acc


def dpr1_eig(m: DPR1Matrix, k: int, policy="auto", config=None):
    """k-th eigenpair (1-based, decreasing) of an ordered irreducible D + u u^T.

    Requires rho == 1 (this reduction does not exist for D - u u^T), a
    strictly decreasing diagonal, and all u_j nonzero.  Returns
    ``(lam, q)`` with ``q`` a unit eigenvector.  The scale factor sigma^2
    linking the arrowhead eigenvector to the eigenvector of the original
    matrix satisfies n-1 consistency equations; the one with the least
    subtractive cancellation in its denominator is used.
    """
    from .refine import DEFAULT_GATES, aheig

    if float(m.rho) != 1.0 or (isinstance(m.rho, DoubleDouble) and m.rho.lo != 0.0):
        raise UnsupportedFormError("the arrowhead reduction requires rho == 1")
    d = m.d
    u = m.u
    n = d.size
    if n < 2:
        raise UnsupportedFormError("need n >= 2")
    if not np.all(np.diff(d) < 0):
        raise UnsupportedFormError("diagonal must be strictly decreasing")
    if np.any(u == 0.0):
        raise UnsupportedFormError("all rank-one weights must be nonzero")
    if not 1 <= k <= n:
        raise ValueError(f"k must be in 1..{n}, got {k}")

    src = _DPR1ArrowSource(d, u)
    pair, _ = aheig(None, k, policy=policy, config=config or DEFAULT_GATES,
                    source=src)
    lam = pair.lam
    v = pair.vector.copy()
    v[:-1] *= src.signs          # undo the coupling sign normalization
    vbar, vn = v[:-1], v[-1]
    un = u[-1]
    ubar = u[:-1]
    delta = src.delta

    # consistency equations u_n Delta^{-1} vbar = (Delta vbar + ubar v_n)/u_n
    # * sigma^2, one per component (the k-th column of L V = L^{-T} V Sigma^2)
    num = un * (vbar / delta)
    t1 = (delta * vbar) / un
    t2 = (ubar * vn) / un
    den = t1 + t2
    with np.errstate(divide="ignore", invalid="ignore"):
        score = np.abs(den) / (np.abs(t1) + np.abs(t2))
    score = np.where(np.isnan(score), -1.0, score)
    best = np.flatnonzero(score == np.max(score))
    if best.size > 1:
        best = best[np.argmax(np.abs(vbar[best]))]
    else:
        best = best[0]
    sigma_sq = num[best] / den[best]
    if not sigma_sq > 0.0:
        raise ArithmeticError("eigenvector scale factor lost its sign; "
                              "input is outside the supported class")
    sigma = math.sqrt(sigma_sq)

    x = np.empty(n)
    x[:-1] = num
    x[-1] = sigma_sq * vn
    q = x / sigma
    return float(lam), q
