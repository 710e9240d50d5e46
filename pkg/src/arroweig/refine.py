"""Gated eigensolver: condition estimates, doubled-precision tip, remedies.

The driver :func:`aheig` wraps the basic shift-and-invert solver with the
checks that make it forward stable in every case:

* if the coupling weights are unbalanced, the cancellation number ``K_b``
  of the inverse tip decides whether ``b`` is accumulated in doubled
  precision;
* after the solve, ``K_nu`` measures how far the bisected eigenvalue of the
  shifted inverse is from that matrix's spectral radius; when it is large
  the shift is retried at the neighboring pole, or the matrix is inverted
  at a non-pole shift near the eigenvalue (a diagonal-plus-rank-one
  problem) instead;
* an eigenvalue that is about to be formed as the difference of two close
  quantities (pole and correction of opposite signs) is recomputed from
  the inverse of the whole matrix, where it is extreme.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .core import (
    EPS,
    EigenPair,
    SingularShaftTip,
    _ShiftSource,
    _eigvec_from_diffs,
    _solve_at_shift,
    bisect_extreme,
    choose_shift,
    eigvec,
    shifted_inverse,
)
from .dd import DoubleDouble, dd_add, dd_div, dd_sub, two_sum
from .errors import PoleError
from .matrices import DPR1Matrix
from .preprocess import backtransform, reduce as reduce_arrowhead

__all__ = [
    "GateConfig",
    "Diagnostics",
    "zeta_ratio",
    "k_b",
    "k_nu",
    "b_doubled",
    "aheig",
    "nearest_zero_eig",
    "remedy_sigma",
    "eig_all",
]


@dataclass(frozen=True)
class GateConfig:
    """Thresholds for the precision and remedy gates.

    ``zeta_ratio_factor``: the coupling-balance gate passes when
    sum_{k != i} |z_k| / |z_i| <= factor * n.  ``kb_threshold`` and
    ``knu_threshold`` bound how much cancellation and non-extremeness is
    tolerated before escalating; 1e3 gives up at most 3 of 16 digits.
    """

    zeta_ratio_factor: float = 10.0
    kb_threshold: float = 1.0e3
    knu_threshold: float = 1.0e3

    def __post_init__(self):
        if min(self.zeta_ratio_factor, self.kb_threshold, self.knu_threshold) <= 0:
            raise ValueError("gate thresholds must be positive")


DEFAULT_GATES = GateConfig()

_POLICIES = ("auto", "force-standard", "force-doubled")


@dataclass
class Diagnostics:
    """Per-eigenpair condition estimates and the precision policy taken."""

    k_b: float = math.nan
    k_nu: float = math.nan
    zeta_ratio: float = math.nan
    quotient_near_zero: float = math.nan
    policy_used: str = "standard"
    k_nu_after_remedy: float = math.nan
    warning: str | None = None


def zeta_ratio(A, i, source=None) -> float:
    """Coupling balance at shift i (1-based): sum_{k != i} |z_k| / |z_i|."""
    src = source or _ShiftSource.from_matrix(A)
    ii = i - 1
    absz = np.abs(src.z)
    return float((np.sum(absz[:ii]) + np.sum(absz[ii + 1:])) / absz[ii])


def k_b(A, i, source=None) -> float:
    """Cancellation condition number of the inverse tip at shift i (1-based).

    Ratio of the sum of magnitudes to the magnitude of the sum in the tip
    numerator; +inf when the working-precision denominator is exactly zero.
    """
    src = source or _ShiftSource.from_matrix(A)
    return src.cancellation_kb(i - 1)


def b_doubled(A, i, source=None) -> DoubleDouble:
    """Inverse tip at shift i (1-based) accumulated in doubled precision.

    Positive and negative contributions are summed separately so that no
    addition cancels; raises :class:`SingularShaftTip` when they agree
    exactly (the shifted matrix is numerically singular).
    """
    src = source or _ShiftSource.from_matrix(A)
    return src.b_doubled(i - 1)


def _knu_of(src, i, side, nu, precision):
    """K_nu given one computed extreme of the inverse at shift i (1-based)."""
    rep = shifted_inverse(None, i, precision=precision, source=src)
    diag, coupling, tip = rep.inverse_arrowhead()
    other = bisect_extreme(diag, coupling, tip, "L" if side == "R" else "R")
    return max(abs(nu), abs(other)) / abs(nu)


def k_nu(A, i, nu, precision="working", source=None) -> float:
    """Extremeness measure ||(A - d_i I)^{-1}||_2 / |nu| for shift i (1-based).

    The spectral norm is the larger in magnitude of the two extreme
    eigenvalues of the shifted inverse, each found by bisection.
    """
    if nu == 0.0:
        raise ValueError("nu must be nonzero")
    src = source or _ShiftSource.from_matrix(A)
    rep = shifted_inverse(None, i, precision=precision, source=src)
    diag, coupling, tip = rep.inverse_arrowhead()
    lo = bisect_extreme(diag, coupling, tip, "L")
    hi = bisect_extreme(diag, coupling, tip, "R")
    return max(abs(lo), abs(hi)) / abs(nu)


def _bracket(src, k):
    """Open interval of the interlacing property containing lambda_k."""
    d = src.d
    n = src.n
    if k == 1:
        return d[0], math.inf
    if k == n:
        return -math.inf, d[n - 2]
    return d[k - 1], d[k - 2]


def _direct_pair(src, k, i, lam_d):
    """EigenPair anchored at a directly bisected exterior eigenvalue."""
    di = float(src.d[i - 1])
    mu = lam_d - di
    vec = _eigvec_from_diffs(src.pole_diffs(i - 1), src.z, mu)
    nu = 1.0 / mu if mu != 0.0 else math.inf
    return EigenPair(lam_d, vec, i, di, mu, nu, "R" if k == 1 else "L")


def _solve_exterior(src, k, i, side, prec, config, diag):
    """Exterior eigenpair: shifted inverse when extreme, else refined direct.

    When the bisected eigenvalue of the shifted inverse is far from that
    matrix's spectral radius (large K_nu), the inverse route has no
    accuracy guarantee; the direct bisection of the matrix itself is then
    accurate in the absolute sense of the max-eigenvalue bound, and one
    inversion shifted to that estimate recovers full relative accuracy.
    """
    pair_inv = _solve_at_shift(src, i, side, prec)
    if pair_inv.flags:
        return pair_inv
    diag.k_nu = _knu_of(src, i, side, pair_inv.nu, prec)
    if diag.k_nu <= config.knu_threshold:
        return pair_inv
    side_d = "R" if k == 1 else "L"
    lam_d = src.extreme_direct(side_d)
    sigma = lam_d
    if np.any(src.d == sigma):
        sigma = _nudged_sigma(src, k, lam_d)
    pair_sig, diag_sig = remedy_sigma(None, k, sigma, config=config, source=src)
    if diag_sig.warning is None:
        diag.policy_used = "remedy-sigma"
        diag.k_nu_after_remedy = diag_sig.k_nu_after_remedy
        return pair_sig
    other = src.extreme_direct("L" if side_d == "R" else "R")
    diag.warning = ("exterior refinement left the interlacing bracket; "
                    "the eigenvalue may not reach high relative accuracy")
    if abs(lam_d) >= max(abs(lam_d), abs(other)) / 3.0:
        return _direct_pair(src, k, i, lam_d)
    return pair_inv


def _decide_precision(src, i, policy, config, diag):
    if policy == "force-standard":
        return "working"
    if policy == "force-doubled":
        return "doubled"
    diag.zeta_ratio = zeta_ratio(None, i, source=src)
    if diag.zeta_ratio <= config.zeta_ratio_factor * src.n:
        return "working"
    diag.k_b = src.cancellation_kb(i - 1)
    if diag.k_b > config.kb_threshold:
        return "doubled"
    return "working"


def _sign_split_dd(terms):
    """(P - Q) with nonnegative accumulations P and Q split by term sign."""
    pos = DoubleDouble()
    neg = DoubleDouble()
    for t in terms:
        if t.hi >= 0.0:
            pos = dd_add(pos, t)
        else:
            neg = dd_sub(neg, t)
    return dd_sub(pos, neg)


def _rho_at_shift(src, sigma, config):
    """1 / (alpha - sigma - z^T (D - sigma I)^{-1} z), doubled when it cancels.

    Returns (rho or None, used_doubled); None means the denominator
    evaluated to exact zero, i.e. sigma is an eigenvalue to this precision.
    """
    delta = src.d - sigma
    terms = src.z2 / delta
    a = src.alpha - sigma
    den = a - float(np.sum(terms))
    magnitude = abs(a) + float(np.sum(np.abs(terms)))
    kden = math.inf if den == 0.0 else magnitude / abs(den)
    if kden <= config.kb_threshold:
        return (None, False) if den == 0.0 else (1.0 / den, False)
    dd_terms = [dd_sub(src.tip_dd(), DoubleDouble.from_float(sigma))]
    for j in range(src.d.size):
        dd_terms.append(-dd_div(src.zeta_sq_dd(j),
                                dd_sub(src.pole_dd(j), DoubleDouble.from_float(sigma))))
    den_dd = _sign_split_dd(dd_terms)
    if den_dd.hi == 0.0 and den_dd.lo == 0.0:
        return None, True
    return dd_div(DoubleDouble.from_float(1.0), den_dd), True


def _inverse_dpr1(src, sigma):
    """(A - sigma I)^{-1} as a diagonal-plus-rank-one matrix (without rho)."""
    delta = src.d - sigma
    u = np.concatenate([src.z / delta, [-1.0]])
    diag = np.concatenate([1.0 / delta, [0.0]])
    return diag, u, delta


def _extreme_of_inverse(diag, u, rho):
    """Absolutely largest eigenvalue of diag + rho*u*u^T and its extremeness."""
    from .dpr1 import dpr1_extreme

    m = DPR1Matrix(diag, u, rho)
    lo = dpr1_extreme(m, "L")
    hi = dpr1_extreme(m, "R")
    if abs(lo) >= abs(hi):
        return lo, max(abs(lo), abs(hi)) / abs(lo) if lo != 0.0 else math.inf
    return hi, max(abs(lo), abs(hi)) / abs(hi) if hi != 0.0 else math.inf


def nearest_zero_eig(A, config=DEFAULT_GATES, source=None):
    """Eigenvalue of A of smallest magnitude, to high relative accuracy.

    Computed as the reciprocal of the absolutely largest eigenvalue of
    A^{-1}, which is diagonal-plus-rank-one for an arrowhead with no zero
    pole.  When a pole is exactly zero, A^{-1} is instead the permuted
    arrowhead of the shift at that pole and the same machinery applies.
    The rank-one weight rho is promoted to doubled precision when its own
    denominator cancels; a denominator of exact zero means A is
    numerically singular and (0, u/||u||) is returned with an exact-singular
    flag (the eigenvector is still accurate).
    """
    src = source or _ShiftSource.from_matrix(A)
    diag = Diagnostics(policy_used="remedy-inverse")

    zero = np.flatnonzero(src.d == 0.0)
    if zero.size:
        # the shift at the zero pole inverts A itself
        i = int(zero[0]) + 1
        prec = _decide_precision(src, i, "auto", config, diag)
        diag.policy_used = "remedy-inverse"
        try:
            rep = shifted_inverse(None, i, precision=prec, source=src)
        except SingularShaftTip:
            v = np.zeros(src.n)
            v[i - 1] = 1.0
            return (EigenPair(0.0, v, i, 0.0, 0.0, math.inf, None,
                              flags=("exactly-singular",)), diag)
        dg, coupling, tip = rep.inverse_arrowhead()
        lo = bisect_extreme(dg, coupling, tip, "L")
        hi = bisect_extreme(dg, coupling, tip, "R")
        nu, side = (lo, "L") if abs(lo) >= abs(hi) else (hi, "R")
        mu = 1.0 / nu
        vec = _eigvec_from_diffs(src.pole_diffs(i - 1), src.z, mu)
        return EigenPair(float(mu), vec, i, 0.0, mu, nu, side), diag

    rho, _ = _rho_at_shift(src, 0.0, config)
    if rho is None:
        x = np.concatenate([src.z / src.d, [-1.0]])
        v = x / np.linalg.norm(x)
        return (EigenPair(0.0, v, None, 0.0, 0.0, math.inf, None,
                          flags=("exactly-singular",)), diag)
    dg, u, _ = _inverse_dpr1(src, 0.0)
    nu, _ = _extreme_of_inverse(dg, u, rho)
    lam = 1.0 / nu
    vec = eigvec(src.d, src.z, lam)
    return EigenPair(lam, vec, None, 0.0, lam, nu, None), diag


def remedy_sigma(A, k, sigma, config=DEFAULT_GATES, source=None):
    """Eigenpair near a non-pole shift sigma via inversion of A - sigma I.

    The inverse is diagonal-plus-rank-one; its absolutely largest
    eigenvalue nu is extreme by construction, so lambda = sigma + 1/nu is
    recovered accurately.  A warning is attached when the result does not
    fall in the interlacing bracket of lambda_k.
    """
    src = source or _ShiftSource.from_matrix(A)
    sigma = float(sigma)
    if np.any(src.d == sigma):
        raise PoleError(f"shift {sigma!r} coincides with a pole")
    diag = Diagnostics(policy_used="remedy-sigma")

    rho, used_dd = _rho_at_shift(src, sigma, config)
    delta = src.d - sigma
    if rho is None:
        # sigma is an eigenvalue to the working precision of the denominator
        vec = _eigvec_from_diffs(delta, src.z, 0.0)
        pair = EigenPair(sigma, vec, None, sigma, 0.0, math.inf, None,
                         flags=("sigma-is-eigenvalue",))
    else:
        dg, u, delta = _inverse_dpr1(src, sigma)
        nu, extremeness = _extreme_of_inverse(dg, u, rho)
        mu = 1.0 / nu
        vec = _eigvec_from_diffs(delta, src.z, mu)
        pair = EigenPair(float(sigma + mu), vec, None, sigma, mu, nu, None)
        diag.k_nu_after_remedy = extremeness
    lo, hi = _bracket(src, k)
    if not lo < pair.lam < hi:
        diag.warning = (f"shifted-inverse result {pair.lam!r} left the "
                        f"interlacing bracket of eigenvalue {k}")
    return pair, diag


def _polish(src, k, pair, config):
    """One inverse refinement at sigma = the current eigenvalue estimate.

    The matrix shifted to the estimate has the residual correction as a
    strongly dominant inverse eigenvalue, so lambda = sigma + 1/nu comes
    out with an error far below one ulp of lambda.  Falls back to the
    unpolished pair when the estimate coincides with a pole or the refined
    value leaves the interlacing bracket.
    """
    try:
        refined, rdiag = remedy_sigma(None, k, pair.lam, config=config,
                                      source=src)
    except PoleError:
        return pair
    if rdiag.warning is not None:
        return pair
    return refined


def _nudged_sigma(src, k, lam):
    """Shift near lam, pushed off poles and the estimate itself."""
    lo, hi = _bracket(src, k)
    if not math.isfinite(hi):
        gap = abs(lam - lo) or abs(lo) or 1.0
        interior = 1.0
    elif not math.isfinite(lo):
        gap = abs(hi - lam) or abs(hi) or 1.0
        interior = -1.0
    else:
        gap = hi - lo
        interior = 1.0 if lam <= (lo + hi) / 2.0 else -1.0
    step = 2.0 ** -20 * gap
    sigma = lam + interior * step
    while np.any(src.d == sigma) or sigma == lam:
        step *= 2.0
        sigma = lam + interior * step
    return sigma


def aheig(A, k, policy="auto", config=DEFAULT_GATES, source=None):
    """k-th eigenpair with condition gates and remedies (the full algorithm).

    ``policy`` is ``auto`` (gate on coupling balance and K_b, escalate the
    tip to doubled precision, then check K_nu and remedy), or
    ``force-standard`` / ``force-doubled`` to pin the tip precision and
    skip the remedies.  Returns ``(EigenPair, Diagnostics)``; remedies
    that fail leave a warning in the diagnostics, never a silent result.
    """
    if policy not in _POLICIES:
        raise ValueError(f"policy must be one of {_POLICIES}, got {policy!r}")
    src = source or _ShiftSource.from_matrix(A)
    n = src.n
    diag = Diagnostics()
    i, side = choose_shift(None, k, source=src)
    prec = _decide_precision(src, i, policy, config, diag)
    diag.policy_used = "doubled-b" if prec == "doubled" else "standard"

    if k == 1 or k == n:
        pair = _solve_exterior(src, k, i, side, prec, config, diag)
        diag.quotient_near_zero = (
            math.inf if pair.lam == 0.0
            else (abs(pair.shift_value) + abs(pair.mu)) / abs(pair.lam))
        return pair, diag

    pair = _solve_at_shift(src, i, side, prec)
    if pair.flags:
        diag.quotient_near_zero = 1.0
        return pair, diag
    diag.quotient_near_zero = (
        math.inf if pair.lam == 0.0
        else (abs(pair.shift_value) + abs(pair.mu)) / abs(pair.lam))
    if policy != "auto":
        return pair, diag

    diag.k_nu = _knu_of(src, i, side, pair.nu, prec)

    # eigenvalue nearest zero formed as a difference of close quantities:
    # recompute it from the inverse of A, where it is extreme
    mismatch = (pair.shift_value != 0.0 and pair.mu != 0.0
                and (pair.shift_value > 0.0) != (pair.mu > 0.0))
    if mismatch and diag.quotient_near_zero > 3.0:
        candidate, _ = nearest_zero_eig(None, config=config, source=src)
        lo, hi = _bracket(src, k)
        if lo < candidate.lam < hi or candidate.lam in (lo, hi):
            diag.policy_used = "remedy-inverse"
            return _polish(src, k, candidate, config), diag
        diag.warning = ("near-zero recomputation left the interlacing "
                        "bracket; keeping the shifted result")
        return pair, diag

    if diag.k_nu <= config.knu_threshold:
        if prec == "doubled":
            pair = _polish(src, k, pair, config)
        return pair, diag

    # remedy: shift to the other bracketing pole when there is one; only
    # acceptable when that pole's correction does not cancel in d_i + mu
    # (the quotient bound that controls the final amplification)
    best = (diag.k_nu, pair)
    if 1 < k < n:
        i_alt = k - 1 if i == k else k
        side_alt = "L" if side == "R" else "R"
        diag_alt = Diagnostics()
        prec_alt = _decide_precision(src, i_alt, "auto", config, diag_alt)
        pair_alt = _solve_at_shift(src, i_alt, side_alt, prec_alt)
        if not pair_alt.flags:
            knu_alt = _knu_of(src, i_alt, side_alt, pair_alt.nu, prec_alt)
            if knu_alt < best[0]:
                best = (knu_alt, pair_alt)
            quotient_alt = (
                math.inf if pair_alt.lam == 0.0
                else (abs(pair_alt.shift_value) + abs(pair_alt.mu))
                / abs(pair_alt.lam))
            if knu_alt <= config.knu_threshold and quotient_alt <= 3.0:
                diag.k_nu_after_remedy = knu_alt
                return _polish(src, k, pair_alt, config), diag

    # remedy: invert at a non-pole shift near the current estimate
    sigma = _nudged_sigma(src, k, best[1].lam)
    pair_sig, diag_sig = remedy_sigma(None, k, sigma, config=config, source=src)
    if diag_sig.warning is None:
        diag.policy_used = "remedy-sigma"
        diag.k_nu_after_remedy = diag_sig.k_nu_after_remedy
        return _polish(src, k, pair_sig, config), diag
    if best[0] < diag.k_nu:
        diag.k_nu_after_remedy = best[0]
        diag.warning = ("both remedies exceeded the extremeness threshold; "
                        "returning the best neighboring-pole result")
        return best[1], diag
    diag.warning = ("both remedies failed; the eigenvalue may not reach "
                    "high relative accuracy")
    return pair, diag


@dataclass
class FullDecomposition:
    """Complete spectrum in decreasing order with eigenvectors as columns.

    ``pairs`` holds the solver's EigenPair for each non-deflated
    eigenvalue (None for deflated ones); their (shift, correction)
    representation keeps strict interlacing checkable even when the
    rounded eigenvalue collides with a pole.
    """

    eigenvalues: np.ndarray
    vectors: np.ndarray
    diagnostics: list
    pairs: list

    def warnings(self):
        return [d.warning for d in self.diagnostics
                if d is not None and d.warning is not None]


def eig_all(A, policy="auto", config=DEFAULT_GATES,
            zero_tol=0.0, equal_tol=0.0) -> FullDecomposition:
    """Full eigendecomposition of a general symmetric arrowhead matrix.

    Reduces to ordered irreducible form, solves each eigenpair
    independently, and maps everything back to the original ordering.
    """
    reduced, record, deflated = reduce_arrowhead(A, zero_tol, equal_tol)
    results = []
    for lam, vec in deflated:
        results.append((lam, vec, Diagnostics(policy_used="deflated"), None))
    if reduced is not None:
        src = _ShiftSource.from_matrix(reduced)
        for k in range(1, reduced.n + 1):
            pair, diag = aheig(None, k, policy=policy, config=config, source=src)
            lam, vec = backtransform(record, (pair.lam, pair.vector))
            results.append((lam, vec, replace(diag), pair))
    results.sort(key=lambda t: -t[0])
    return FullDecomposition(
        eigenvalues=np.array([r[0] for r in results]),
        vectors=np.column_stack([r[1] for r in results]),
        diagnostics=[r[2] for r in results],
        pairs=[r[3] for r in results],
    )
