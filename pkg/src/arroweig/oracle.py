"""Independent doubled-precision reference solver and accuracy bookkeeping.

The reference eigenvalues come from bisecting the secular function in
double-double arithmetic over each interval of the interlacing property,
with Gershgorin-type outer bounds for the two exterior eigenvalues.  This
path shares nothing with the shift-and-invert solver except the scalar
kernels, so it serves as an oracle for it.  The module also provides the
residual/orthogonality report and the first-order error-bound model used
to pin test tolerances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dd import DoubleDouble, dd_sqrt
from .dd import _add, _two_prod, _two_sum  # tuple kernels for the hot loop
from .errors import ConvergenceError
from .matrices import ArrowheadMatrix

__all__ = [
    "ToleranceModel",
    "tolerance_bounds",
    "oracle_eig",
    "oracle_eigvec",
    "ResidualReport",
    "residual_report",
]

_EPS = float(np.finfo(float).eps)
_ORACLE_REL_WIDTH = 8.0 * _EPS * _EPS
_ORACLE_ITER_CAP = 260
_ORACLE_SIZE_CAP = 64
_ABS_FLOOR = 4.0 * 5e-324


@dataclass(frozen=True)
class ToleranceModel:
    """First-order relative error bounds, as multiples of machine precision.

    ``eigvec_component_bound`` already includes the machine-precision
    factor; the others are bare condition-number multiples.
    """

    kappa_bis_bound: float
    kappa_b_bound: float
    kappa_nu_bound: float
    kappa_mu_bound: float
    kappa_lambda_bound: float
    eigvec_component_bound: float


def tolerance_bounds(n: int, K_b: float, zeta_ratio: float) -> ToleranceModel:
    """Evaluate the error-bound model for size n and measured conditioning."""
    if n < 2:
        raise ValueError("n must be at least 2")
    if K_b < 0 or zeta_ratio < 0:
        raise ValueError("condition inputs must be nonnegative")
    sqrt_n = math.sqrt(n)
    kappa_bis = 1.06 * n * (sqrt_n + 1.0)
    kappa_b = (n + 3.0) * K_b
    kappa_nu = min((n + 3.0) * sqrt_n * K_b,
                   3.0 * sqrt_n + (n + 3.0) * (1.0 + 2.0 * zeta_ratio))
    kappa_mu = kappa_nu + kappa_bis + 1.0
    kappa_lambda = 3.0 * (kappa_nu + kappa_bis) + 4.0
    eigvec = 3.0 * (kappa_mu + 3.0) * _EPS
    return ToleranceModel(kappa_bis, kappa_b, kappa_nu, kappa_mu,
                          kappa_lambda, eigvec)


# ---------------------------------------------------------------------------
# Double-double secular bisection
# ---------------------------------------------------------------------------

def _f_dd(alpha, d, z2dd, xh, xl):
    """Secular function at the double-double point x, as (hi, lo)."""
    sh, sl = _add(alpha, 0.0, -xh, -xl)
    for j in range(d.size):
        z2h, z2l = z2dd[j]
        dh, dl = _add(d[j], 0.0, -xh, -xl)
        # t = z2 / (d - x)
        q1 = z2h / dh
        th, tl = _two_prod(q1, dh)
        tl += q1 * dl
        rh, rl = _add(z2h, z2l, -th, -tl)
        q2 = rh / dh
        th, tl = _two_prod(q2, dh)
        tl += q2 * dl
        rh, rl = _add(rh, rl, -th, -tl)
        q3 = rh / dh
        qh, ql = _two_sum(q1, q2)
        qh, ql = _add(qh, ql, q3, 0.0)
        sh, sl = _add(sh, sl, -qh, -ql)
    return sh, sl


def _bisect_dd(alpha, d, z2dd, left, right):
    """Root of the secular function inside (left, right), both (hi, lo) pairs."""
    lh, ll = left
    rh, rl = right
    for _ in range(_ORACLE_ITER_CAP):
        mh, ml = _add(lh, ll, rh, rl)
        mh *= 0.5
        ml *= 0.5
        wh, _ = _add(rh, rl, -lh, -ll)
        if mh == 0.0:
            if wh <= _ABS_FLOOR:
                return DoubleDouble(mh, ml)
        elif wh / abs(mh) <= _ORACLE_REL_WIDTH:
            return DoubleDouble(mh, ml)
        fh, fl_ = _f_dd(alpha, d, z2dd, mh, ml)
        positive = fh > 0.0 or (fh == 0.0 and fl_ > 0.0)
        if positive:
            lh, ll = mh, ml
        else:
            rh, rl = mh, ml
    raise ConvergenceError("reference bisection failed to reach "
                           "doubled-precision width")


def _dd_l1(z):
    h, low = 0.0, 0.0
    for x in np.abs(z):
        h, low = _add(h, low, float(x), 0.0)
    return h, low


def oracle_eig(A: ArrowheadMatrix, size_cap: int = _ORACLE_SIZE_CAP):
    """All eigenvalues of an ordered irreducible arrowhead in doubled precision.

    Each eigenvalue is bisected inside its own interlacing interval, so the
    outputs strictly interlace the poles by construction.  Returns a list
    of :class:`DoubleDouble`, decreasing.
    """
    n = A.n
    if n - 1 > size_cap:
        raise ValueError(f"oracle limited to n <= {size_cap + 1}, got {n}")
    d = A.d
    z = A.z
    alpha = float(A.alpha)
    if not (np.all(np.diff(d) < 0) and np.all(z != 0.0)):
        raise ValueError("oracle requires an ordered irreducible arrowhead")
    z2dd = [_two_prod(float(x), float(x)) for x in z]

    l1h, l1l = _dd_l1(z)
    # exterior bounds: max/min over {d_j +- |z_j|, alpha +- ||z||_1}
    hi_h, hi_l = _add(alpha, 0.0, l1h, l1l)
    for j in range(n - 1):
        ch, cl = _two_sum(float(d[j]), float(abs(z[j])))
        if (ch, cl) > (hi_h, hi_l):
            hi_h, hi_l = ch, cl
    lo_h, lo_l = _add(alpha, 0.0, -l1h, -l1l)
    for j in range(n - 1):
        ch, cl = _two_sum(float(d[j]), -float(abs(z[j])))
        if (ch, cl) < (lo_h, lo_l):
            lo_h, lo_l = ch, cl

    out = []
    for k in range(1, n + 1):
        if k == 1:
            left, right = (float(d[0]), 0.0), (hi_h, hi_l)
        elif k == n:
            left, right = (lo_h, lo_l), (float(d[n - 2]), 0.0)
        else:
            left, right = (float(d[k - 1]), 0.0), (float(d[k - 2]), 0.0)
        out.append(_bisect_dd(alpha, d, z2dd, left, right))
    return out


def oracle_eigvec(A: ArrowheadMatrix, lam: DoubleDouble):
    """Unit eigenvector components in doubled precision at a reference eigenvalue.

    Evaluates x_j = z_j / (d_j - lam), x_n = -1 and normalizes, all in
    double-double arithmetic.  Returns a list of :class:`DoubleDouble`.
    """
    from .dd import dd_add, dd_div, dd_mul, dd_sub, two_sum

    comps = []
    for j in range(A.d.size):
        den = dd_sub(two_sum(float(A.d[j]), 0.0), lam)
        comps.append(dd_div(DoubleDouble.from_float(float(A.z[j])), den))
    comps.append(DoubleDouble.from_float(-1.0))
    ssq = DoubleDouble()
    for c in comps:
        ssq = dd_add(ssq, dd_mul(c, c))
    nrm = dd_sqrt(ssq)
    return [dd_div(c, nrm) for c in comps]


# ---------------------------------------------------------------------------
# Residual and orthogonality report
# ---------------------------------------------------------------------------

@dataclass
class ResidualReport:
    max_residual: float
    max_orthogonality_defect: float
    interlacing_ok: bool


def residual_report(A: ArrowheadMatrix, eigenvalues, vectors,
                    pairs=None) -> ResidualReport:
    """Scaled residuals, orthogonality defect, and the interlacing check.

    ``eigenvalues`` must be the complete decreasing spectrum and
    ``vectors`` the matching eigenvector columns.  The residual is
    max_k ||A v_k - lam_k v_k||_2 / ||A||_2 with ||A||_2 taken as the
    largest eigenvalue magnitude; the defect is the largest off-diagonal
    entry of |V^T V - I|.

    Interlacing is strict alternation of eigenvalues and poles.  When the
    solver's eigenpairs are passed in ``pairs``, the comparison uses their
    (shift, correction) representation, which stays strict even where the
    rounded eigenvalue collides with a pole bitwise.
    """
    lams = np.asarray(eigenvalues, dtype=float)
    V = np.asarray(vectors, dtype=float)
    n = A.n
    if lams.size != n or V.shape != (n, n):
        raise ValueError("need the complete set of n eigenpairs")
    top = V[:-1, :]
    tail = V[-1, :]
    AV = np.empty_like(V)
    AV[:-1, :] = A.d[:, None] * top + np.outer(A.z, tail)
    AV[-1, :] = A.z @ top + A.alpha * tail
    R = AV - V * lams[None, :]
    norm_a = float(np.max(np.abs(lams)))
    max_res = float(np.max(np.linalg.norm(R, axis=0)))
    max_res = max_res / norm_a if norm_a > 0 else max_res

    G = V.T @ V - np.eye(n)
    np.fill_diagonal(G, 0.0)
    defect = float(np.max(np.abs(G)))

    poles = np.sort(A.d)[::-1]
    if pairs is not None and all(p is not None for p in pairs):
        interlacing = _interlacing_from_pairs(poles, pairs)
    else:
        seq = np.empty(2 * n - 1)
        seq[0::2] = np.sort(lams)[::-1]
        seq[1::2] = poles
        interlacing = bool(np.all(np.diff(seq) < 0))
    return ResidualReport(max_res, defect, interlacing)


def _interlacing_from_pairs(poles_desc, pairs):
    """Strict interlacing in the (shift, correction) representation."""
    n = len(poles_desc) + 1
    if len(pairs) != n:
        return False
    ordered = sorted(pairs, key=lambda p: p.dd_value(), reverse=True)
    for k, pair in enumerate(ordered, start=1):
        lam = pair.dd_value()
        if k > 1 and not lam < DoubleDouble.from_float(float(poles_desc[k - 2])):
            return False
        if k < n and not lam > DoubleDouble.from_float(float(poles_desc[k - 1])):
            return False
    return True
