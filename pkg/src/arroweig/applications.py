"""Solvers derived from the real symmetric arrowhead eigensolver.

Hermitian arrowhead matrices are unitarily similar to real ones with the
coupling moduli; nonsymmetric arrowheads whose off-pair products are
positive are diagonally similar to symmetric ones with the geometric-mean
couplings; and the singular values of an upper triangular arrowhead are
square roots of the eigenvalues of B^T B, which is again an arrowhead.

Each reduction must feed the doubled-precision tip computation with exact
squared quantities from the *original* data (|zeta|^2 = re^2 + im^2, the
product of the two couplings, or factored differences of squares), since a
rounded intermediate would be amplified by the very cancellation the
doubled precision is there to absorb.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import _ShiftSource
from .dd import DoubleDouble, dd_add, dd_mul, dd_sqrt, two_prod, two_sum
from .errors import UnsupportedFormError
from .matrices import ArrowheadMatrix
from .preprocess import backtransform, reduce as reduce_arrowhead
from .refine import DEFAULT_GATES, aheig

__all__ = [
    "HermitianArrowhead",
    "NonsymArrowhead",
    "TriangularArrowhead",
    "hermitian_eig",
    "nonsym_eig",
    "triangular_svd",
]


@dataclass
class HermitianArrowhead:
    """Hermitian arrowhead: real diagonal d, complex couplings z, real tip."""

    d: np.ndarray
    z: np.ndarray
    alpha: float

    def __post_init__(self):
        self.d = np.asarray(self.d, dtype=float)
        self.z = np.asarray(self.z, dtype=complex)
        self.alpha = float(self.alpha)
        if self.d.shape != self.z.shape or self.d.ndim != 1:
            raise ValueError("d and z must be 1-d arrays of equal length")

    @property
    def n(self):
        return self.d.size + 1

    def to_dense(self):
        n = self.n
        a = np.zeros((n, n), dtype=complex)
        a[np.arange(n - 1), np.arange(n - 1)] = self.d
        a[:-1, -1] = self.z
        a[-1, :-1] = np.conj(self.z)
        a[-1, -1] = self.alpha
        return a


@dataclass
class NonsymArrowhead:
    """Nonsymmetric arrowhead with last column z_up and last row z_low."""

    d: np.ndarray
    z_up: np.ndarray
    z_low: np.ndarray
    alpha: float

    def __post_init__(self):
        self.d = np.asarray(self.d, dtype=float)
        self.z_up = np.asarray(self.z_up, dtype=float)
        self.z_low = np.asarray(self.z_low, dtype=float)
        self.alpha = float(self.alpha)
        if not (self.d.shape == self.z_up.shape == self.z_low.shape):
            raise ValueError("d, z_up, z_low must have equal length")

    @property
    def n(self):
        return self.d.size + 1

    def to_dense(self):
        n = self.n
        a = np.zeros((n, n))
        a[np.arange(n - 1), np.arange(n - 1)] = self.d
        a[:-1, -1] = self.z_up
        a[-1, :-1] = self.z_low
        a[-1, -1] = self.alpha
        return a


@dataclass
class TriangularArrowhead:
    """Upper triangular arrowhead: diag(d) with last column z and corner alpha."""

    d: np.ndarray
    z: np.ndarray
    alpha: float

    def __post_init__(self):
        self.d = np.asarray(self.d, dtype=float)
        self.z = np.asarray(self.z, dtype=float)
        self.alpha = float(self.alpha)
        if self.d.shape != self.z.shape or self.d.ndim != 1:
            raise ValueError("d and z must be 1-d arrays of equal length")

    @property
    def n(self):
        return self.d.size + 1

    def to_dense(self):
        n = self.n
        a = np.zeros((n, n))
        a[np.arange(n - 1), np.arange(n - 1)] = self.d
        a[:-1, -1] = self.z
        a[-1, -1] = self.alpha
        return a


def _solve_union(A0, k, policy, config, source_factory=None):
    """k-th eigenpair of a possibly reducible arrowhead, mapped back.

    Solves the irreducible part fully and merges with the deflated
    eigenvalues to impose the global decreasing order.
    """
    reduced, record, deflated = reduce_arrowhead(A0)
    entries = [(lam, vec, None) for lam, vec in deflated]
    if reduced is not None:
        src = None
        if source_factory is not None:
            src = source_factory(reduced, record)
        if src is None:
            src = _ShiftSource.from_matrix(reduced)
        for kk in range(1, reduced.n + 1):
            pair, diag = aheig(None, kk, policy=policy, config=config, source=src)
            lam, vec = backtransform(record, (pair.lam, pair.vector))
            entries.append((lam, vec, diag))
    entries.sort(key=lambda t: -t[0])
    if not 1 <= k <= len(entries):
        raise ValueError(f"k must be in 1..{len(entries)}, got {k}")
    return entries[k - 1]


class _HermitianSource(_ShiftSource):
    """Real reduction of a Hermitian arrowhead with exact squared moduli."""

    def __init__(self, reduced, re, im):
        super().__init__(reduced.d, reduced.z, reduced.alpha)
        self._re = re
        self._im = im

    def zeta_sq_dd(self, j):
        return dd_add(two_prod(self._re[j], self._re[j]),
                      two_prod(self._im[j], self._im[j]))


def _coupling_modulus_dd(re, im):
    """|zeta| in doubled precision: exact squares, sum, Newton square root."""
    return dd_sqrt(dd_add(two_prod(re, re), two_prod(im, im)))


def hermitian_eig(C: HermitianArrowhead, k: int, policy="auto",
                  config=DEFAULT_GATES):
    """k-th eigenpair (1-based, eigenvalues decreasing) of a Hermitian arrowhead.

    The matrix is unitarily similar to the real arrowhead with couplings
    |z_i| under Phi = diag(z_i/|z_i|, ..., 1); the real eigenvector maps
    back as u = Phi v.  Zero couplings and repeated poles are deflated
    first.  The moduli are formed in doubled precision (exact squares and
    a Newton square root) and rounded once, and a doubled-precision tip
    consumes the squared moduli exactly as re^2 + im^2.
    """
    absz = np.array([float(_coupling_modulus_dd(re, im))
                     for re, im in zip(C.z.real, C.z.imag)])
    phases = np.ones(C.n - 1, dtype=complex)
    nz = absz > 0
    phases[nz] = C.z[nz] / absz[nz]
    A0 = ArrowheadMatrix(C.d, absz, C.alpha)

    def factory(reduced, record):
        if record.givens:
            # rotated couplings are fresh working-precision values; the
            # exact-squares shortcut no longer applies
            return None
        perm = record.permutation
        re = C.z.real if perm is None else C.z.real[perm]
        im = C.z.imag if perm is None else C.z.imag[perm]
        return _HermitianSource(reduced, re, im)

    lam, v, _ = _solve_union(A0, k, policy, config, factory)
    u = np.empty(C.n, dtype=complex)
    u[:-1] = phases * v[:-1]
    u[-1] = v[-1]
    return float(lam), u


class _NonsymSource(_ShiftSource):
    """Symmetrized arrowhead with exact squared geometric-mean couplings."""

    def __init__(self, reduced, z_up, z_low):
        super().__init__(reduced.d, reduced.z, reduced.alpha)
        self._z_up = z_up
        self._z_low = z_low

    def zeta_sq_dd(self, j):
        return two_prod(self._z_up[j], self._z_low[j])


def nonsym_eig(G: NonsymArrowhead, k: int, policy="auto", config=DEFAULT_GATES):
    """k-th eigenvalue and right eigenvector of a nonsymmetric arrowhead.

    Requires z_up_i * z_low_i > 0 for all i.  The diagonal similarity
    Psi = diag(sign(z_low_i) sqrt(z_up_i / z_low_i), ..., 1) symmetrizes G
    with couplings sqrt(z_up_i z_low_i); the right eigenvector is Psi v,
    normalized.  The constructed symmetric matrix is verified to be one.
    """
    prod = G.z_up * G.z_low
    if np.any(prod <= 0.0):
        raise UnsupportedFormError(
            "paired couplings must have matching signs and be nonzero")
    zeta = np.sqrt(prod)
    psi = np.sign(G.z_low) * np.sqrt(G.z_up / G.z_low)
    up = G.z_up / psi
    low = G.z_low * psi
    if np.any(np.abs(up - low) > 8.0 * np.finfo(float).eps * np.abs(zeta)):
        raise ArithmeticError("similarity failed to symmetrize the matrix")
    A0 = ArrowheadMatrix(G.d, zeta, G.alpha)

    def factory(reduced, record):
        if record.givens:
            return None
        perm = record.permutation
        zu = G.z_up if perm is None else G.z_up[perm]
        zl = G.z_low if perm is None else G.z_low[perm]
        return _NonsymSource(reduced, zu, zl)

    lam, v, _ = _solve_union(A0, k, policy, config, factory)
    w = np.empty(G.n)
    w[:-1] = psi * v[:-1]
    w[-1] = v[-1]
    w /= np.linalg.norm(w)
    return float(lam), w


class _SquaredPoleSource(_ShiftSource):
    """Arrowhead B^T B of a triangular arrowhead, kept in factored form.

    Poles are d_j^2 and couplings d_j zeta_j (sign-normalized); every pole
    difference is evaluated as (d_j - d_i)(d_j + d_i), which is accurate
    where the subtraction of squares would cancel.
    """

    def __init__(self, dp, zp, alpha2):
        # dp, zp: original diagonal and couplings, permuted to make d^2 decreasing
        coupling = dp * zp
        self.signs = np.where(coupling < 0, -1.0, 1.0)
        self._dp = dp
        self._zp = zp
        self._alpha = alpha2
        poles = dp * dp
        tip = alpha2 * alpha2 + float(np.sum(zp * zp))
        super().__init__(poles, np.abs(coupling), tip)

    def pole_diffs(self, i):
        out = (self._dp - self._dp[i]) * (self._dp + self._dp[i])
        out[i] = 0.0
        return out

    def pole_dd(self, j):
        return two_prod(self._dp[j], self._dp[j])

    def tip_dd(self):
        acc = two_prod(self._alpha, self._alpha)
        for j in range(self._zp.size):
            acc = dd_add(acc, two_prod(self._zp[j], self._zp[j]))
        return acc

    def zeta_sq_dd(self, j):
        return dd_mul(two_prod(self._dp[j], self._dp[j]),
                      two_prod(self._zp[j], self._zp[j]))

    def pole_diff_dd(self, i, j):
        return dd_mul(two_sum(self._dp[j], -self._dp[i]),
                      two_sum(self._dp[j], self._dp[i]))

    def pole_term_dd(self, i, j):
        from .dd import dd_div
        return dd_div(self.zeta_sq_dd(j), self.pole_diff_dd(i, j))

    def neg_tip_terms_dd(self, i):
        # -(alpha^2 + z^T z - d_i^2), term by term
        terms = [self.pole_dd(i)]
        t = two_prod(self._alpha, self._alpha)
        terms.append(DoubleDouble(-t.hi, -t.lo))
        for j in range(self._zp.size):
            t = two_prod(self._zp[j], self._zp[j])
            terms.append(DoubleDouble(-t.hi, -t.lo))
        return terms


def triangular_svd(B: TriangularArrowhead, k: int, policy="auto",
                   config=DEFAULT_GATES):
    """k-th singular triplet (sigma, u, v) of an upper triangular arrowhead.

    sigma_k = sqrt(lambda_k(B^T B)); the right singular vector is the
    arrowhead eigenvector and the left one follows from u_{1:n-1} =
    sigma v_{1:n-1} / d and u_n = alpha v_n / sigma.  Requires nonzero,
    distinct-magnitude diagonal entries and nonzero couplings.  With
    alpha == 0 the matrix is singular: the smallest triplet is exact and
    u_n is recovered from the unit-norm completion.
    """
    d, z, alpha = B.d, B.z, B.alpha
    n = B.n
    if not 1 <= k <= n:
        raise ValueError(f"k must be in 1..{n}, got {k}")
    if np.any(d == 0.0):
        raise UnsupportedFormError("triangular arrowhead needs nonzero diagonal")
    if np.any(z == 0.0):
        raise UnsupportedFormError("triangular arrowhead needs nonzero couplings")
    p = d * d
    if np.unique(p).size != p.size:
        raise UnsupportedFormError(
            "diagonal magnitudes must be distinct for the squared reduction")

    if alpha == 0.0 and k == n:
        # B is exactly singular; its null pair needs no iteration
        x = np.empty(n)
        x[:-1] = z / d
        x[-1] = -1.0
        v = x / np.linalg.norm(x)
        u = np.zeros(n)
        u[-1] = 1.0
        return 0.0, u, v

    perm = np.argsort(-p, kind="stable")
    src = _SquaredPoleSource(d[perm], z[perm], alpha)
    pair, _ = aheig(None, k, policy=policy, config=config, source=src)
    lam = pair.lam
    if not lam > 0.0:
        raise ArithmeticError(
            f"eigenvalue {lam!r} of the squared problem is not positive; "
            "the squared reduction lost definiteness")
    sigma = math.sqrt(lam)

    v = np.empty(n)
    v[perm] = pair.vector[:-1] * src.signs
    v[-1] = pair.vector[-1]

    u = np.empty(n)
    u[:-1] = sigma * v[:-1] / d
    if alpha != 0.0:
        u[-1] = alpha * v[-1] / sigma
    else:
        u[-1] = math.sqrt(max(0.0, 1.0 - float(np.sum(u[:-1] ** 2))))
    u /= np.linalg.norm(u)
    return float(sigma), u, v
