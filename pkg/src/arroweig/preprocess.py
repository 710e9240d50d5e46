"""Reduction of a general symmetric arrowhead matrix to ordered irreducible form.

Three kinds of trivially decoupled structure are removed before the solver
runs: zero couplings (the pole is an eigenvalue with a unit eigenvector),
repeated poles (a Givens rotation moves all coupling weight onto one entry
and decouples the rest), and negative couplings (a diagonal sign similarity
makes them positive).  Finally the poles are sorted in decreasing order.
Every transformation is recorded so eigenpairs of the reduced matrix can be
mapped back to the original one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .matrices import ArrowheadMatrix, OrderedIrreducibleArrowhead

__all__ = ["ReductionRecord", "reduce", "backtransform"]


@dataclass
class ReductionRecord:
    """Transformations taken while reducing an arrowhead matrix.

    ``givens`` holds plane rotations (i, j, c, s) in original coordinates,
    in the order they were applied; ``permutation`` maps reduced positions
    to original indices; ``sign_flips`` holds the coupling normalization
    signs, indexed by reduced position.  ``deflations`` lists the decoupled
    (index, eigenvalue) pairs in the order they were split off.
    """

    n: int
    deflations: list = field(default_factory=list)  # (orig index, eigenvalue)
    givens: list = field(default_factory=list)      # (i, j, c, s)
    permutation: np.ndarray | None = None           # reduced pos -> orig index
    sign_flips: np.ndarray | None = None            # reduced-order, entries +-1

    def is_identity(self):
        return (not self.deflations and not self.givens
                and self.permutation is None and self.sign_flips is None)

    def deflated_pairs(self):
        """Deflated eigenpairs of the original matrix (value, unit vector)."""
        pairs = []
        for idx, lam in self.deflations:
            v = np.zeros(self.n)
            v[idx] = 1.0
            pairs.append((lam, self._apply_rotations(v)))
        return pairs

    def _apply_rotations(self, v):
        # reduce applied G_1 .. G_m as A <- G^T A G; an eigenvector of the
        # rotated matrix maps back as v <- G_1 (G_2 (... G_m v)).
        for i, j, c, s in reversed(self.givens):
            vi, vj = v[i], v[j]
            v[i] = c * vi - s * vj
            v[j] = s * vi + c * vj
        return v


def _givens(zi, zj):
    # c*zi + s*zj = r, -s*zi + c*zj = 0, with r = hypot computed safely
    r = math.hypot(zi, zj)
    return zi / r, zj / r, r


def reduce(A: ArrowheadMatrix, zero_tol: float = 0.0, equal_tol: float = 0.0):
    """Split off decoupled eigenpairs and order what remains.

    Tolerances are relative: a coupling is treated as zero when
    ``|z_i| <= zero_tol * max|z|`` and two poles as equal when
    ``|d_i - d_j| <= equal_tol * max(|d_i|, |d_j|)``.  The defaults keep
    both comparisons exact, since nonzero thresholds change the spectrum.

    Returns ``(reduced, record, deflated)`` where ``reduced`` is an
    :class:`OrderedIrreducibleArrowhead` or ``None`` when every pole
    decoupled (the 1x1 residue contributes the eigenpair (alpha, e_n),
    included in ``deflated``).
    """
    d = A.d.copy()
    z = A.z.copy()
    has_lo = A.z_lo is not None
    z_lo = A.z_lo.copy() if has_lo else None
    n = A.n
    rec = ReductionRecord(n=n)
    active = list(range(n - 1))

    zscale = float(np.max(np.abs(z))) if z.size else 0.0
    zthresh = zero_tol * zscale

    kept = []
    for i in active:
        if abs(z[i]) <= zthresh:
            rec.deflations.append((i, float(d[i])))
        else:
            kept.append(i)
    active = kept

    # group poles that compare equal; fold each group's weight into its
    # lowest index by a chain of rotations in ascending index order
    remaining = list(active)
    kept = []
    while remaining:
        i = remaining.pop(0)
        group = [j for j in remaining
                 if abs(d[i] - d[j]) <= equal_tol * max(abs(d[i]), abs(d[j]))]
        for j in group:
            c, s, r = _givens(z[i], z[j])
            rec.givens.append((i, j, c, s))
            z[i] = r
            z[j] = 0.0
            if has_lo:
                # rotation output is a fresh working-precision value
                z_lo[i] = 0.0
                z_lo[j] = 0.0
            rec.deflations.append((j, float(d[i])))
            remaining.remove(j)
        kept.append(i)
    active = kept

    if not active:
        rec.deflations.append((n - 1, A.alpha))
        return None, rec, rec.deflated_pairs()

    active = np.asarray(active, dtype=int)
    order = active[np.argsort(-d[active], kind="stable")]
    if not np.array_equal(order, np.arange(n - 1)):
        rec.permutation = order

    zr = z[order]
    signs = np.where(zr < 0, -1.0, 1.0)
    if np.any(signs < 0):
        rec.sign_flips = signs
        zr = zr * signs

    reduced = OrderedIrreducibleArrowhead(
        d[order], zr, A.alpha,
        d_lo=A.d_lo[order] if A.d_lo is not None else None,
        z_lo=(z_lo[order] * signs if has_lo else None),
        alpha_lo=A.alpha_lo,
    )
    if rec.permutation is None and rec.sign_flips is None and not rec.deflations:
        rec = ReductionRecord(n=n)
    return reduced, rec, rec.deflated_pairs()


def backtransform(rec: ReductionRecord, pair):
    """Map an eigenpair of the reduced matrix back to the original one."""
    lam, v = pair
    v = np.asarray(v, dtype=float)
    n = rec.n
    m = v.size
    if rec.permutation is not None and rec.permutation.size != m - 1:
        raise ValueError("eigenvector length does not match the record")
    if rec.sign_flips is not None:
        v = v.copy()
        v[:-1] = v[:-1] * rec.sign_flips
    full = np.zeros(n)
    if rec.permutation is not None:
        full[rec.permutation] = v[:-1]
    else:
        if m != n:
            raise ValueError("eigenvector length does not match the record")
        full[: n - 1] = v[:-1]
    full[n - 1] = v[-1]
    return lam, rec._apply_rotations(full)
