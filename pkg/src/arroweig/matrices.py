"""Matrix containers used across the package.

A symmetric arrowhead matrix of order n is stored by its diagonal ``d``
(length n-1), the coupling vector ``z`` (length n-1) and the tip scalar
``alpha``::

    A = [ diag(d)   z     ]
        [ z^T       alpha ]

Inputs may carry optional trailing parts (``d_lo``, ``z_lo``, ``alpha_lo``)
holding the double-double corrections of the entries.  They are zero for
binary inputs and nonzero when a decimal source was promoted to double of
the working precision; only the doubled-precision code paths consume them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["ArrowheadMatrix", "OrderedIrreducibleArrowhead", "DPR1Matrix"]


def _as_vector(x):
    a = np.asarray(x, dtype=float)
    if a.ndim != 1:
        raise ValueError("expected a 1-d array")
    return a


@dataclass
class ArrowheadMatrix:
    """Real symmetric arrowhead matrix (d, z, alpha) of order len(d)+1."""

    d: np.ndarray
    z: np.ndarray
    alpha: float
    d_lo: np.ndarray | None = field(default=None, repr=False)
    z_lo: np.ndarray | None = field(default=None, repr=False)
    alpha_lo: float = field(default=0.0, repr=False)

    def __post_init__(self):
        self.d = _as_vector(self.d)
        self.z = _as_vector(self.z)
        self.alpha = float(self.alpha)
        if self.d.shape != self.z.shape:
            raise ValueError("d and z must have equal length")
        if self.d.size < 1:
            raise ValueError("arrowhead matrix needs n >= 2")
        if not (np.all(np.isfinite(self.d)) and np.all(np.isfinite(self.z))
                and np.isfinite(self.alpha)):
            raise ValueError("matrix entries must be finite")
        if self.d_lo is not None:
            self.d_lo = _as_vector(self.d_lo)
        if self.z_lo is not None:
            self.z_lo = _as_vector(self.z_lo)

    @property
    def n(self):
        return self.d.size + 1

    def to_dense(self):
        n = self.n
        a = np.zeros((n, n))
        a[np.arange(n - 1), np.arange(n - 1)] = self.d
        a[:-1, -1] = self.z
        a[-1, :-1] = self.z
        a[-1, -1] = self.alpha
        return a


class OrderedIrreducibleArrowhead(ArrowheadMatrix):
    """Arrowhead with strictly decreasing d and all couplings positive."""

    def __post_init__(self):
        super().__post_init__()
        if not np.all(np.diff(self.d) < 0):
            raise ValueError("diagonal must be strictly decreasing")
        if not np.all(self.z > 0):
            raise ValueError("couplings must be positive")


@dataclass
class DPR1Matrix:
    """Diagonal-plus-rank-one matrix diag(d) + rho * u u^T."""

    d: np.ndarray
    u: np.ndarray
    rho: object = 1.0  # float or DoubleDouble

    def __post_init__(self):
        self.d = _as_vector(self.d)
        self.u = _as_vector(self.u)
        if self.d.shape != self.u.shape:
            raise ValueError("d and u must have equal length")
        if not (np.all(np.isfinite(self.d)) and np.all(np.isfinite(self.u))):
            raise ValueError("matrix entries must be finite")

    @property
    def n(self):
        return self.d.size

    def rho_float(self):
        return float(self.rho)

    def to_dense(self):
        return np.diag(self.d) + self.rho_float() * np.outer(self.u, self.u)
