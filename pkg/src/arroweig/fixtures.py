"""Built-in regression fixtures and random problem generators.

The four named fixtures are numerically demanding matrices with known
reference spectra (computed independently at high precision); their
expected values are frozen here and consumed by the acceptance checks.
The generator families produce reproducible random instances of each
difficulty class.
"""

from __future__ import annotations

import numpy as np

from .core import EPS
from .matrices import ArrowheadMatrix

__all__ = [
    "example1",
    "example2",
    "example3",
    "example4",
    "generate",
    "FAMILIES",
]


def example1() -> ArrowheadMatrix:
    """Tiny eigenvalues under a huge tip; well conditioned for the solver."""
    return ArrowheadMatrix(
        d=[2e-3, 1e-7, 0.0, -1e-7, -2e-3],
        z=[1e7, 1e7, 1.0, 1e7, 1e7],
        alpha=1e20,
    )


# reference spectrum of example1, validated against exact rational
# bisection.  The near-zero eigenvalue is -9.99...e-21 (exactly
# -9.9999999999799999999500800...e-21): the (3,3) entry of the inverse is
# exactly -1e20, so the spectral radius of the inverse is at least 1e20,
# and the last eigenvector component (~1e-20) agrees.
EX1_EIGENVALUES = np.array([
    1.000000000000000e20,
    1.999001249000113e-3,
    4.987562099722817e-9,
    -9.99999999998e-21,
    -2.004985562101717e-6,
    -2.001001251000111e-3,
])

# eigenvector of the near-zero eigenvalue of example1 (overall sign free)
EX1_V4 = np.array([
    -4.999999999985000e-11,
    -9.999999999969000e-7,
    -9.999999999989999e-1,
    9.999999999970999e-7,
    4.999999999985000e-11,
    9.999999999970000e-21,
])


def example2() -> ArrowheadMatrix:
    """Poles separated by a few ulps; solvable without deflation.

    Built from the runtime machine precision so the entries are exactly
    representable.
    """
    eps = EPS
    return ArrowheadMatrix(
        d=[1.0 + 4 * eps, 1.0 + 3 * eps, 1.0 + 2 * eps, 1.0 + 1 * eps],
        z=[1.0, 2.0, 3.0, 4.0],
        alpha=0.0,
    )


# expected working-precision spectrum of example2, bit for bit (the
# correctly rounded eigenvalues; published prints of the two exterior
# values sit one ulp away, see EX2_EXTERIOR_PRINTED)
def ex2_eigenvalues():
    eps = EPS
    return np.array([
        6.0,
        1.0 + 4 * eps,
        1.0 + 3 * eps,
        1.0 + 2 * eps,
        -5.0,
    ])


# exterior eigenvalues as printed in the reference tables (1 ulp high)
EX2_EXTERIOR_PRINTED = (6.000000000000001, -4.999999999999999)

# 32-digit reference spectrum of example2, validated against exact
# rational bisection; the middle three are representable by the
# (shift, correction) pairs the solver reports.  The published lambda_3
# has a single-digit misprint (6.206... for 6.204..., identical tail).
EX2_REFERENCE_32 = [
    "6.0000000000000002018587317500285",
    "1.0000000000000008727792604471857",
    "1.0000000000000006204061701073114",
    "1.0000000000000003571862771540971",
    "-4.9999999999999998317843902083010",
]


def example3() -> ArrowheadMatrix:
    """Severe cancellation in the inverse tip; exercises doubled precision."""
    return ArrowheadMatrix(
        d=[1e10, 4.0, 3.0, 2.0, 1.0],
        z=[1e10, 1.0, 1.0, 1.0, 1.0],
        alpha=1e10,
    )


# correctly rounded spectrum (exact rational bisection); the 16-digit
# prints of these values are the published reference digits
EX3_EIGENVALUES = np.array([
    2.000000000000000e10,
    4.150396802279713e0,
    3.161498641430967e0,
    2.1880455963399137e0,
    1.2160935849485794e0,
    -7.160346250991725e-1,
])

# working-precision-only run misses the smallest eigenvalue in the 7th digit
EX3_LAM6_STANDARD = -7.160348702977373e-1

# the tip of the inverse at the second pole, accumulated in doubled precision
EX3_B2_DOUBLED = 6.166666668266667

# condition diagnostics for eigenvalues 2..6 (the first needs none)
EX3_KNU = np.array([
    9.999999090793056e-1,
    9.999996083428923e-1,
    1.000000117045544e0,
    9.999998561319470e-1,
    7.941165469988994e0,
])
EX3_KB = np.array([
    3.243243243540540e9,
    3.636363636818182e9,
    4.444444445000000e9,
    5.217390439488477e9,
    5.217390439488477e9,
])


def example4(n: int = 2501, seed: int = 1) -> ArrowheadMatrix:
    """Desk-scale physical instance: optical-mode frequencies around a tip.

    Pole frequencies fall in [5.87e14, 1.38e15], couplings span
    [1.05e4, 1.10e7] log-uniformly, and the tip sits inside the pole range.
    """
    rng = np.random.default_rng(seed)
    d = rng.uniform(5.87e14, 1.38e15, size=n - 1)
    d = np.sort(d)[::-1]
    while np.any(np.diff(d) == 0.0):  # ties are measure zero but cheap to fix
        d = np.sort(rng.uniform(5.87e14, 1.38e15, size=n - 1))[::-1]
    z = 10.0 ** rng.uniform(np.log10(1.05e4), np.log10(1.10e7), size=n - 1)
    return ArrowheadMatrix(d, z, 9.7949881500060375e14)


def _well_conditioned(n, rng):
    d = np.sort(rng.uniform(-3.0, 3.0, size=n - 1))[::-1]
    z = 10.0 ** rng.uniform(-1.0, 1.0, size=n - 1)
    return ArrowheadMatrix(d, z, rng.uniform(-3.0, 3.0))


def _huge_tip(n, rng):
    mags = 10.0 ** rng.uniform(-7.0, -2.0, size=n - 1)
    d = np.sort(mags * rng.choice([-1.0, 1.0], size=n - 1))[::-1]
    z = 10.0 ** rng.uniform(5.0, 8.0, size=n - 1)
    return ArrowheadMatrix(d, z, 10.0 ** rng.uniform(18.0, 21.0))


def _clustered_poles(n, rng):
    offsets = rng.choice(np.arange(1, 64), size=n - 1, replace=False)
    d = 1.0 + np.sort(offsets)[::-1] * EPS
    z = rng.uniform(1.0, 5.0, size=n - 1)
    return ArrowheadMatrix(d, z, rng.uniform(-1.0, 1.0))


def _cancellation_prone(n, rng):
    """Tip chosen so the inverse-tip numerator cancels to ~1e-12 of its size."""
    from fractions import Fraction

    d = np.sort(10.0 ** rng.uniform(-2.0, 2.0, size=n - 1)
                * rng.choice([-1.0, 1.0], size=n - 1))[::-1]
    while np.unique(d).size != d.size:
        d = np.sort(10.0 ** rng.uniform(-2.0, 2.0, size=n - 1)
                    * rng.choice([-1.0, 1.0], size=n - 1))[::-1]
    z = 10.0 ** rng.uniform(-1.0, 1.0, size=n - 1)
    i = int(rng.integers(0, n - 1))
    s = sum((Fraction(float(z[j])) ** 2 / (Fraction(float(d[j])) - Fraction(float(d[i])))
             for j in range(n - 1) if j != i), Fraction(0))
    scale = max(abs(s), Fraction(1))
    alpha = Fraction(float(d[i])) + s - Fraction(1, 10 ** 12) * scale
    return ArrowheadMatrix(d, z, float(alpha))


FAMILIES = {
    "well-conditioned": _well_conditioned,
    "huge-tip": _huge_tip,
    "clustered-poles": _clustered_poles,
    "cancellation-prone": _cancellation_prone,
    "example4": lambda n, rng: None,  # handled in generate()
}


def generate(family: str, n: int, seed: int) -> ArrowheadMatrix:
    """Deterministic random arrowhead from one of the named families."""
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}; choose from {sorted(FAMILIES)}")
    if n < 2:
        raise ValueError("n must be at least 2")
    if family == "example4":
        return example4(n=n, seed=seed)
    rng = np.random.default_rng(seed)
    return FAMILIES[family](n, rng)
