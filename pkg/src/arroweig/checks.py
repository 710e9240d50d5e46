"""Named verification checks: fixture regressions and property suites.

Each check returns a :class:`CheckResult`; the registry backs both the
``check`` command of the CLI and the acceptance test module, so there is a
single definition of what passing means.  Tolerances are fixed here, not
configurable.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .applications import (
    HermitianArrowhead,
    TriangularArrowhead,
    hermitian_eig,
    triangular_svd,
)
from .core import EPS, _ShiftSource, bisect_extreme
from .dd import DoubleDouble, dd_div, dd_sub, dd_from_decimal_string, two_prod, two_sum
from .dd import dd_add, dd_mul
from .matrices import ArrowheadMatrix, DPR1Matrix
from .dpr1 import dpr1_eig
from .fixtures import (
    EX1_EIGENVALUES,
    EX1_V4,
    EX2_EXTERIOR_PRINTED,
    EX2_REFERENCE_32,
    EX3_B2_DOUBLED,
    EX3_EIGENVALUES,
    EX3_KB,
    EX3_KNU,
    EX3_LAM6_STANDARD,
    ex2_eigenvalues,
    example1,
    example2,
    example3,
    example4,
)
from .oracle import oracle_eig, oracle_eigvec, residual_report, tolerance_bounds
from .refine import aheig, b_doubled, eig_all, k_b, zeta_ratio

__all__ = ["CheckResult", "CHECK_NAMES", "run_check", "run_checks"]


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float


def _ulps(x, ref):
    return abs(x - ref) / np.spacing(abs(ref))


def _worst(items):
    """Max of a sequence, tolerating emptiness."""
    items = list(items)
    return max(items) if items else 0.0


# ---------------------------------------------------------------------------
# fixture regressions
# ---------------------------------------------------------------------------

def _check_example1():
    A = example1()
    t0 = time.perf_counter()
    res = eig_all(A)
    solve_s = time.perf_counter() - t0
    ulps = [_ulps(res.eigenvalues[k], EX1_EIGENVALUES[k]) for k in range(6)]
    v4 = res.vectors[:, 3]
    sign = -1.0 if v4[2] * EX1_V4[2] < 0 else 1.0
    vrel = float(np.max(np.abs(sign * v4 - EX1_V4) / np.abs(EX1_V4)))
    ok = max(ulps) <= 1.0 and vrel <= 1e-14 and solve_s < 0.1
    return ok, (f"eigenvalue ulps {['%.0f' % u for u in ulps]}, "
                f"v4 rel {vrel:.2e} (<=1e-14), solve {solve_s * 1e3:.1f} ms (<100)")


def _check_example2():
    A = example2()
    t0 = time.perf_counter()
    res = eig_all(A)
    solve_s = time.perf_counter() - t0
    expected = ex2_eigenvalues()
    bit_ok = bool(np.all(res.eigenvalues == expected))
    paper_ulps = [_ulps(res.eigenvalues[0], EX2_EXTERIOR_PRINTED[0]),
                  _ulps(res.eigenvalues[4], EX2_EXTERIOR_PRINTED[1])]
    rep = residual_report(A, res.eigenvalues, res.vectors, pairs=res.pairs)
    # the (shift, correction) pairs represent the interior eigenvalues to
    # doubled precision; compare against the 32-digit reference values
    pair_rels = []
    for k in (2, 3, 4):
        pair = res.pairs[k - 1]
        ref = dd_from_decimal_string(EX2_REFERENCE_32[k - 1])
        diff = dd_sub(pair.dd_value(), ref)
        pair_rels.append(abs(float(dd_div(diff, ref))))
    ok = (bit_ok and rep.interlacing_ok and max(pair_rels) <= 1e-25
          and max(paper_ulps) <= 1.0 and solve_s < 0.1)
    return ok, (f"interior bits exact: {bit_ok}, exterior vs printed "
                f"{['%.0f ulp' % u for u in paper_ulps]}, interlacing "
                f"{rep.interlacing_ok}, pair rel {max(pair_rels):.2e} (<=1e-25), "
                f"solve {solve_s * 1e3:.1f} ms")


def _check_example3():
    A = example3()
    t0 = time.perf_counter()
    res = eig_all(A)
    solve_s = time.perf_counter() - t0
    ulps = [_ulps(res.eigenvalues[k], EX3_EIGENVALUES[k]) for k in range(6)]
    pair6, _ = aheig(A, 6, policy="force-standard")
    std_rel = abs(pair6.lam - EX3_LAM6_STANDARD) / abs(EX3_LAM6_STANDARD)
    b2 = float(b_doubled(A, 2))
    b_ulp = _ulps(b2, EX3_B2_DOUBLED)
    kb_rel, knu_rel = [], []
    for k in range(2, 7):
        _, diag = aheig(A, k)
        kb_rel.append(abs(diag.k_b - EX3_KB[k - 2]) / EX3_KB[k - 2])
        knu_rel.append(abs(diag.k_nu - EX3_KNU[k - 2]) / EX3_KNU[k - 2])
    ok = (max(ulps) <= 1.0 and std_rel <= 1e-10 and b_ulp <= 1.0
          and max(kb_rel) <= 1e-6 and max(knu_rel) <= 1e-3 and solve_s < 0.5)
    return ok, (f"eigenvalue ulps {['%.0f' % u for u in ulps]}, "
                f"standard-precision lam6 rel {std_rel:.2e} (<=1e-10), "
                f"b ulp {b_ulp:.0f}, Kb rel {max(kb_rel):.2e} (<=1e-6), "
                f"Knu rel {max(knu_rel):.2e} (<=1e-3)")


def _check_example4():
    A = example4(n=2501, seed=1)
    t0 = time.perf_counter()
    res = eig_all(A)
    solve_s = time.perf_counter() - t0
    rep = residual_report(A, res.eigenvalues, res.vectors, pairs=res.pairs)
    bound = 50 * A.n * EPS
    ok = rep.interlacing_ok and rep.max_orthogonality_defect <= bound and solve_s < 30.0
    return ok, (f"n={A.n}: interlacing {rep.interlacing_ok}, defect "
                f"{rep.max_orthogonality_defect:.2e} (<= {bound:.2e}), "
                f"residual {rep.max_residual:.2e}, solve {solve_s:.1f} s (<30)")


# ---------------------------------------------------------------------------
# random suite shared by the oracle-equivalence and bisection audits
# ---------------------------------------------------------------------------

_SUITE_SIZE = 500
_suite_cache = {}


def _random_ordered_irreducible(idx):
    """Log-uniform magnitudes over 1e-10..1e10, every fifth tip planted to
    cancel the inverse-tip numerator to ~1e-12 of its magnitude."""
    rng = np.random.default_rng(7_000_000 + idx)
    n = int(rng.integers(2, 9))
    while True:
        d = np.sort(10.0 ** rng.uniform(-10, 10, n - 1)
                    * rng.choice([-1.0, 1.0], n - 1))[::-1]
        if np.unique(d).size == d.size:
            break
    z = 10.0 ** rng.uniform(-10, 10, n - 1)
    if idx % 5 == 0 and n >= 3:
        i = int(rng.integers(0, n - 1))
        s = sum((Fraction(z[j]) ** 2 / (Fraction(d[j]) - Fraction(d[i]))
                 for j in range(n - 1) if j != i), Fraction(0))
        scale = max(abs(s), Fraction(1))
        alpha = float(Fraction(d[i]) + s - scale / 10 ** 12)
    else:
        alpha = float(10.0 ** rng.uniform(-10, 10) * rng.choice([-1.0, 1.0]))
    return ArrowheadMatrix(d, z, alpha)


def _suite_entry(idx):
    if idx not in _suite_cache:
        A = _random_ordered_irreducible(idx)
        _suite_cache[idx] = (A, oracle_eig(A))
    return _suite_cache[idx]


def _check_oracle_random():
    worst_lam = 0.0
    worst_vec = 0.0
    checked = 0
    for idx in range(_SUITE_SIZE):
        A, ref = _suite_entry(idx)
        n = A.n
        src = _ShiftSource.from_matrix(A)
        for k in range(1, n + 1):
            pair, diag = aheig(A, k, source=src)
            from .core import choose_shift
            i, _ = choose_shift(A, k, source=src)
            model = tolerance_bounds(n, k_b(A, i, source=src),
                                     zeta_ratio(A, i, source=src))
            lam_ref = ref[k - 1]
            err = abs(float(dd_div(dd_sub(two_sum(pair.lam, 0.0), lam_ref),
                                   lam_ref)))
            ratio = err / (model.kappa_lambda_bound * EPS)
            worst_lam = max(worst_lam, ratio)
            vec_ref = oracle_eigvec(A, lam_ref)
            for j in range(n):
                rj = float(vec_ref[j])
                comp_err = abs(pair.vector[j] - rj) / abs(rj)
                worst_vec = max(worst_vec, comp_err / model.eigvec_component_bound)
            checked += 1
    ok = worst_lam <= 1.0 and worst_vec <= 1.0
    return ok, (f"{checked} eigenpairs over {_SUITE_SIZE} matrices: worst "
                f"lambda err / bound = {worst_lam:.3f}, worst component err "
                f"/ bound = {worst_vec:.3f} (both <= 1)")


def _check_bisect_audit():
    worst = 0.0
    for idx in range(_SUITE_SIZE):
        A, ref = _suite_entry(idx)
        n = A.n
        lam_hi, lam_lo = float(ref[0]), float(ref[-1])
        side, lam_ref = ("R", ref[0]) if abs(lam_hi) >= abs(lam_lo) else ("L", ref[-1])
        approx = bisect_extreme(A.d, A.z, A.alpha, side)
        err = abs(float(dd_div(dd_sub(two_sum(approx, 0.0), lam_ref), lam_ref)))
        bound = 1.06 * n * (math.sqrt(n) + 1.0) * EPS
        worst = max(worst, err / bound)
    ok = worst <= 1.0
    return ok, (f"dominant-extreme bisection over {_SUITE_SIZE} matrices: "
                f"worst err / (1.06 n (sqrt(n)+1) eps) = {worst:.3f} (<= 1)")


# ---------------------------------------------------------------------------
# derived solvers
# ---------------------------------------------------------------------------

def _unitary_defect(U):
    G = U.conj().T @ U - np.eye(U.shape[1])
    return float(np.max(np.abs(G)))


def _check_applications():
    msgs = []
    ok = True

    # Hermitian fixture and random suite
    C = HermitianArrowhead([0.0], [1j], 0.0)
    lam1, u1 = hermitian_eig(C, 1)
    lam2, u2 = hermitian_eig(C, 2)
    herm_fix = (abs(lam1 - 1.0) <= 4 * EPS and abs(lam2 + 1.0) <= 4 * EPS
                and np.linalg.norm(C.to_dense() @ u1 - lam1 * u1) <= 8 * EPS
                and np.linalg.norm(C.to_dense() @ u2 - lam2 * u2) <= 8 * EPS)
    ok &= herm_fix
    worst_u = 0.0
    for seed in range(12):
        rng = np.random.default_rng(41_000 + seed)
        n = int(rng.integers(3, 7))
        d = np.sort(rng.uniform(-4, 4, n - 1))[::-1]
        z = rng.uniform(-2, 2, n - 1) + 1j * rng.uniform(-2, 2, n - 1)
        C = HermitianArrowhead(d, z, rng.uniform(-4, 4))
        U = np.column_stack([hermitian_eig(C, k)[1] for k in range(1, n + 1)])
        worst_u = max(worst_u, _unitary_defect(U) / (50 * n * EPS))
    ok &= worst_u <= 1.0
    msgs.append(f"hermitian: fixture {herm_fix}, worst U*U defect/bound {worst_u:.3f}")

    # triangular SVD: golden-ratio fixture plus random reconstruction
    B = TriangularArrowhead([1.0], [1.0], 1.0)
    s_hi = triangular_svd(B, 1)[0]
    s_lo = triangular_svd(B, 2)[0]
    golden = (_ulps(s_hi, 1.618033988749895) <= 1.0
              and _ulps(s_lo, 0.618033988749895) <= 1.0)
    ok &= golden
    worst_rec = 0.0
    for seed in range(12):
        rng = np.random.default_rng(42_000 + seed)
        n = int(rng.integers(2, 7))
        while True:
            d = rng.uniform(0.5, 4.0, n - 1) * rng.choice([-1.0, 1.0], n - 1)
            if np.unique(d * d).size == n - 1:
                break
        B = TriangularArrowhead(d, rng.uniform(0.5, 2.0, n - 1)
                                * rng.choice([-1.0, 1.0], n - 1),
                                rng.uniform(0.5, 3.0) * rng.choice([-1.0, 1.0]))
        triples = [triangular_svd(B, k) for k in range(1, n + 1)]
        U = np.column_stack([t[1] for t in triples])
        V = np.column_stack([t[2] for t in triples])
        S = np.array([t[0] for t in triples])
        Bd = B.to_dense()
        rec = np.linalg.norm(Bd - U @ np.diag(S) @ V.T, 2)
        worst_rec = max(worst_rec, rec / (50 * n * EPS * np.linalg.norm(Bd, 2)))
    ok &= worst_rec <= 1.0
    msgs.append(f"svd: golden pair {golden}, worst ||B-USV'||/bound {worst_rec:.3f}")

    # DPR1 fixture plus interlacing/residual suite
    m = DPR1Matrix([2.0, 1.0], [1.0, 1.0], 1.0)
    l1 = dpr1_eig(m, 1)[0]
    l2 = dpr1_eig(m, 2)[0]
    dpr1_fix = (_ulps(l1, 3.618033988749895) <= 1.0
                and _ulps(l2, 1.381966011250105) <= 1.0)
    ok &= dpr1_fix
    worst_res = 0.0
    inter_ok = True
    for seed in range(12):
        rng = np.random.default_rng(43_000 + seed)
        n = int(rng.integers(2, 9))
        d = np.sort(rng.uniform(-4, 4, n))[::-1]
        while np.unique(d).size != n:
            d = np.sort(rng.uniform(-4, 4, n))[::-1]
        u = rng.uniform(0.3, 2.0, n) * rng.choice([-1.0, 1.0], n)
        m = DPR1Matrix(d, u, 1.0)
        Md = m.to_dense()
        norm_m = np.linalg.norm(Md, 2)
        lams = []
        for k in range(1, n + 1):
            lam, q = dpr1_eig(m, k)
            lams.append(lam)
            worst_res = max(worst_res,
                            np.linalg.norm(Md @ q - lam * q) / (50 * n * EPS * norm_m))
        seq = np.empty(2 * n)
        seq[0::2] = lams
        seq[1::2] = d
        inter_ok &= bool(np.all(np.diff(seq) < 0))
    ok &= worst_res <= 1.0 and inter_ok
    msgs.append(f"dpr1: fixture {dpr1_fix}, interlacing {inter_ok}, "
                f"worst residual/bound {worst_res:.3f}")
    return bool(ok), "; ".join(msgs)


# ---------------------------------------------------------------------------
# double-double kernel
# ---------------------------------------------------------------------------

def _check_dd_kernel():
    rng = np.random.default_rng(99)
    # error-free transformation: hi + lo == a + b exactly, 1e6 pairs
    a = 10.0 ** rng.uniform(-30, 30, 1_000_000) * rng.choice([-1.0, 1.0], 1_000_000)
    b = 10.0 ** rng.uniform(-30, 30, 1_000_000) * rng.choice([-1.0, 1.0], 1_000_000)
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    bad = 0
    for i in range(a.size):
        if math.fsum((a[i], b[i], -s[i], -err[i])) != 0.0:
            bad += 1
    exact_ok = bad == 0

    # arithmetic against an exact rational oracle
    bound = 16 * EPS * EPS
    worst = 0.0
    ops = {
        "add": (dd_add, lambda x, y: x + y),
        "sub": (dd_sub, lambda x, y: x - y),
        "mul": (dd_mul, lambda x, y: x * y),
        "div": (dd_div, lambda x, y: x / y),
    }
    rng2 = np.random.default_rng(100)
    for _ in range(4000):
        xh = float(10.0 ** rng2.uniform(-20, 20) * rng2.choice([-1.0, 1.0]))
        yh = float(10.0 ** rng2.uniform(-20, 20) * rng2.choice([-1.0, 1.0]))
        x = two_prod(xh, 1.0 + float(rng2.uniform(-1e-17, 1e-17)))
        y = two_prod(yh, 1.0 + float(rng2.uniform(-1e-17, 1e-17)))
        fx = x.as_fraction()
        fy = y.as_fraction()
        for name, (op, frac_op) in ops.items():
            got = op(x, y).as_fraction()
            want = frac_op(fx, fy)
            if want == 0:
                if got != 0:
                    worst = math.inf
                continue
            rel = abs((got - want) / want)
            worst = max(worst, float(rel) / bound)
    arith_ok = worst <= 1.0
    ok = exact_ok and arith_ok
    return ok, (f"two_sum exactness: {bad}/1e6 failures; arithmetic worst "
                f"rel err / (16 eps^2) = {worst:.3f} (<= 1)")


CHECKS = {
    "example1": _check_example1,
    "example2": _check_example2,
    "example3": _check_example3,
    "example4": _check_example4,
    "oracle-random": _check_oracle_random,
    "bisect-audit": _check_bisect_audit,
    "applications": _check_applications,
    "dd-kernel": _check_dd_kernel,
}

CHECK_NAMES = list(CHECKS)


def run_check(name: str) -> CheckResult:
    if name not in CHECKS:
        raise ValueError(f"unknown check {name!r}; choose from {CHECK_NAMES}")
    t0 = time.perf_counter()
    try:
        passed, detail = CHECKS[name]()
    except Exception as exc:  # a crashing check is a failing check
        passed, detail = False, f"raised {type(exc).__name__}: {exc}"
    return CheckResult(name, bool(passed), detail, time.perf_counter() - t0)


def run_checks(names=None):
    return [run_check(n) for n in (names or CHECK_NAMES)]
