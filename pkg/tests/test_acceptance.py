"""Acceptance criteria 1-10, each printing one PASS/FAIL line."""

import math
import time

import pytest

from trigprod.bench import bench_formulas
from trigprod.convergence import fit_rate, iter_partials
from trigprod.errors import IndexOutOfRange, PoleProximity
from trigprod.numerics import PrecisionCfg
from trigprod.product_core import (
    Formula,
    ProductRequest,
    oracle_partial,
    partial_product,
    term,
)
from trigprod.verification import (
    DEFAULT_FINITE_INDICES,
    GridSpec,
    crosscheck_terms,
    example1_closed_form,
    example1_row,
    example1_z,
    verify_identity,
)

from test_product_core import brute_partial

P113 = PrecisionCfg(113)


def test_criterion_01_telescoping_grid(criterion):
    grid = GridSpec((-3, 3, 13), (-3, 3, 13), (2, 3, 5), DEFAULT_FINITE_INDICES)
    t0 = time.perf_counter()
    rep = verify_identity(Formula.TELESCOPE_FINITE, grid, 1e-12, P113)
    elapsed = time.perf_counter() - t0
    worst = float(rep.max_rel_residual)
    ok = rep.verdict == "pass" and worst <= 1e-12 and elapsed <= 60
    criterion(1, ok, f"finite telescope max residual {worst:.3g} over {rep.points_tested} points "
                     f"({rep.points_skipped} skipped), {elapsed:.1f}s")
    assert ok


def test_criterion_02_morrie(criterion):
    req = ProductRequest(Formula.MORRIE_CLASSIC, P113.ctx.pi / 9, q=2, m=0, n=3, prec=P113)
    value = partial_product(req).value
    err = abs(value - P113.ctx.mpf(1) / 8)
    # direct trig check, independent of the log path
    direct = P113.ctx.cos(P113.ctx.pi / 9) * P113.ctx.cos(2 * P113.ctx.pi / 9) * P113.ctx.cos(4 * P113.ctx.pi / 9)
    ok = err <= 1e-14 and abs(direct - value) <= 1e-14
    criterion(2, ok, f"Morrie product at pi/9 differs from 1/8 by {float(err):.3g}")
    assert ok


def test_criterion_03_viete(criterion):
    ctx = P113.ctx
    z = ctx.pi / 2
    req = ProductRequest(Formula.VIETE, z, q=2, N=20, prec=P113)
    value = partial_product(req).value
    target = abs(value - 2 / ctx.pi)
    closed = ctx.sin(z) / (ctx.mpf(2) ** 20 * ctx.sin(z / ctx.mpf(2) ** 20))
    vs_oracle = abs(value - closed)
    ok = target <= 1e-11 and vs_oracle <= 1e-30
    criterion(3, ok, f"Viete N=20: |P - 2/pi| = {float(target):.3g}, |P - oracle| = {float(vs_oracle):.3g}")
    assert ok


ORACLE_SUITE = [
    (Formula.VIETE, 2),
    (Formula.RATIO_INF, 2),
    (Formula.RATIO_INF, 3),
    (Formula.RATIO_INF, 5),
    (Formula.COSINE_SUM_INF, 2),
    (Formula.COSINE_SUM_INF, 3),
    (Formula.EXP_TOWER_INF, 2),
    (Formula.EXP_TOWER_INF, 3),
]


def _oracle_grid(prec):
    g = GridSpec((-2.8, 2.8, 8), (-2.8, 2.8, 8), (2,))
    return [z for z in g.arguments(prec) if abs(z) <= 4]


def test_criterion_04_oracle_equality(criterion):
    prec = P113
    tol = 2.0 ** (-prec.bits + 20)
    # the oracles are first validated against brute-force multiplication
    brute_worst = 0.0
    for formula, q in ORACLE_SUITE:
        for z in ("1", "0.5,-1.5", "-2,2"):
            for N in range(7):
                req = ProductRequest(formula, z, q=q, N=N, prec=prec)
                brute_worst = max(brute_worst, float(abs(oracle_partial(req) / brute_partial(formula, req.z, q, N) - 1)))
    exponent_sums = all(
        sum(q**k * (k * (q - 1) + q) for k in range(N)) == N * q**N for N in range(1, 9) for q in range(2, 6)
    )
    worst, where, checked, skipped = 0.0, None, 0, 0
    for formula, q in ORACLE_SUITE:
        for z in _oracle_grid(prec):
            try:
                partials = list(iter_partials(formula, z, q, 24, prec))
            except PoleProximity:
                skipped += 1
                continue
            for res in partials:
                req = ProductRequest(formula, z, q=q, N=res.terms_used, prec=prec)
                r = float(abs(res.value / oracle_partial(req) - 1))
                checked += 1
                if r > worst:
                    worst, where = r, (formula.value, q, complex(z), res.terms_used)
    ok = brute_worst <= tol and exponent_sums and worst <= tol
    criterion(4, ok, f"oracle equality worst {worst:.3g} (tol {tol:.3g}) at {where} over {checked} checks, "
                     f"{skipped} skipped; brute-force oracle check {brute_worst:.3g}; exponent sums "
                     f"{'ok' if exponent_sums else 'WRONG'}")
    assert ok


def test_criterion_05_rates(criterion):
    t0 = time.perf_counter()
    ratio = fit_rate(Formula.RATIO_INF, 1, 3, range(2, 16), P113)
    tower = fit_rate(Formula.EXP_TOWER_INF, 1, 2, range(4, 40), P113)
    elapsed = time.perf_counter() - t0
    ok = (
        abs(ratio.fitted_log_rate / (-2 * math.log(3)) - 1) <= 0.02
        and abs(tower.fitted_log_rate / (-math.log(2)) - 1) <= 0.05
        and elapsed <= 30
    )
    criterion(5, ok, f"ratio q=3 slope {ratio.fitted_log_rate:.5f} (rel err {ratio.rate_rel_error:.2e}); "
                     f"tower q=2 slope {tower.fitted_log_rate:.5f} (rel err {tower.rate_rel_error:.2e}); "
                     f"{elapsed:.1f}s")
    assert ok


def test_criterion_06_cosine_sum_bridge(criterion):
    grid = GridSpec((-2, 2, 9), (-2, 2, 9), (2, 3))
    rep = crosscheck_terms(Formula.COSINE_SUM_INF, Formula.RATIO_INF, grid, P113, kmax=6, tol=1e-12)
    worst = float(rep.max_rel_residual)
    ok = rep.verdict == "pass" and worst <= 1e-12
    criterion(6, ok, f"cosine-sum vs ratio(2q) termwise worst {worst:.3g} over {rep.points_tested} points "
                     f"({rep.points_skipped} skipped)")
    assert ok


@pytest.mark.slow
def test_criterion_07_gamma_certification(criterion):
    grid = GridSpec((-2, 2, 9), (-2, 2, 9), (2, 3, 4, 5))
    rep = crosscheck_terms(Formula.GAMMA_INF, Formula.RATIO_INF, grid, P113, kmax=3)
    w = rep.worst
    ok = rep.verdict == "finding" and w is not None and rep.max_rel_residual is not None
    gauss = float(rep.extra["gauss_reduced_max_residual"])
    criterion(7, ok, f"finding: gamma vs ratio termwise max residual {float(rep.max_rel_residual):.3g} at "
                     f"z={complex(w.z)}, q={w.q}; gamma terms equal sinc(z q^-k) to {gauss:.3g}")
    assert ok


def test_criterion_08_example_table(criterion):
    worst_z = worst_p = 0.0
    for n in (2, 3, 4, 5):
        z, _ = example1_z(n, P113)
        worst_z = max(worst_z, float(abs(z - example1_closed_form(n, P113))))
        worst_p = max(worst_p, float(example1_row(n, N=24, prec=P113).residual))
    ok = worst_z <= 1e-12 and worst_p <= 1e-10
    criterion(8, ok, f"example z_n closed forms within {worst_z:.3g}; products at N=24 within {worst_p:.3g} of sinc")
    assert ok


ALL_FORMULAS = sorted(Formula, key=lambda f: f.value)


def _kw(formula, size):
    return dict(m=0, n=size) if formula.finite else dict(N=size)


def _base(formula):
    return 2 if formula in (Formula.VIETE, Formula.MORRIE_CLASSIC) else 3


def _properties(prec):
    failures = []
    eps = 2.0 ** (-prec.bits + 16)
    for f in ALL_FORMULAS:
        q = _base(f)
        z = "0.011,0.003" if f is Formula.EXP_TOWER_FINITE else "0.7,0.45"
        # incremental consistency: P_{n+1} = P_n * t_n
        for size in (1, 2, 3):
            a = partial_product(ProductRequest(f, z, q=q, prec=prec, **_kw(f, size)))
            req = ProductRequest(f, z, q=q, prec=prec, **_kw(f, size + 1))
            b = partial_product(req)
            if abs(b.log_value - a.log_value - term(req, size).log_value) > eps:
                failures.append(f"incremental {f.value} size {size}")
        # conjugate symmetry off branch cuts
        a = partial_product(ProductRequest(f, z, q=q, prec=prec, **_kw(f, 3)))
        b = partial_product(ProductRequest(f, z.replace(",", ",-"), q=q, prec=prec, **_kw(f, 3)))
        if abs(a.value.conjugate() - b.value) > eps:
            failures.append(f"conjugate {f.value}")
        # empty ranges
        if f.finite:
            try:
                ProductRequest(f, z, q=q, m=2, n=2, prec=prec)
                failures.append(f"empty range accepted for {f.value}")
            except IndexOutOfRange:
                pass
        else:
            # z = 0 gives exactly 1
            if partial_product(ProductRequest(f, 0, q=q, N=5, prec=prec)).value != 1:
                failures.append(f"z=0 limit {f.value}")
    # pole-guard skip accounting on the finite telescope grid
    grid = GridSpec((-3, 3, 7), (-3, 3, 7), (2, 3), DEFAULT_FINITE_INDICES)
    rep = verify_identity(Formula.TELESCOPE_FINITE, grid, 1e-12, prec)
    if rep.points_tested + rep.points_skipped != grid.cardinality:
        failures.append("skip accounting")
    skips = [(complex(p.z), p.q, p.index) for p in rep.skips]
    return failures, skips


def test_criterion_09_properties(criterion):
    fail_lo, skips_lo = _properties(PrecisionCfg(113))
    fail_hi, skips_hi = _properties(PrecisionCfg(256))
    same_skips = skips_lo == skips_hi
    failures = fail_lo + [f + " (P=256)" for f in fail_hi] + ([] if same_skips else ["skip sets differ"])
    ok = not failures
    criterion(9, ok, "property suites green at P=113 and P=256" if ok else "; ".join(failures))
    assert ok


def test_criterion_10_bench_ordering(criterion):
    ratio, tower = bench_formulas([Formula.RATIO_INF, Formula.EXP_TOWER_INF], 2, 1e-12, 40, P113, timing=False)
    ok = ratio.median_terms is not None and tower.median_terms is not None and ratio.median_terms < tower.median_terms
    criterion(10, ok, f"median terms at 1e-12, q=2: ratio {ratio.median_terms}, tower {tower.median_terms}")
    assert ok
