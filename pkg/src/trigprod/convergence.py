"""Truncation control, remainder models and empirical convergence rates."""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass

from .errors import InsufficientSamples, PoleProximity, ToleranceUnreachable
from .numerics import PrecisionCfg, is_zero, sinc_ref, to_complex
from .product_core import (
    MAX_TERMS,
    MAX_TOWER_EXPONENT_BITS,
    EvalResult,
    Formula,
    ProductRequest,
    accumulate,
    partial_product,
    term,
)

# geometric base of the remainder for the ratio-type families
_RATIO_BASE = {
    Formula.VIETE: lambda q: 2,
    Formula.RATIO_INF: lambda q: q,
    Formula.COSINE_SUM_INF: lambda q: 2 * q,
    Formula.GAMMA_INF: lambda q: q,
}


@dataclass(frozen=True)
class ConvergenceReport:
    formula: Formula
    z: object
    q: int
    samples: tuple  # ((N, residual), ...)
    fitted_log_rate: float
    expected_log_rate: float
    rate_rel_error: float
    excluded: tuple = ()  # ((N, reason), ...)
    bits: int = 113


def expected_log_rate(formula, q):
    """Predicted slope of ln(residual) against N."""
    formula = Formula.parse(formula)
    if formula is Formula.EXP_TOWER_INF:
        return -math.log(q)
    if formula in _RATIO_BASE:
        return -2 * math.log(_RATIO_BASE[formula](q))
    raise ValueError(f"{formula.name} is not an infinite product")


def remainder_model(formula, z, q, N):
    """Order-of-magnitude estimate of |P_N / sinc(z) - 1|.

    |z|^2 b^(-2N) / 6 for the ratio-type families (b = 2, q or 2q) and
    |z|^2 q^(-N) / 6 for the exponent tower; both come from expanding the
    telescoped closed forms in the small argument z b^-N.
    """
    formula = Formula.parse(formula)
    if N < 0:
        raise ValueError(f"N must be >= 0, got {N}")
    az2 = float(abs(complex(z))) ** 2
    if formula is Formula.EXP_TOWER_INF:
        return az2 * float(q) ** (-N) / 6
    if formula in _RATIO_BASE:
        b = _RATIO_BASE[formula](q)
        return az2 * float(b) ** (-2 * N) / 6
    raise ValueError(f"{formula.name} is not an infinite product")


def max_terms(formula, q, maxN=MAX_TERMS):
    """Largest usable N, honouring the exponent cap of the tower product."""
    maxN = min(maxN, MAX_TERMS)
    if Formula.parse(formula) is Formula.EXP_TOWER_INF:
        maxN = min(maxN, MAX_TOWER_EXPONENT_BITS * math.log(2) // math.log(q))
        while q**maxN > 2**MAX_TOWER_EXPONENT_BITS:
            maxN -= 1
    return int(maxN)


def iter_partials(formula, z, q, N_max, prec):
    """Yield the partial products for N = 0, 1, ..., N_max incrementally.

    Each step multiplies the previous product by one more term, so a sweep
    costs N_max term evaluations rather than N_max^2 / 2.
    """
    formula = Formula.parse(formula)
    z = to_complex(z, prec)
    ctx = prec.ctx
    if is_zero(z):
        for N in range(N_max + 1):
            yield partial_product(ProductRequest(formula, z, q=q, N=N, prec=prec))
        return
    req = ProductRequest(formula, z, q=q, N=N_max, prec=prec)
    terms = []
    yield EvalResult(ctx.mpc(1), ctx.mpc(0), 0, remainder_model(formula, z, q, 0), bits=prec.bits)
    for k in range(N_max):
        terms.append(term(req, k))
        res = accumulate(req, terms)
        est = remainder_model(formula, z, q, k + 1)
        yield EvalResult(res.value, res.log_value, res.terms_used, est, res.flags, res.winding, res.retries, res.bits)


def residual_vs_sinc(value, z, prec):
    """|value / sinc(z) - 1| with the reference evaluated at 2P."""
    ref_prec = PrecisionCfg(2 * prec.bits)
    ctx = ref_prec.ctx
    ref = sinc_ref(z, ref_prec)
    if ref == 0:
        raise PoleProximity("sinc", z, detail="sinc(z) = 0, relative residual undefined")
    return ctx.convert(abs(ctx.convert(value) / ref - 1))


def run_to_tolerance(formula, z, q, tol, maxN=MAX_TERMS, prec=None):
    """Evaluate with the smallest N whose remainder model is <= tol / 100."""
    formula = Formula.parse(formula)
    prec = prec or PrecisionCfg()
    z = to_complex(z, prec)
    if tol <= prec.floor:
        raise ToleranceUnreachable(
            f"tolerance {tol:g} is below the precision floor 2^({24 - prec.bits}) at {prec.bits} bits"
        )
    if is_zero(z):
        return partial_product(ProductRequest(formula, z, q=q, N=0, prec=prec))
    cap = max_terms(formula, q, maxN)
    for N in range(1, cap + 1):
        if remainder_model(formula, z, q, N) <= tol / 100:
            return partial_product(ProductRequest(formula, z, q=q, N=N, prec=prec))
    raise ToleranceUnreachable(
        f"{formula.name} at z={complex(z)} needs more than {cap} terms for tolerance {tol:g}",
        achievable=remainder_model(formula, z, q, cap),
    )


def fit_rate(formula, z, q, N_range, prec=None):
    """Least-squares slope of ln(residual) over N.

    Samples at the precision floor (residual < 2^(-P+24)), exact zeros and
    pole-guarded N are excluded and listed in ``excluded``.
    """
    formula = Formula.parse(formula)
    prec = prec or PrecisionCfg()
    z = to_complex(z, prec)
    Ns = sorted(set(int(N) for N in N_range))
    if not Ns:
        raise InsufficientSamples("empty N range")
    floor = prec.floor
    samples, excluded = [], []
    try:
        partials = list(iter_partials(formula, z, q, Ns[-1], prec))
    except PoleProximity as exc:
        raise InsufficientSamples(f"pole guard fired: {exc}") from exc
    for N in Ns:
        try:
            r = residual_vs_sinc(partials[N].value, z, prec)
        except PoleProximity as exc:
            excluded.append((N, str(exc)))
            continue
        if r == 0 or r < floor:
            excluded.append((N, "precision floor"))
            continue
        samples.append((N, r))
    if len(samples) < 5:
        raise InsufficientSamples(f"only {len(samples)} usable samples (need 5)")
    xs = [float(N) for N, _ in samples]
    ys = [float(prec.ctx.ln(r)) for _, r in samples]
    slope, _ = statistics.linear_regression(xs, ys)
    expected = expected_log_rate(formula, q)
    return ConvergenceReport(
        formula, z, q, tuple(samples), slope, expected,
        abs(slope - expected) / abs(expected), tuple(excluded), prec.bits,
    )
