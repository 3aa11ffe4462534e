"""The doubly indexed gamma-ratio product and its numerical certification.

Outer index k, inner index k1 = 1..q; with t = z q^-k / pi each inner factor is

    Gamma(k1/q)^2 / (Gamma((k1 - t)/q) * Gamma((k1 + t)/q))

The identity this product is claimed to satisfy has no published proof, so
everything here reports agreement rather than asserting it. Gauss's
multiplication theorem reduces the inner product over k1 to sinc(z q^-k),
which :func:`gauss_reduced` exposes as an independent diagnostic.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import PoleProximity
from .numerics import PrecisionCfg, is_zero, log_gamma, sinc_ref, to_complex
from .product_core import EvalResult, Flag, Formula, ProductRequest, accumulate, term, TermValue


@dataclass(frozen=True)
class GammaTermBreakdown:
    k: int
    inner_factors: tuple
    product: object
    matched_ratio_term: object


def _gamma_args(z, q, k, wp):
    """(k1, numerator argument, minus argument, plus argument) for k1 = 1..q.

    k1/q and q^k are exact rationals; only z/pi is rounded.
    """
    ctx = wp.ctx
    t = ctx.convert(z) / (ctx.mpf(q) ** k * ctx.pi)
    for k1 in range(1, q + 1):
        yield k1, ctx.mpf(k1) / q, (k1 - t) / q, (k1 + t) / q


def _inner_logs(z, q, k, wp):
    out = []
    for k1, a, minus, plus in _gamma_args(z, q, k, wp):
        logs = []
        for which, arg in (("numerator", a), ("minus", minus), ("plus", plus)):
            try:
                logs.append(log_gamma(arg, wp))
            except PoleProximity as exc:
                raise PoleProximity("gamma", arg, detail=f"k1={k1}, {which} gamma") from exc
        out.append(2 * logs[0] - logs[1] - logs[2])
    return out


def gamma_log_addends(z, q, k, wp):
    """Log addends of the outer factor k (one per k1), for the product ladder."""
    return _inner_logs(z, q, k, wp)


def gamma_inner(z, q, k, prec):
    """Inner product over k1 at outer index k, with the matching ratio term."""
    z = to_complex(z, prec)
    ctx = prec.ctx
    req = ProductRequest(Formula.GAMMA_INF, z, q=q, N=k + 1, prec=prec)
    t = term(req, k)
    wp = prec.working(prec.bits + 16)
    inner = tuple(prec.ctx.convert(wp.ctx.exp(L)) for L in _inner_logs(z, q, k, wp))
    ratio = term(ProductRequest(Formula.RATIO_INF, z, q=q, N=k + 1, prec=prec), k)
    product = t.value_hint if t.value_hint is not None else ctx.exp(t.log_value)
    ratio_value = ratio.value_hint if ratio.value_hint is not None else ctx.exp(ratio.log_value)
    return GammaTermBreakdown(k, inner, product, ratio_value)


def gauss_reduced(z, q, k, prec):
    """Closed form of the inner product: sinc(z q^-k)."""
    ctx = prec.ctx
    z = to_complex(z, prec)
    return sinc_ref(z / ctx.mpf(q) ** k, prec)


def certification_tolerance(prec):
    """Termwise agreement threshold 10^(-0.3 P)."""
    return prec.ctx.mpf(10) ** (-0.3 * prec.bits)


def gamma_partial(z, q, N, prec):
    """Product of the first N outer factors.

    ``est_remainder`` borrows the ratio-product model only if every computed
    term agrees with the matching ratio term to 10^(-0.3 P); otherwise it is
    None.
    """
    z = to_complex(z, prec)
    ctx = prec.ctx
    req = ProductRequest(Formula.GAMMA_INF, z, q=q, N=N, prec=prec)
    terms = []
    agree = True
    tol = certification_tolerance(prec)
    for k in range(N):
        t = term(req, k)
        terms.append(t)
        if agree:
            r = term(ProductRequest(Formula.RATIO_INF, z, q=q, N=k + 1, prec=prec), k)
            agree = abs(ctx.expm1(t.log_value - r.log_value)) <= tol
    res = accumulate(req, terms)
    est = None
    if agree:
        from .convergence import remainder_model

        est = 0.0 if is_zero(z) else remainder_model(Formula.RATIO_INF, z, q, N)
    return EvalResult(res.value, res.log_value, res.terms_used, est, res.flags, res.winding, res.retries, res.bits)
