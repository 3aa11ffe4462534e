"""Terms-to-accuracy benchmark of the infinite products as sinc evaluators."""

from __future__ import annotations

import cmath
import math
import random
import statistics
import time
from dataclasses import dataclass

from .convergence import iter_partials, max_terms, residual_vs_sinc
from .errors import PoleProximity, ToleranceUnreachable
from .numerics import PrecisionCfg, to_complex
from .product_core import BASE_TWO_FORMULAS, Formula, ProductRequest, partial_product

DEFAULT_SEED = 20240601


@dataclass(frozen=True)
class FormulaBench:
    formula: Formula
    q: int
    terms: tuple  # per sample; None where the target was not reached
    median_terms: float | None
    median_seconds: float | None
    precision_retries: int
    unreached: int


def sample_points(count, seed=DEFAULT_SEED, r_min=0.5, r_max=1.5):
    """Deterministic complex samples with |z| in [r_min, r_max]."""
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        r = rng.uniform(r_min, r_max)
        theta = rng.uniform(0.0, 2 * math.pi)
        out.append(cmath.rect(r, theta))
    return out


def terms_needed(formula, z, q, target, prec):
    """Smallest N whose partial product is within ``target`` of sinc(z).

    Returns ``(N, retries)``, with N None when the cap is reached first.
    """
    cap = max_terms(formula, q)
    for res in iter_partials(formula, z, q, cap, prec):
        if residual_vs_sinc(res.value, z, prec) <= target:
            return res.terms_used, res.retries
    return None, 0


def bench_formulas(formulas, q, target, samples, prec=None, seed=DEFAULT_SEED, timing=True):
    """Median terms and wall time per evaluation for each formula."""
    prec = prec or PrecisionCfg()
    if target <= prec.floor:
        raise ToleranceUnreachable(
            f"target {target:g} is below the precision floor 2^({24 - prec.bits}) at {prec.bits} bits"
        )
    points = [to_complex(z, prec) for z in sample_points(samples, seed)]
    out = []
    for f in formulas:
        f = Formula.parse(f)
        if f.finite:
            raise ValueError(f"{f.name} is not an infinite product")
        fq = 2 if f in BASE_TWO_FORMULAS else q
        terms, seconds = [], []
        retries = 0
        for z in points:
            try:
                N, r = terms_needed(f, z, fq, target, prec)
            except PoleProximity:
                N, r = None, 0
            terms.append(N)
            retries += r
            if N is not None and timing:
                req = ProductRequest(f, z, q=fq, N=N, prec=prec)
                t0 = time.perf_counter()
                partial_product(req)
                seconds.append(time.perf_counter() - t0)
        reached = [t for t in terms if t is not None]
        out.append(FormulaBench(
            f, fq, tuple(terms),
            statistics.median(reached) if reached else None,
            statistics.median(seconds) if seconds else None,
            retries,
            len(terms) - len(reached),
        ))
    return out
