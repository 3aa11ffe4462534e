"""Term generators, partial products and closed-form oracles.

Every product is accumulated as a sum of logarithms. A term's log is built
from a short list of addends (for instance ``q^k * log sin(z q^-k)``); when
the addends are much larger than their sum the term is recomputed at a
wider precision, doubling up to 1024 bits (the precision ladder).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import (
    IndexOutOfRange,
    PoleProximity,
    RangeCapExceeded,
    UnsupportedFormula,
)
from .numerics import (
    MAX_LADDER_BITS,
    PrecisionCfg,
    default_precision,
    is_zero,
    log_trig,
    reduce_log,
    sin_vanishes,
    to_complex,
)

MAX_TERMS = 48
MAX_TOWER_EXPONENT_BITS = 96
LADDER_START_GUARD = 16
LADDER_MARGIN = 4
RANGE_LIMIT = 2**30


class Formula(enum.Enum):
    """Product families. Values are the command-line names."""

    MORRIE_CLASSIC = "eq1"
    VIETE = "eq2"
    TELESCOPE_FINITE = "eq3"
    EXP_TOWER_INF = "eq8"
    RATIO_INF = "eq9"
    COSINE_SUM_INF = "eq10"
    GAMMA_INF = "eq11"
    EXP_TOWER_FINITE = "eq12"

    @property
    def finite(self):
        return self in FINITE_FORMULAS

    @classmethod
    def parse(cls, name):
        """Look up by command-line name (``eq9``) or member name (``RATIO_INF``)."""
        if isinstance(name, cls):
            return name
        key = str(name).strip()
        for f in cls:
            if key.lower() == f.value or key.upper() == f.name:
                return f
        # eq4 is the same product as eq1, eq13 is textually eq3, eq15 is eq8 at q=3
        aliases = {"eq4": cls.MORRIE_CLASSIC, "eq13": cls.TELESCOPE_FINITE, "eq15": cls.EXP_TOWER_INF}
        if key.lower() in aliases:
            return aliases[key.lower()]
        raise ValueError(f"unknown formula {name!r}")


FINITE_FORMULAS = frozenset({Formula.MORRIE_CLASSIC, Formula.TELESCOPE_FINITE, Formula.EXP_TOWER_FINITE})
INFINITE_FORMULAS = frozenset(set(Formula) - FINITE_FORMULAS)
# families whose base is pinned to 2
BASE_TWO_FORMULAS = frozenset({Formula.MORRIE_CLASSIC, Formula.VIETE})


class Flag(str, enum.Enum):
    POLE_SKIP = "POLE_SKIP"
    BRANCH_WARNING = "BRANCH_WARNING"
    RANGE_ESCAPE = "RANGE_ESCAPE"
    PRECISION_RETRY = "PRECISION_RETRY"
    PRECISION_LIMIT = "PRECISION_LIMIT"


@dataclass(frozen=True)
class ProductRequest:
    """One evaluation: formula, argument, base, index range and precision.

    Finite formulas use ``m``/``n`` (product over k = m..n-1); infinite ones
    use ``N`` (k = 0..N-1).

    ``literal_factors`` evaluates the exponent-tower infinite product with all
    eight printed factors instead of the fused sine form. ``csc_tail`` swaps
    the trailing cot factor of the finite exponent-tower product for csc, the
    factor that makes the product telescope.
    """

    formula: Formula
    z: object
    q: int = 2
    m: int = 0
    n: int | None = None
    N: int | None = None
    prec: PrecisionCfg = field(default_factory=default_precision)
    literal_factors: bool = False
    csc_tail: bool = False

    def __post_init__(self):
        object.__setattr__(self, "formula", Formula.parse(self.formula))
        object.__setattr__(self, "z", to_complex(self.z, self.prec))
        f = self.formula
        if int(self.q) != self.q or self.q < 2:
            raise ValueError(f"q must be an integer >= 2, got {self.q}")
        if f in BASE_TWO_FORMULAS and self.q != 2:
            raise ValueError(f"{f.name} is defined for q = 2 only")
        if f.finite:
            if self.n is None:
                raise ValueError(f"{f.name} needs an upper index n")
            if self.m < 0 or self.n <= self.m:
                raise IndexOutOfRange(f"need 0 <= m < n, got m={self.m}, n={self.n}")
        else:
            if self.N is None:
                raise ValueError(f"{f.name} needs a truncation length N")
            if self.N < 0:
                raise IndexOutOfRange(f"N must be >= 0, got {self.N}")
            if self.N > MAX_TERMS:
                raise RangeCapExceeded(f"N={self.N} exceeds the cap of {MAX_TERMS} terms")
            if f is Formula.EXP_TOWER_INF and self.q**self.N > 2**MAX_TOWER_EXPONENT_BITS:
                raise RangeCapExceeded(f"q^N = {self.q}^{self.N} exceeds 2^{MAX_TOWER_EXPONENT_BITS}")

    @property
    def indices(self):
        if self.formula.finite:
            return range(self.m, self.n)
        return range(self.N)

    def replace(self, **changes):
        kw = dict(
            formula=self.formula, z=self.z, q=self.q, m=self.m, n=self.n, N=self.N,
            prec=self.prec, literal_factors=self.literal_factors, csc_tail=self.csc_tail,
        )
        kw.update(changes)
        return ProductRequest(**kw)


@dataclass(frozen=True)
class TermValue:
    """One factor: its principal log, the direct value when in range, flags.

    ``winding`` counts the multiples of 2*pi*i removed from the raw log sum.
    """

    log_value: object
    value_hint: object
    k: int
    flags: frozenset = frozenset()
    winding: int = 0
    retries: int = 0


@dataclass(frozen=True)
class EvalResult:
    value: object
    log_value: object
    terms_used: int
    est_remainder: float | None
    flags: frozenset = frozenset()
    winding: int = 0
    retries: int = 0
    bits: int = 113


# -- log-space building blocks -------------------------------------------------

def _log_power(exponent, fn, w, wp, flags):
    """exponent * principal log of fn(w); flags branch trouble for non-integer powers."""
    L = log_trig(fn, w, wp)
    if not (isinstance(exponent, int) or exponent.denominator == 1):
        _check_branch(L, wp, flags)
    return _scale(exponent, L, wp)


def _check_branch(L, wp, flags):
    if abs(L.imag) > wp.ctx.pi / 2:
        flags.add(Flag.BRANCH_WARNING)


def _scale(exponent, L, wp):
    ctx = wp.ctx
    if isinstance(exponent, Fraction):
        if exponent.denominator == 1:
            return int(exponent) * L
        return ctx.mpf(exponent.numerator) / exponent.denominator * L
    return exponent * L


def _log_z(z, wp, flags, exponent):
    ctx = wp.ctx
    if is_zero(z):
        raise PoleProximity("log", z, detail="z = 0")
    L = ctx.log(z)
    if isinstance(exponent, Fraction) and exponent.denominator != 1:
        _check_branch(L, wp, flags)
    return _scale(exponent, L, wp)


def _addends(req, k, wp, flags):
    """Log addends of the k-th factor, evaluated at working precision ``wp``."""
    ctx = wp.ctx
    f, q = req.formula, req.q
    z = ctx.convert(req.z)
    ln_q = ctx.log(q)

    if f is Formula.MORRIE_CLASSIC:
        return [log_trig("cos", z * 2**k, wp)]

    if f is Formula.TELESCOPE_FINITE:
        return [ln_q, log_trig("sin", z * q**k, wp), -log_trig("sin", z * q ** (k + 1), wp)]

    if f is Formula.VIETE:
        return [log_trig("cos", z / 2 ** (k + 1), wp)]

    if f is Formula.RATIO_INF:
        return [
            log_trig("sin", z / ctx.mpf(q) ** k, wp),
            -log_trig("sin", z / ctx.mpf(q) ** (k + 1), wp),
            -ln_q,
        ]

    if f is Formula.COSINE_SUM_INF:
        theta = z / ctx.mpf(2 * q) ** (k + 1)
        s = ctx.fsum(ctx.cos((2 * j - 1) * theta) for j in range(1, q + 1)) / q
        if abs(s) < wp.guard:
            raise PoleProximity("cos-sum", theta, detail="cosine sum ~ 0")
        return [ctx.log(s)]

    if f is Formula.EXP_TOWER_INF:
        qk, qk1 = q**k, q ** (k + 1)
        inner = z / ctx.mpf(q) ** k
        outer = z / ctx.mpf(q) ** (k + 1)
        head = [-qk * (k * (q - 1) + q) * ln_q, (q - 1) * qk * _log_z(z, wp, flags, 1)]
        if not req.literal_factors:
            return head + [qk * log_trig("sin", inner, wp), -qk1 * log_trig("sin", outer, wp)]
        return head + [
            -qk1 * log_trig("cos", outer, wp),
            qk * log_trig("cos", inner, wp),
            -qk1 * log_trig("tan", outer, wp),
            qk * log_trig("tan", inner, wp),
        ]

    if f is Formula.EXP_TOWER_FINITE:
        a_k = Fraction(1, q**k)
        a_k1 = Fraction(1, q ** (k + 1))
        w_k = z * q**k
        w_k1 = z * q ** (k + 1)
        tail = "csc" if req.csc_tail else "cot"
        return [
            _scale(a_k1 * (k * (1 - q) + 1), ln_q, wp),
            _log_z(z, wp, flags, -(q - 1) * a_k1),
            _log_power(a_k, "cos", w_k, wp, flags),
            _log_power(a_k, "tan", w_k, wp, flags),
            _log_power(a_k1, tail, w_k1, wp, flags),
        ]

    if f is Formula.GAMMA_INF:
        from .gamma_product import gamma_log_addends

        return gamma_log_addends(z, q, k, wp)

    raise UnsupportedFormula(f"no term generator for {f}")


def laddered_log(build, prec):
    """Sum the addends from ``build(wp)``, widening precision on cancellation.

    ``build`` maps a working PrecisionCfg to a list of log addends. The sum is
    accepted once the working precision exceeds ``prec.bits`` plus the bits
    spanned by the largest addend. Returns ``(log, retries, exhausted)``.
    """
    bits = prec.bits + LADDER_START_GUARD
    cap = max(MAX_LADDER_BITS, bits)
    retries = 0
    while True:
        wp = prec.working(bits)
        parts = build(wp)
        ctx = wp.ctx
        total = ctx.fsum(parts) if parts else ctx.mpc(0)
        scale = max((abs(p) for p in parts), default=ctx.zero)
        lost = max(0, int(ctx.mag(scale))) if scale else 0
        if bits >= prec.bits + lost + LADDER_MARGIN:
            return total, retries, False
        if bits >= cap:
            return total, retries, True
        bits = min(cap, max(2 * prec.bits, 2 * bits) if retries else 2 * prec.bits)
        retries += 1


def _check_index(req, k):
    if req.formula.finite:
        if not req.m <= k < req.n:
            raise IndexOutOfRange(f"k={k} outside [{req.m}, {req.n})")
    elif k < 0:
        raise IndexOutOfRange(f"k={k} must be >= 0")
    elif req.formula is Formula.EXP_TOWER_INF and req.q ** (k + 1) > 2**MAX_TOWER_EXPONENT_BITS:
        raise RangeCapExceeded(f"q^(k+1) = {req.q}^{k + 1} exceeds 2^{MAX_TOWER_EXPONENT_BITS}")


def _value_of(L, prec, flags):
    ctx = prec.ctx
    if abs(L.real) > RANGE_LIMIT:
        flags.add(Flag.RANGE_ESCAPE)
        return None
    return ctx.exp(L)


def term(req, k):
    """The k-th factor of ``req.formula`` as a :class:`TermValue`."""
    _check_index(req, k)
    prec = req.prec
    ctx = prec.ctx
    flags = set()
    if is_zero(req.z) and req.formula in (Formula.RATIO_INF, Formula.EXP_TOWER_INF):
        # 0/0 and 0*inf factors: take the z -> 0 limit, which is 1
        return TermValue(ctx.mpc(0), ctx.mpc(1), k, frozenset({Flag.RANGE_ESCAPE}))
    try:
        raw, retries, exhausted = laddered_log(lambda wp: _addends(req, k, wp, flags), prec)
    except PoleProximity as exc:
        raise exc.at_index(k) from None
    if retries:
        flags.add(Flag.PRECISION_RETRY)
    if exhausted:
        flags.add(Flag.PRECISION_LIMIT)
    log_value, winding = reduce_log(raw, prec)
    hint = _value_of(log_value, prec, flags)
    return TermValue(log_value, hint, k, frozenset(flags), winding, retries)


def accumulate(req, terms):
    """Combine TermValues into an EvalResult (no remainder estimate)."""
    prec = req.prec
    acc = PrecisionCfg(prec.bits + LADDER_START_GUARD).ctx
    total = acc.mpc(0)
    flags = set()
    winding = retries = used = 0
    for t in terms:
        total += t.log_value
        flags |= t.flags
        winding += t.winding
        retries += t.retries
        used += 1
    log_value = prec.ctx.convert(total)
    value = _value_of(log_value, prec, flags)
    if value is None:
        value = prec.ctx.exp(log_value)
    return EvalResult(value, log_value, used, None, frozenset(flags), winding, retries, prec.bits)


def partial_product(req):
    """Product of ``term(req, k)`` over the request's index range."""
    ctx = req.prec.ctx
    if req.formula is Formula.GAMMA_INF:
        from .gamma_product import gamma_partial

        return gamma_partial(req.z, req.q, req.N, req.prec)
    if not req.formula.finite and is_zero(req.z):
        return EvalResult(ctx.mpc(1), ctx.mpc(0), 0, 0.0, frozenset({Flag.RANGE_ESCAPE}), bits=req.prec.bits)
    res = accumulate(req, (term(req, k) for k in req.indices))
    if req.formula.finite:
        est = 0.0
    else:
        from .convergence import remainder_model

        est = remainder_model(req.formula, req.z, req.q, req.N)
    return _with_remainder(res, est)


def _with_remainder(res, est):
    return EvalResult(res.value, res.log_value, res.terms_used, est, res.flags, res.winding, res.retries, res.bits)


def finite_rhs_log(req):
    """Closed-form right-hand side of a finite identity, in log space.

    Returns an EvalResult whose ``terms_used`` is 0.
    """
    f, q, m, n = req.formula, req.q, req.m, req.n
    prec = req.prec
    flags = set()

    def build(wp):
        ctx = wp.ctx
        z = ctx.convert(req.z)
        ln_q = ctx.log(q)
        if f is Formula.TELESCOPE_FINITE:
            return [(n - m) * ln_q, log_trig("sin", z * q**m, wp), -log_trig("sin", z * q**n, wp)]
        if f is Formula.MORRIE_CLASSIC:
            return [log_trig("sin", z * 2**n, wp), -log_trig("sin", z * 2**m, wp), -(n - m) * ln_q]
        if f is Formula.EXP_TOWER_FINITE:
            a_m, a_n = Fraction(1, q**m), Fraction(1, q**n)
            w_m, w_n = z * q**m, z * q**n
            return [
                _scale(n * a_n - m * a_m, ln_q, wp),
                _log_z(z, wp, flags, a_n - a_m),
                _log_power(a_m, "cos", w_m, wp, flags),
                _log_power(a_m, "tan", w_m, wp, flags),
                _log_power(-a_n, "cos", w_n, wp, flags),
                _log_power(a_n, "cot", w_n, wp, flags),
            ]
        raise UnsupportedFormula(f"{f.name} has no finite closed form")

    raw, retries, exhausted = laddered_log(build, prec)
    if retries:
        flags.add(Flag.PRECISION_RETRY)
    if exhausted:
        flags.add(Flag.PRECISION_LIMIT)
    log_value, winding = reduce_log(raw, prec)
    value = prec.ctx.exp(log_value)
    return EvalResult(value, log_value, 0, 0.0, frozenset(flags), winding, retries, prec.bits)


def finite_rhs(req):
    """Closed-form right-hand side for TELESCOPE_FINITE, EXP_TOWER_FINITE
    (and MORRIE_CLASSIC), evaluated as printed."""
    return finite_rhs_log(req).value


def oracle_partial(req):
    """Telescoped closed form of the partial product, without iterating terms.

    Direct trig evaluation, no logarithms, so it stays independent of the
    log-space path in :func:`partial_product`.
    """
    f, q = req.formula, req.q
    prec = req.prec
    ctx = prec.ctx
    z = req.z

    def guarded_sin(w, ctx_):
        s = ctx_.sin(w)
        if sin_vanishes(w, s, prec):
            raise PoleProximity("csc", w)
        return s

    if f is Formula.TELESCOPE_FINITE:
        m, n = req.m, req.n
        return ctx.mpf(q) ** (n - m) * ctx.sin(z * q**m) / guarded_sin(z * q**n, ctx)
    if f is Formula.MORRIE_CLASSIC:
        m, n = req.m, req.n
        return ctx.sin(z * 2**n) / (ctx.mpf(2) ** (n - m) * guarded_sin(z * 2**m, ctx))
    if f not in (Formula.VIETE, Formula.RATIO_INF, Formula.COSINE_SUM_INF, Formula.EXP_TOWER_INF):
        raise UnsupportedFormula(f"no bundled oracle for {f.name}")

    N = req.N
    if is_zero(z):
        return ctx.mpc(1)
    if f is Formula.EXP_TOWER_INF:
        # (w/sin w)^(q^N) is 1 + O(q^-N); its deviation needs q^N extra room
        qN = q**N
        wctx = PrecisionCfg(prec.bits + qN.bit_length() + 16).ctx
        zz = wctx.convert(z)
        w = zz / wctx.mpf(q) ** N
        ratio = w / guarded_sin(w, wctx)
        sinc = wctx.sin(zz) / zz
        return ctx.convert(sinc * ratio**qN)
    b = {Formula.VIETE: 2, Formula.RATIO_INF: q, Formula.COSINE_SUM_INF: 2 * q}[f]
    bN = ctx.mpf(b) ** N
    return ctx.sin(z) / (bN * guarded_sin(z / bN, ctx))
