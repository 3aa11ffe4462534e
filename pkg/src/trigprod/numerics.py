"""Precision-parameterized complex arithmetic and special functions.

Values are plain :mod:`mpmath` numbers. Each precision gets its own
``MPContext`` (see :func:`context`), so nothing here touches the global
``mpmath.mp`` state and every function is safe to call concurrently.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from functools import lru_cache

import mpmath

from .errors import PoleProximity

DEFAULT_BITS = 113
MIN_BITS = 53
MAX_LADDER_BITS = 1024
PI_GUARD_BITS = 32

TRIG_FUNCTIONS = ("sin", "cos", "tan", "cot", "csc")


@lru_cache(maxsize=None)
def context(bits):
    """Return the (cached) mpmath context working at ``bits`` of mantissa."""
    ctx = mpmath.MPContext()
    ctx.prec = bits
    return ctx


@dataclass(frozen=True)
class PrecisionCfg:
    """Binary mantissa precision used for one evaluation."""

    bits: int = DEFAULT_BITS
    # set when a widened working precision must keep the caller's guard
    guard_bits: int | None = None

    def __post_init__(self):
        if int(self.bits) != self.bits or self.bits < MIN_BITS:
            raise ValueError(f"precision must be an integer >= {MIN_BITS} bits, got {self.bits}")

    @property
    def ctx(self):
        return context(self.bits)

    @property
    def guard(self):
        """Pole guard threshold 2^(-P/2)."""
        half = self.guard_bits if self.guard_bits is not None else self.bits // 2
        return self.ctx.ldexp(1, -half)

    @property
    def floor(self):
        """Smallest residual considered meaningful, 2^(-P+24)."""
        return self.ctx.ldexp(1, -self.bits + 24)

    def working(self, bits):
        """A wider working precision that keeps this precision's pole guard."""
        half = self.guard_bits if self.guard_bits is not None else self.bits // 2
        return PrecisionCfg(bits, guard_bits=half)


def default_precision():
    """Precision from ``TRIGPROD_PRECISION_BITS`` or the 113-bit default."""
    raw = os.environ.get("TRIGPROD_PRECISION_BITS")
    if not raw:
        return PrecisionCfg(DEFAULT_BITS)
    try:
        return PrecisionCfg(int(raw))
    except ValueError as exc:
        raise ValueError(f"invalid TRIGPROD_PRECISION_BITS={raw!r}") from exc


def to_complex(x, prec):
    """Convert ``x`` to an mpc at ``prec``.

    Accepts numbers (including mpmath values from any context), ``(re, im)``
    pairs and strings of the form ``"re"`` or ``"re,im"``.
    """
    ctx = prec.ctx
    if isinstance(x, str):
        parts = [p.strip() for p in x.split(",")]
        if len(parts) not in (1, 2) or not all(parts):
            raise ValueError(f"complex value must be 're' or 're,im', got {x!r}")
        re = ctx.mpf(parts[0])
        im = ctx.mpf(parts[1]) if len(parts) == 2 else ctx.zero
        w = ctx.mpc(re, im)
    elif isinstance(x, tuple):
        re, im = x
        w = ctx.mpc(ctx.convert(re), ctx.convert(im))
    else:
        w = ctx.mpc(ctx.convert(x))
    if not (ctx.isfinite(w.real) and ctx.isfinite(w.imag)):
        raise ValueError(f"non-finite complex value {x!r}")
    return w


def is_zero(w):
    return w.real == 0 and w.imag == 0


def pole_distance(fn, w, prec=None):
    """Distance from ``w`` to the nearest pole of ``fn``.

    ``fn`` is one of the trig names or ``"gamma"`` (poles at 0, -1, -2, ...).
    ``sin`` and ``cos`` are entire and return +inf.
    """
    prec = prec or PrecisionCfg()
    ctx = context(prec.bits + PI_GUARD_BITS)
    w = ctx.convert(w)
    if fn in ("sin", "cos"):
        return prec.ctx.inf
    if fn in ("csc", "cot"):
        k = ctx.nint(w.real / ctx.pi)
        d = abs(w - k * ctx.pi)
    elif fn == "tan":
        k = ctx.floor(w.real / ctx.pi)
        d = abs(w - (k + ctx.mpf(0.5)) * ctx.pi)
    elif fn == "gamma":
        k = min(ctx.zero, ctx.nint(w.real))
        d = abs(w - k)
    else:
        raise ValueError(f"unknown function {fn!r}")
    return prec.ctx.convert(d)


def sin_vanishes(w, s, prec):
    """True when sin(w) = ``s`` is too close to zero to divide by or take a log of.

    Near k*pi with k != 0 the computed sine carries absolute error of order
    2^-P |k pi|, so values below the guard are rejected. At the origin
    sin(w) ~ w keeps full relative accuracy and only w = 0 itself fails.
    """
    if abs(s) >= prec.guard:
        return False
    if is_zero(w):
        return True
    ctx = context(prec.bits + PI_GUARD_BITS)
    return ctx.nint(ctx.convert(w.real) / ctx.pi) != 0


def _check_fn(fn):
    if fn not in TRIG_FUNCTIONS:
        raise ValueError(f"unknown trig function {fn!r}; expected one of {TRIG_FUNCTIONS}")


def c_trig(fn, w, prec):
    """Evaluate sin, cos, tan, cot or csc at complex ``w``.

    Raises PoleProximity when the denominator of tan/cot/csc has modulus
    below the guard threshold (see :func:`sin_vanishes` for the origin).
    """
    _check_fn(fn)
    ctx = prec.ctx
    w = to_complex(w, prec)
    if fn == "sin":
        return ctx.sin(w)
    if fn == "cos":
        return ctx.cos(w)
    if fn == "tan":
        if abs(ctx.cos(w)) < prec.guard:
            raise PoleProximity(fn, w)
        return ctx.tan(w)
    if sin_vanishes(w, ctx.sin(w), prec):
        raise PoleProximity(fn, w)
    return ctx.cot(w) if fn == "cot" else ctx.csc(w)


def log_trig(fn, w, prec):
    """Principal-branch logarithm of ``c_trig(fn, w)``.

    Zeros are guarded as well as poles, since the logarithm is undefined
    at both.
    """
    _check_fn(fn)
    ctx = prec.ctx
    w = to_complex(w, prec)
    need_sin = fn in ("sin", "tan", "cot", "csc")
    need_cos = fn in ("cos", "tan", "cot")
    s = ctx.sin(w) if need_sin else None
    c = ctx.cos(w) if need_cos else None
    if s is not None and sin_vanishes(w, s, prec):
        raise PoleProximity(fn, w, detail="sin(w) ~ 0")
    if c is not None and abs(c) < prec.guard:
        raise PoleProximity(fn, w, detail="cos(w) ~ 0")
    if fn == "sin":
        return ctx.log(s)
    if fn == "cos":
        return ctx.log(c)
    if fn == "tan":
        return ctx.log(s / c)
    if fn == "cot":
        return ctx.log(c / s)
    return ctx.log(1 / s)


def log_sin(w, prec):
    """Principal-branch log of sin(w), imaginary part in (-pi, pi]."""
    return log_trig("sin", w, prec)


def sinc_ref(z, prec):
    """sin(z)/z with the removable singularity filled.

    Below |z| < 2^(-P/4) the three-term series is used; its truncation
    error is below 2^(-3P/2).
    """
    ctx = prec.ctx
    z = to_complex(z, prec)
    if is_zero(z):
        return ctx.mpc(1)
    if abs(z) < ctx.ldexp(1, -(prec.bits // 4)):
        z2 = z * z
        return 1 - z2 / 6 + z2 * z2 / 120
    return ctx.sin(z) / z


def reduce_log(L, prec):
    """Split ``L`` into a principal log and a winding count.

    Returns ``(r, n)`` with ``L = r + 2*pi*i*n`` and ``Im(r)`` in (-pi, pi].
    """
    ctx = prec.ctx
    # L may carry more bits than prec; reduce before rounding down
    extra = PI_GUARD_BITS + (max(0, int(ctx.mag(L.imag))) if L.imag else 0)
    wctx = context(prec.bits + extra)
    two_pi = 2 * wctx.pi
    im = wctx.convert(L.imag)
    n = int(wctx.nint(im / two_pi))
    rest = im - n * two_pi
    if rest <= -wctx.pi:
        n -= 1
        rest += two_pi
    elif rest > wctx.pi:
        n += 1
        rest -= two_pi
    return ctx.mpc(L.real, ctx.convert(rest)), n


# -- log-gamma ---------------------------------------------------------------

_GAMMA_GUARD_BITS = 16


def log_gamma(w, prec):
    """Principal-branch log-gamma (branch cut on the negative real axis).

    Stirling series after an upward shift for Re(w) > 0; reflection for
    Re(w) <= 0. Matches ``mpmath.loggamma`` conventions, including the
    imaginary part on the cut (e.g. log-gamma(-2.5) has Im = -3 pi).
    """
    w = to_complex(w, prec)
    if pole_distance("gamma", w, prec) < prec.guard:
        raise PoleProximity("gamma", w)
    wctx = context(prec.bits + _GAMMA_GUARD_BITS)
    w = wctx.convert(w)
    if w.real > 0:
        out = _loggamma_right(w, wctx)
    else:
        out = _loggamma_reflect(w, wctx)
    return prec.ctx.convert(out)


def _loggamma_reflect(w, ctx):
    log_pi = ctx.log(ctx.pi)
    if w.imag == 0:
        x = w.real
        re = log_pi - ctx.log(abs(ctx.sinpi(x))) - _loggamma_right(ctx.mpc(1 - x), ctx).real
        im = -ctx.pi * int(ctx.ceil(-x))
        return ctx.mpc(re, im)
    if w.imag < 0:
        return ctx.conj(_loggamma_reflect(ctx.conj(w), ctx))
    # analytic log of sin(pi w) on the upper half plane
    e = ctx.exp(2j * ctx.pi * w)
    log_sin_pi = -1j * ctx.pi * w + ctx.log(1 - e) - ctx.ln2 + 0.5j * ctx.pi
    return log_pi - _loggamma_right(1 - w, ctx) - log_sin_pi


def _shift_log(w, r, ctx):
    """Sum of principal logs of w, w+1, ..., w+r-1 for Re(w) > 0."""
    if r == 0:
        return ctx.mpc(0)
    prod = ctx.mpc(1)
    arg_sum = 0.0
    for j in range(r):
        v = w + j
        prod *= v
        arg_sum += math.atan2(float(v.imag), float(v.real))
    L = ctx.log(prod)
    # each arg lies in (-pi/2, pi/2); the float sum pins down the branch
    n = round((arg_sum - float(L.imag)) / (2 * math.pi))
    return L + 2j * ctx.pi * n


def _loggamma_right(w, ctx):
    bits = ctx.prec
    R = 0.12 * bits + 3
    r = max(0, math.ceil(R - float(w.real)))
    v = w + r
    out = (v - 0.5) * ctx.log(v) - v + 0.5 * ctx.log(2 * ctx.pi)
    eps = ctx.ldexp(1, -bits - 4)
    v2 = v * v
    vpow = v
    prev = ctx.inf
    for j in range(1, 4 * bits):
        t = ctx.bernoulli(2 * j) / (2 * j * (2 * j - 1) * vpow)
        at = abs(t)
        if at > prev:
            break
        out += t
        if at < eps * max(1, abs(out)):
            break
        prev = at
        vpow *= v2
    return out - _shift_log(w, r, ctx)
