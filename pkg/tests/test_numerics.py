import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trigprod.errors import PoleProximity
from trigprod.numerics import (
    PrecisionCfg,
    c_trig,
    default_precision,
    log_gamma,
    log_sin,
    pole_distance,
    reduce_log,
    sinc_ref,
    to_complex,
)

P = PrecisionCfg(113)
TOL = mpmath.mpf(2) ** -100


def close(a, b, tol=TOL):
    return abs(a - b) <= tol * max(1, abs(b))


def test_trivial_values():
    ctx = P.ctx
    assert c_trig("sin", ctx.mpc(0), P) == 0
    assert c_trig("cos", ctx.mpc(0), P) == 1
    assert close(c_trig("cos", ctx.pi / 3, P), ctx.mpf(1) / 2)
    assert sinc_ref(0, P) == 1
    assert close(sinc_ref(ctx.pi / 2, P), 2 / ctx.pi)


def test_complex_cos_matches_hyperbolic_form():
    ctx = PrecisionCfg(300).ctx
    expected = ctx.cos(1) * ctx.cosh(1) - 1j * ctx.sin(1) * ctx.sinh(1)
    got = c_trig("cos", P.ctx.mpc(1, 1), P)
    assert abs(got - expected) < TOL


def test_log_sin_matches_mpmath():
    w = P.ctx.mpc(1, 2)
    ref = PrecisionCfg(300).ctx.log(PrecisionCfg(300).ctx.sin(w))
    assert close(log_sin(w, P), ref)


def test_csc_times_sin_is_one():
    w = P.ctx.mpc("0.3", "-1.7")
    assert close(c_trig("csc", w, P) * c_trig("sin", w, P), 1)
    assert close(c_trig("cot", w, P) * c_trig("tan", w, P), 1)


@pytest.mark.parametrize("w", ["0.5", "0.25,-3", "-2.5", "-7.3,0.4", "12,9", "1e-10", "-0.5,-1e-30"])
def test_log_gamma_against_mpmath(w):
    z = to_complex(w, P)
    ref = PrecisionCfg(300).ctx.loggamma(z)
    assert abs(log_gamma(z, P) - ref) < mpmath.mpf(10) ** -30


def test_log_gamma_frozen_values():
    ctx = P.ctx
    got = log_gamma(ctx.mpc("0.25", "-3"), P)
    assert close(got, ctx.mpc("-4.06721940913741198556870836458", "0.0933843133931693830496931714445"), 1e-28)
    got = log_gamma(ctx.mpc("-2.5"), P)
    assert close(got, ctx.mpc("-0.0562437164976740506725945300977", "-9.42477796076937971538793014984"), 1e-28)


def test_log_gamma_recurrence():
    ctx = P.ctx
    w = ctx.mpc("1.3", "0.7")
    # log G(w+1) = log G(w) + log w up to a multiple of 2 pi i
    d = log_gamma(w + 1, P) - log_gamma(w, P) - ctx.log(w)
    n = ctx.nint(d.imag / (2 * ctx.pi))
    assert abs(d - 2j * ctx.pi * n) < TOL


def test_log_gamma_rejects_poles():
    for w in (0, -1, -4):
        with pytest.raises(PoleProximity):
            log_gamma(P.ctx.mpc(w), P)


finite = st.floats(min_value=-6, max_value=6, allow_nan=False)


@settings(max_examples=40, deadline=None)
@given(finite, finite)
def test_conjugate_symmetry(x, y):
    w = P.ctx.mpc(x, y)
    for fn in ("sin", "cos"):
        assert close(c_trig(fn, w.conjugate(), P), c_trig(fn, w, P).conjugate())
    s = P.ctx.sin(w)
    # off the branch cut of the principal log
    if abs(s) > 0.1 and not (s.imag == 0 and s.real < 0):
        assert close(log_sin(w.conjugate(), P), log_sin(w, P).conjugate())


@settings(max_examples=40, deadline=None)
@given(finite, finite)
def test_exp_log_sin_is_sin(x, y):
    w = P.ctx.mpc(x, y)
    if abs(P.ctx.sin(w)) < 1e-3:
        return
    assert close(P.ctx.exp(log_sin(w, P)), P.ctx.sin(w), 2.0**-95)


def test_precision_monotone():
    w = mpmath.mpc("0.9", "0.4")
    ref = PrecisionCfg(600).ctx.sin(w)
    errs = [abs(c_trig("sin", PrecisionCfg(b).ctx.convert(w), PrecisionCfg(b)) - ref) for b in (53, 113, 256)]
    assert errs[0] > errs[1] > errs[2]


def test_pole_distance():
    ctx = P.ctx
    assert pole_distance("sin", ctx.mpc(3)) == float("inf")
    assert abs(pole_distance("csc", ctx.mpc(3)) - (ctx.pi - 3)) < TOL
    assert abs(pole_distance("tan", ctx.mpc(1.5)) - (ctx.pi / 2 - 1.5)) < TOL
    assert abs(pole_distance("gamma", ctx.mpc(-2.25))) == pytest.approx(0.25)


def test_pole_guard_fires_near_multiples_of_pi():
    ctx = P.ctx
    with pytest.raises(PoleProximity):
        c_trig("csc", ctx.pi * 3, P)
    with pytest.raises(PoleProximity):
        log_sin(ctx.mpc(0), P)
    # tiny arguments near the origin keep full relative accuracy
    w = ctx.mpf(2) ** -80
    assert close(c_trig("csc", w, P) * w, 1)


def test_reduce_log_winding():
    ctx = P.ctx
    L = ctx.mpc(0.5, 7 * ctx.pi)
    principal, n = reduce_log(L, P)
    assert n == 3
    assert -ctx.pi < principal.imag <= ctx.pi


def test_to_complex_parsing():
    assert to_complex("1.5,-2", P) == P.ctx.mpc("1.5", "-2")
    assert to_complex((1, 2), P) == P.ctx.mpc(1, 2)
    assert to_complex(3, P) == 3
    for bad in ("nan", "inf,0", "1,2,3"):
        with pytest.raises(ValueError):
            to_complex(bad, P)


def test_default_precision_env(monkeypatch):
    monkeypatch.setenv("TRIGPROD_PRECISION_BITS", "200")
    assert default_precision().bits == 200
    monkeypatch.delenv("TRIGPROD_PRECISION_BITS")
    assert default_precision().bits == 113
