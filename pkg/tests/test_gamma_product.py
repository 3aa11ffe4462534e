import pytest

from trigprod.errors import PoleProximity
from trigprod.gamma_product import (
    certification_tolerance,
    gamma_inner,
    gamma_partial,
    gauss_reduced,
)
from trigprod.numerics import PrecisionCfg
from trigprod.product_core import Formula, ProductRequest, partial_product

P = PrecisionCfg(113)


@pytest.mark.parametrize("q", [2, 3, 4, 5])
@pytest.mark.parametrize("z", ["1", "-2,-2", "0.3,1.7"])
@pytest.mark.parametrize("k", [0, 2])
def test_inner_product_is_sinc_of_scaled_argument(q, z, k):
    b = gamma_inner(z, q, k, P)
    assert len(b.inner_factors) == q
    g = gauss_reduced(z, q, k, P)
    assert abs(b.product / g - 1) < 1e-30
    prod = P.ctx.mpc(1)
    for f in b.inner_factors:
        prod *= f
    assert abs(prod / b.product - 1) < 1e-30


def test_frozen_partial_at_half_pi():
    # product of sinc(pi/2^(k+1)) for k = 0..11, not 2/pi
    res = gamma_partial(P.ctx.pi / 2, 2, 12, P)
    assert abs(res.value - P.ctx.mpf("0.55377129398710990482448061068908")) < 1e-30
    assert abs(res.value - 2 / P.ctx.pi) > 0.05
    assert res.est_remainder is None


def test_terms_differ_from_ratio_terms():
    b = gamma_inner("1", 2, 0, P)
    assert abs(b.product / b.matched_ratio_term - 1) > certification_tolerance(P)


def test_zero_argument():
    res = partial_product(ProductRequest(Formula.GAMMA_INF, 0, q=3, N=4, prec=P))
    assert res.value == 1
    assert res.est_remainder == 0


def test_pole_detail_names_inner_index():
    with pytest.raises(PoleProximity) as info:
        gamma_inner(P.ctx.pi * 6, 2, 0, P)
    assert "k1=2" in str(info.value)
    assert info.value.k == 0


def test_certification_tolerance_scales_with_precision():
    assert certification_tolerance(PrecisionCfg(100)) == pytest.approx(1e-30)
    assert certification_tolerance(PrecisionCfg(256)) < certification_tolerance(P)
