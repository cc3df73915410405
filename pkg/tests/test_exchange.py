from fractions import Fraction

import mpmath
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from eco.curves import AllocativeParams, LinearBondingCurve
from eco.errors import BurnExceedsSupply, DomainError, NegativeSupply, ZeroPayment
from eco.exchange import (
    Exactness,
    allocative_curve,
    burn_reward_exact,
    burn_reward_lower,
    mint_cost_exact,
    mint_tokens_exact,
    mint_tokens_lower,
    quote_burn,
    quote_burn_lower,
    quote_by_quadrature,
    quote_mint,
    quote_mint_lower,
    theta_eff,
)
from eco.numeric import ONE_RAW, ULP, Dec

mpmath.mp.dps = 50
K1 = Dec.of(1)
HALF = AllocativeParams(Dec.of(2), Dec.parse("0.5"))

decs = lambda lo, hi: st.integers(int(lo * 10**18), int(hi * 10**18)).map(Dec)  # noqa: E731


def mp_area(k: Dec, params: AllocativeParams, s: Dec, x: Dec):
    """Oracle: tanh-sinh quadrature of q at 50 digits, in raw money units."""
    kf, tau, a = (mpmath.mpf(v.raw) / ONE_RAW for v in (k, params.tau, params.a))
    w = 1 - tau + tau * a

    def q(z):
        p = kf * z
        return w * p / (1 + tau * p)

    lo, hi = mpmath.mpf(s.raw) / ONE_RAW, mpmath.mpf((s + x).raw) / ONE_RAW
    return mpmath.quad(q, [lo, hi]) * ONE_RAW


def test_mint_cost_anchors():
    # 3 - 6 ln 1.5 and 6 - 6 ln 2 at 50 digits
    assert mint_cost_exact(K1, HALF, Dec.of(0), Dec.of(1)) == Dec.parse("0.567209351351013709")
    assert mint_cost_exact(K1, HALF, Dec.of(0), Dec.of(2)) == Dec.parse("1.841116916640328144")
    assert mint_cost_exact(K1, HALF, Dec.of(3), Dec.of(0)) == Dec.of(0)


def test_burn_anchors():
    assert burn_reward_exact(K1, HALF, Dec.of(1), Dec.of(-1)) == Dec.parse("-0.567209351351013708")
    assert burn_reward_lower(K1, HALF, Dec.of(1), Dec.of(-1)) == Dec.parse("0.5")
    assert burn_reward_lower(K1, HALF, Dec.of(4), Dec.of(-1)) == Dec.parse("1.833333333333333333")
    assert burn_reward_exact(K1, HALF, Dec.of(4), Dec.of(-1)).raw < -1906070 * 10**12


def test_mint_lower_anchor():
    m = Dec.parse("0.567209557828")
    assert mint_tokens_lower(K1, HALF, Dec.of(0), m) == Dec.parse("0.614930650739306266")
    assert mint_tokens_exact(K1, HALF, Dec.of(0), m) > Dec.of(1)


def test_theta_eff():
    assert theta_eff(Dec.of(2), HALF) == Fraction(3)


@given(decs(0.01, 10), decs(0.01, 0.99), decs(0, 10), decs(0, 100), decs(0.000001, 100))
def test_mint_cost_matches_high_precision_quadrature(k, tau, a, s, x):
    params = AllocativeParams(a, tau)
    truth = mp_area(k, params, s, x)
    got = mint_cost_exact(k, params, s, x).raw
    assert truth <= got < truth + 1 + 1e-20 * truth


@given(decs(0.01, 10), decs(0.01, 0.99), decs(0, 10), decs(0.000001, 100), st.integers(1, 100))
def test_burn_reward_rounds_down(k, tau, a, s, pct):
    params = AllocativeParams(a, tau)
    x = -Dec(s.raw * pct // 100)
    assume(x.raw < 0)
    truth = -mp_area(k, params, s, x)
    got = -burn_reward_exact(k, params, s, x).raw
    assert truth - 1 - 1e-20 * truth < got <= truth


def test_unguarded_burn_bound_form_overshoots_but_ours_does_not():
    # s*y - y^2/max(2, D) with D = 51 exceeds the true reward here
    k, s, x = K1, Dec.of(100), Dec.of(-100)
    theta = theta_eff(k, HALF)
    d = 1 + Fraction(1, 2) * 100
    naive = theta / d * (100 * 100 - Fraction(100 * 100) / max(2, d))
    exact = -burn_reward_exact(k, HALF, s, x)
    assert naive > exact.to_fraction()
    assert burn_reward_lower(k, HALF, s, x) <= exact


@given(decs(0.01, 10), decs(0.01, 0.99), decs(0, 10), decs(0.000001, 1000), st.integers(1, 1000))
def test_burn_bound_is_sound(k, tau, a, s, permille):
    params = AllocativeParams(a, tau)
    x = -Dec(s.raw * permille // 1000)
    assume(x.raw < 0)
    assert burn_reward_lower(k, params, s, x) <= -burn_reward_exact(k, params, s, x)


@given(decs(0.01, 10), decs(0.01, 0.99), decs(0, 10), decs(0, 1000), decs(0.001, 1000))
def test_mint_bound_is_sound(k, tau, a, s, m):
    params = AllocativeParams(a, tau)
    assert mint_tokens_lower(k, params, s, m) <= mint_tokens_exact(k, params, s, m)


@given(decs(0.01, 10), decs(0.01, 0.99), decs(0, 10), decs(0, 1000), decs(0.001, 1000))
def test_mint_tokens_is_largest_affordable(k, tau, a, s, m):
    params = AllocativeParams(a, tau)
    x = mint_tokens_exact(k, params, s, m)
    assert mint_cost_exact(k, params, s, x) <= m
    assert mint_cost_exact(k, params, s, x + ULP) > m


def test_inverse_of_cost_is_exact():
    m = mint_cost_exact(K1, HALF, Dec.of(0), Dec.of(1))
    assert mint_tokens_exact(K1, HALF, Dec.of(0), m) == Dec.of(1)


@given(decs(0.01, 10), decs(0.01, 0.99), decs(0, 10), decs(0, 1000), decs(0.000001, 1000))
def test_round_trip_never_profits(k, tau, a, s, m):
    params = AllocativeParams(a, tau)
    x = mint_tokens_exact(k, params, s, m)
    assume(x.raw > 0)
    reward = -burn_reward_exact(k, params, s + x, -x)
    assert reward <= m


def test_dust_payment_quotes_nothing():
    params = AllocativeParams(Dec.of(2), Dec.parse("0.5"))
    q = quote_mint(K1, params, Dec.of(1000), ULP)
    assert (q.x, q.m, q.remainder) == (Dec.of(0), Dec.of(0), ULP)
    assert mint_tokens_exact(K1, params, Dec.of(1000), ULP) == Dec.of(0)


def test_quote_wrappers():
    q = quote_mint(K1, HALF, Dec.of(0), Dec.of(1))
    assert q.exactness is Exactness.EXACT
    assert q.m == Dec.of(1) and q.remainder.raw >= 0
    assert quote_mint_lower(K1, HALF, Dec.of(0), Dec.of(1)).exactness is Exactness.GUARANTEED_LOWER_BOUND
    assert quote_burn(K1, HALF, Dec.of(1), Dec.of(-1)).m == Dec.parse("-0.567209351351013708")
    assert quote_burn_lower(K1, HALF, Dec.of(1), Dec.of(-1)).m == Dec.parse("-0.5")


def test_quadrature_helper_agrees():
    curve = allocative_curve(K1, HALF)
    area = quote_by_quadrature(curve, Dec.of(0), Dec.of(1))
    assert abs(area - Dec.parse("0.567209351351013709")) < Dec.parse("0.000000000001")
    back = quote_by_quadrature(curve, Dec.of(1), Dec.of(-1))
    assert abs(back + Dec.parse("0.567209351351013709")) < Dec.parse("0.000000000001")
    assert quote_by_quadrature(LinearBondingCurve(K1), Dec.of(0), Dec.of(2)) == Dec.of(2)


def test_domain_errors():
    with pytest.raises(BurnExceedsSupply):
        burn_reward_exact(K1, HALF, Dec.of(1), Dec.of(-2))
    with pytest.raises(BurnExceedsSupply):
        burn_reward_lower(K1, HALF, Dec.of(1), Dec.of(-2))
    with pytest.raises(NegativeSupply):
        mint_cost_exact(K1, HALF, Dec.of(-1), Dec.of(1))
    with pytest.raises(DomainError):
        mint_cost_exact(K1, HALF, Dec.of(0), Dec.of(-1))
    with pytest.raises(DomainError):
        burn_reward_exact(K1, HALF, Dec.of(1), Dec.of(1))
    with pytest.raises(ZeroPayment):
        mint_tokens_exact(K1, HALF, Dec.of(0), Dec.of(0))


def test_full_burn_is_defined():
    # ln(1 + tau*k*x/(1 + tau*k*s)) stays finite when x = -s
    reward = -burn_reward_exact(K1, HALF, Dec.of(5), Dec.of(-5))
    assert reward == mint_cost_exact(K1, HALF, Dec.of(0), Dec.of(5)) - ULP
