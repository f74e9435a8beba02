import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adspricing.demand import (
    behavior_utilities,
    demand_profile,
    indifference_points,
    profit,
    profit_grid,
    restricted_demand_profit,
)
from adspricing.errors import ConstraintViolation, RestrictedPricing, StrategyMismatch
from adspricing.model import PRICE_FIELDS, PriceDecision, Strategy, validate_params

UP_EQ = PriceDecision.of("UP", p_v=2.0, p_h=1.35, p_s=0.0)
BS_EQ = PriceDecision.of("BS", p_b=2.0, r_s=0.644)


def test_up_utilities_at_reference(base):
    u = behavior_utilities("UP", base, UP_EQ, 0.8)
    assert u["PPH"] == pytest.approx(0.8 * 2 * 2.3 - 3.35)
    assert u["NNN"] == pytest.approx(0.0)


def test_up_indifference_points(base):
    t = indifference_points("UP", base, UP_EQ)
    assert t.raw["theta12"] == pytest.approx(0.5)
    assert t.raw["theta23"] == pytest.approx(0.90385, abs=1e-5)
    assert t.raw["theta13"] == pytest.approx(0.72826, abs=1e-5)


def test_up_demand_and_profit(base):
    d = demand_profile("UP", base, UP_EQ)
    assert d.progressive["PPH"] == pytest.approx(0.27174, abs=1e-5)
    assert d.progressive["PDP"] == 0.0
    assert profit("UP", base, UP_EQ) == pytest.approx(2.33967, abs=1e-5)


def test_bs_demand_and_profit(base):
    d = demand_profile("BS", base, BS_EQ)
    assert d.conservative["NS"] == pytest.approx(0.22062, abs=1e-5)
    assert profit("BS", base, BS_EQ) == pytest.approx(0.39878 + 1.8, abs=1e-5)


def test_strategy_tag_checked(base):
    with pytest.raises(StrategyMismatch):
        profit("BP", base, UP_EQ)


@pytest.mark.parametrize("strategy", list(Strategy))
def test_car_price_above_two_v_is_restricted(base, strategy):
    prices = dict.fromkeys(PRICE_FIELDS[strategy], 0.5)
    prices["p_v" if "p_v" in prices else "p_b"] = 2.5
    with pytest.raises(RestrictedPricing):
        demand_profile(strategy, base, PriceDecision(strategy, prices))


params_st = st.builds(
    lambda q, a, t, u: validate_params(q, 3.5 - (2.5 - t) * u, a, c_h=t),
    st.floats(1.01, 5.0),
    st.floats(0.05, 0.95),
    st.floats(0.0, 0.5),
    st.floats(0.0, 0.99),
)
price_st = st.floats(0.0, 8.0)


@settings(max_examples=200, deadline=None)
@given(params_st, st.sampled_from(list(Strategy)), price_st, price_st, st.floats(0.0, 2.0))
def test_masses_conserve(p, strategy, x, y, car):
    names = PRICE_FIELDS[strategy]
    prices = dict(zip(names, [car, x, y]))
    d = demand_profile(strategy, p, PriceDecision(strategy, prices))
    assert sum(d.progressive.values()) == pytest.approx(1.0, abs=1e-12)
    assert sum(d.conservative.values()) == pytest.approx(1.0, abs=1e-12)
    assert all(m >= -1e-15 for m in d.behavior_mass.values())


@settings(max_examples=200, deadline=None)
@given(params_st, st.sampled_from(list(Strategy)), price_st, price_st, st.floats(0.0, 1.0), st.integers(1, 2))
def test_raising_an_ads_price_never_raises_ads_demand(p, strategy, x, y, bump, which):
    names = PRICE_FIELDS[strategy]
    prices = dict(zip(names, [2.0, x, y]))
    raised = dict(prices)
    raised[names[min(which, len(names) - 1)]] += bump
    before = demand_profile(strategy, p, PriceDecision(strategy, prices))
    after = demand_profile(strategy, p, PriceDecision(strategy, raised))
    for field in ("software_stage1", "software_stage2", "software_perpetual", "ssh_units"):
        assert getattr(after, field) <= getattr(before, field) + 1e-12


@settings(max_examples=100, deadline=None)
@given(params_st, st.sampled_from(list(Strategy)))
def test_utility_slopes_ordered(p, strategy):
    prices = PriceDecision(strategy, dict.fromkeys(PRICE_FIELDS[strategy], 1.0))
    u0 = behavior_utilities(strategy, p, prices, 0.0)
    u1 = behavior_utilities(strategy, p, prices, 1.0)
    slopes = [u1[k] - u0[k] for k in list(u0)[:3]]
    assert slopes[0] > slopes[1] > slopes[2]


def test_profit_grid_matches_scalar(base):
    grid = profit_grid("BP", base, p_b=2.0, p_s=np.array([0.5, 1.0, 1.5]))
    scalar = [profit("BP", base, PriceDecision.of("BP", p_b=2.0, p_s=x)) for x in (0.5, 1.0, 1.5)]
    np.testing.assert_allclose(grid, scalar, rtol=0, atol=1e-15)


def test_restricted_market_prohibitive_price(base):
    d, pi = restricted_demand_profit(base, 10.0, 0.0)
    assert pi == 0.0
    assert d.vehicle_units == 0.0


@pytest.mark.parametrize("mode", ["perpetual", "subscription"])
def test_restricted_market_near_boundary(base, mode):
    # at p_b -> 2v the NN class stops buying, so profit drops by their margin
    s = 1.0
    d, pi = restricted_demand_profit(base, 2.0 + 1e-12, s, mode)
    strategy = "BP" if mode == "perpetual" else "BS"
    field = "p_s" if mode == "perpetual" else "r_s"
    full = demand_profile(strategy, base, PriceDecision(strategy, {"p_b": 2.0, field: s}))
    full_pi = profit(strategy, base, PriceDecision(strategy, {"p_b": 2.0, field: s}))
    nn_margin = (2.0 - base.c) * (full.progressive["NN"] + 1.0)
    # the reentry class buys software under bundling but not here
    reentry = list(full.conservative.values())[0] * s
    assert pi == pytest.approx(full_pi - nn_margin - reentry, abs=1e-9)


def test_restricted_market_requires_high_price(base):
    with pytest.raises(ConstraintViolation):
        restricted_demand_profit(base, 2.0, 0.5)
