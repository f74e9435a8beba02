import math

import numpy as np
import pytest

from adspricing.closed_form import optimal_profit
from adspricing.demand import demand_profile, profit
from adspricing.errors import BudgetExceeded, ConstraintViolation, NoSignChange
from adspricing.model import PRICE_FIELDS, PriceDecision, Strategy
from adspricing.oracle import (
    GridSpec,
    binomial_se,
    find_threshold,
    mc_demand,
    optimize_prices,
    optimize_restricted,
)


def test_up_grid_optimum(base):
    r = optimize_prices("UP", base)
    assert abs(r.best_profit - 2.33967) <= r.resolution_bound + 1e-5
    assert r.best_prices["p_h"] + r.best_prices["p_s"] == pytest.approx(1.35, abs=1e-3)
    assert r.best_profit == profit("UP", base, r.best_prices)


def test_us_grid_optimum_approaches_eps_limit(base):
    r = optimize_prices("US", base)
    assert r.best_profit <= 2.339673913043478 + 1e-12
    assert r.best_profit >= 2.339673913043478 - r.resolution_bound


def test_bp_software_price_is_active(base):
    pinned = optimize_prices("BP", base, constraints={"p_s": 0.0})
    assert pinned.best_profit < 2.28710
    assert pinned.best_prices["p_s"] == 0.0


def test_oracle_is_deterministic(base):
    a = optimize_prices("BS", base, GridSpec(resolution=64))
    b = optimize_prices("BS", base, GridSpec(resolution=64))
    assert a == b


def test_narrow_bounds_are_widened(base):
    r = optimize_prices("UP", base, GridSpec(bounds={"p_h": (0.0, 0.5)}))
    assert r.best_profit == pytest.approx(optimal_profit("UP", base), abs=r.resolution_bound)


def test_budget_cap(base):
    with pytest.raises(BudgetExceeded):
        optimize_prices("UP", base, GridSpec(resolution=2048, max_cells=2**20))


@pytest.mark.parametrize(
    "kwargs",
    [{"resolution": 8}, {"refinement_shrink": 1.0}, {"refinement_shrink": 0.0}, {"bounds": {"p_h": (1.0, 1.0)}}],
)
def test_grid_spec_checks(kwargs):
    with pytest.raises(ConstraintViolation):
        GridSpec(**kwargs)


def test_unknown_constraint(base):
    with pytest.raises(ConstraintViolation):
        optimize_prices("BP", base, constraints={"r_s": 0.0})


def test_restricted_market_below_full_market(base):
    r = optimize_restricted(base)
    assert r.best_profit + r.resolution_bound < 2.28710
    assert r.bundle_price > 2.0


def test_mc_matches_up_mass(base):
    prices = PriceDecision.of("UP", p_v=2, p_h=1.35, p_s=0)
    mc = mc_demand("UP", base, prices, n=10**6, seed=7)
    se = mc.se["progressive:PPH"]
    assert se == pytest.approx(0.000445, abs=2e-6)
    assert abs(mc.profile.progressive["PPH"] - 0.27174) <= 4 * se


def test_mc_matches_bs_stage_two(base):
    prices = PriceDecision.of("BS", p_b=2, r_s=0.644)
    mc = mc_demand("BS", base, prices, n=10**6, seed=3)
    analytic = demand_profile("BS", base, prices).software_stage2
    assert abs(mc.profile.software_stage2 - analytic) <= 4 * mc.se["software_stage2"]


@pytest.mark.parametrize("strategy", list(Strategy))
def test_mc_prohibitive_prices(base, strategy):
    big = {"p_v": 2.0, "p_b": 2.0, "p_h": 50.0, "p_s": 50.0, "r_s": 50.0}
    prices = PriceDecision(strategy, {k: big[k] for k in PRICE_FIELDS[strategy]})
    mc = mc_demand(strategy, base, prices, n=10**4, seed=1)
    assert mc.profile.software_stage1 == 0.0
    assert mc.profile.software_stage2 == 0.0
    if not strategy.bundled:
        assert mc.profile.ssh_units == 0.0


def test_mc_is_deterministic(base):
    prices = PriceDecision.of("BP", p_b=2, p_s=1.0)
    assert mc_demand("BP", base, prices, 10**4, 5) == mc_demand("BP", base, prices, 10**4, 5)
    assert mc_demand("BP", base, prices, 10**4, 5) != mc_demand("BP", base, prices, 10**4, 6)


def test_binomial_se_halves_variance_with_double_n():
    f = np.array([0.1, 0.27, 0.5])
    np.testing.assert_allclose(binomial_se(f, 2000) * math.sqrt(2), binomial_se(f, 1000), rtol=1e-15)


def test_bp_bs_switch(base):
    p = base.with_(alpha=0.9)
    est = find_threshold(("BP", "BS"), p, "q", (3.0, 4.0))
    lo, hi = est.bracket
    assert 3 < lo < est.value < hi < 4
    assert hi - lo <= est.tol
    assert (est.sign_lo, est.sign_hi) == (1, -1)
    assert optimal_profit("BP", p.with_(q=3)) - optimal_profit("BS", p.with_(q=3)) == pytest.approx(
        3.06609 - 3.06453, abs=1e-4
    )
    other = find_threshold(("BP", "BS"), p, "q", (2.5, 3.5))
    assert abs(other.value - est.value) <= est.tol


def test_up_bp_switch(base):
    est = find_threshold(("UP", "BP"), base.with_(alpha=0.9), "q", (1.2, 3.0))
    assert 1.2 < est.value < 3.0


def test_no_sign_change_names_winner(base):
    with pytest.raises(NoSignChange) as info:
        find_threshold(("UP", "US"), base.with_(alpha=0.1), "q", (1.01, 5.0))
    assert info.value.winner is Strategy.UP


def test_threshold_input_checks(base):
    with pytest.raises(ConstraintViolation):
        find_threshold(("UP", "BP"), base, "v", (1.0, 2.0))
    with pytest.raises(ConstraintViolation):
        find_threshold(("UP", "BP"), base, "q", (3.0, 2.0))
