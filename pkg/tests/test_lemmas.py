import numpy as np
import pytest

from adspricing.lemmas import LEMMAS, lemma_checks
from adspricing.model import validate_params

Q = np.linspace(1.0, 5.0, 21)[1:]
A = np.linspace(0.05, 0.95, 10)


@pytest.fixture(scope="module")
def grid():
    return [validate_params(q, 1.3, a) for q in Q for a in A]


@pytest.mark.parametrize("name", ["no_adoption", "bp_price_monotone", "bs_price_order", "delay_share"])
def test_structural_checks_pass(grid, name):
    out = lemma_checks(grid, [name])[name]
    assert out.passed, out.counterexample


def test_software_with_ssh_small(grid):
    assert lemma_checks(grid[::17], ["software_with_ssh"])["software_with_ssh"].passed


def test_restricted_market_sample(grid):
    out = lemma_checks(grid, ["restricted_market"], restricted_samples=5, seed=3)["restricted_market"]
    assert out.passed and out.checked == 10


def test_no_adoption_region_is_exact():
    # c_h = v, gamma = 1.3: cutoff (c_h + 2v)/(v + v gamma) = 3/2.3
    qs = np.linspace(1.0, 2.0, 41)[1:]
    g = [validate_params(q, 1.3, a, c_h=1.0, strict_gamma=False) for q in qs for a in (0.2, 0.8)]
    out = lemma_checks(g, ["no_adoption"])["no_adoption"]
    assert out.passed and out.checked == 4 * len(qs)


def test_bp_flat_interval():
    g = [validate_params(q, 1.3, 0.4) for q in np.linspace(1.12, 1.17, 51)]
    assert lemma_checks(g, ["bp_price_monotone"])["bp_price_monotone"].passed


def test_absolute_delay_mass_rises_under_bs_at_low_q(grid):
    # below the BS price switch the low-price row lets more consumers delay as q grows
    out = lemma_checks(grid, ["delay_mass"])["delay_mass"]
    assert not out.passed
    assert out.counterexample["strategy"] == "BS"
    assert out.counterexample["params"]["q"] <= 1.5


def test_delay_mass_holds_for_us_and_bp(grid):
    from adspricing.closed_form import equilibrium

    for s in ("US", "BP"):
        for a in A:
            line = [equilibrium(s, validate_params(q, 1.3, a)).demand.delay_mass for q in Q]
            assert np.all(np.diff(line) <= 1e-12)


def test_unknown_lemma(grid):
    with pytest.raises(ValueError):
        lemma_checks(grid, ["nope"])


def test_report_shape(grid):
    report = lemma_checks(grid[:4], ["bs_price_order", "delay_share"])
    assert set(report.as_dict()) == {"bs_price_order", "delay_share"}
    assert report.passed
    assert set(LEMMAS) >= set(report.outcomes)
