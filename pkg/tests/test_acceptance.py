"""Acceptance criteria, one test each; every test records a PASS/FAIL line."""

import csv
import io
import json

import numpy as np
import pytest

from adspricing.analysis import oscillation_scan, rank_strategies, region_map, scan_points, second_wins_somewhere
from adspricing.cli import main
from adspricing.demand import demand_profile
from adspricing.closed_form import bp_thresholds, equilibrium, optimal_profit
from adspricing.lemmas import lemma_checks
from adspricing.model import Strategy, scale_params, validate_params
from adspricing.oracle import GridSpec, binomial_se, compare_with_oracle, find_threshold, first_wins, mc_demand, sample_params

UP, US, BP, BS = Strategy

GRID_Q = np.linspace(1.0, 5.0, 51)[1:]
GRID_ALPHA = np.linspace(0.05, 0.95, 50)


@pytest.fixture(scope="module")
def lemma_grid():
    return [validate_params(q, 1.3, a) for q in GRID_Q for a in GRID_ALPHA]


def test_closed_form_matches_oracle(verdict):
    rows = compare_with_oracle(sample_params(200, seed=2024), GridSpec(refinement_rounds=6))
    bad = [r.as_dict() for r in rows if not r.ok]
    worst = max(r.closed_form - r.oracle for r in rows)
    assert verdict("1 closed form vs grid oracle, 200 draws x 4", not bad, f"max excess {worst:.2e}"), bad[:3]


def test_reference_point_profits(verdict, base):
    expected = {UP: 2.33967, US: 2.33967, BP: 2.28710, BS: 2.19878}
    got = {s: optimal_profit(s, base) for s in Strategy}
    ok = all(abs(got[s] - expected[s]) <= 1e-5 for s in Strategy) and equilibrium(US, base).epsilon_limit
    assert verdict("2 reference profits at q=2, alpha=0.6, gamma=1.3", ok, str({s.value: round(x, 6) for s, x in got.items()}))


def _lemma(verdict, label, outcome, min_checked=1):
    ok = outcome.passed and outcome.checked >= min_checked
    return verdict(label, ok, f"{outcome.checked} checks") or pytest.fail(str(outcome.counterexample))


def test_lemma_software_with_ssh(verdict, lemma_grid):
    _lemma(verdict, "3 UP grid optimum unchanged with software price pinned to 0", lemma_checks(lemma_grid, ["software_with_ssh"])["software_with_ssh"], 2500)


def test_lemma_no_adoption(verdict):
    # at c_h = 0.1 the premise c_h >= v(gamma - 1) never holds on this grid, so use c_h = v
    grid = [validate_params(q, 1.3, a, c_h=1.0, strict_gamma=False) for q in GRID_Q for a in GRID_ALPHA]
    _lemma(verdict, "3 zero-adoption region exact (c_h = v)", lemma_checks(grid, ["no_adoption"])["no_adoption"], 5000)


def test_lemma_bp_price(verdict, lemma_grid):
    t = bp_thresholds(validate_params(1.15, 1.3, 0.4))
    line = [validate_params(q, 1.3, 0.4) for q in np.linspace(1.0, 1.3, 301)[1:]]
    flat = [q.q for q in line if equilibrium(BP, q).prices["p_s"] == pytest.approx(0.3, abs=1e-12)]
    ok_interval = abs(t["q1_BP"] - 1.13187) <= 1e-5 and abs(t["q2_BP"] - 1.15910) <= 1e-5
    ok_flat = bool(flat) and min(flat) > t["q1_BP"] and max(flat) <= t["q2_BP"]
    out = lemma_checks(lemma_grid + line, ["bp_price_monotone"])["bp_price_monotone"]
    verdict("3 BP software price monotone, flat on (1.13187, 1.15910] at alpha=0.4", out.passed and ok_interval and ok_flat)
    assert ok_interval and ok_flat
    _lemma(verdict, "3 BP software price monotone on the grid", out)


def test_lemma_bs_price_order(verdict, lemma_grid):
    _lemma(verdict, "3 BS subscription prices ordered and increasing", lemma_checks(lemma_grid, ["bs_price_order"])["bs_price_order"], 2500)


def test_lemma_restricted_market(verdict, lemma_grid):
    out = lemma_checks(lemma_grid, ["restricted_market"], restricted_samples=20, seed=0)["restricted_market"]
    _lemma(verdict, "3 restricted market below full market, 20 samples", out, 40)


@pytest.mark.xfail(strict=True, reason="absolute delay mass rises with q under BS below its price switch")
def test_lemma_delay_mass(verdict, lemma_grid):
    out = lemma_checks(lemma_grid, ["delay_mass"])["delay_mass"]
    detail = "" if out.passed else f"{out.counterexample['strategy']} at q={out.counterexample['params']['q']:g}"
    assert verdict("3 delay mass non-increasing in q, zero paid delay under UP", out.passed, detail)


def test_lemma_delay_share(verdict, lemma_grid):
    _lemma(verdict, "3 (extra) delaying share of adopters non-increasing in q", lemma_checks(lemma_grid, ["delay_share"])["delay_share"])


MC_POINTS = [
    validate_params(2.0, 1.3, 0.6),
    validate_params(4.0, 1.3, 0.9),
    validate_params(1.5, 2.5, 0.3, c_h=0.3),
]


def _mc_failures(strategy, params, prices, seed):
    mc = mc_demand(strategy, params, prices, n=10**6, seed=seed)
    exact = demand_profile(strategy, params, prices)
    bad = []
    pairs = [(f"progressive:{k}", exact.progressive[k], mc.profile.progressive[k]) for k in exact.progressive]
    pairs += [(f"conservative:{k}", exact.conservative[k], mc.profile.conservative[k]) for k in exact.conservative]
    pairs += [(k, getattr(exact, k), getattr(mc.profile, k)) for k in ("software_stage1", "software_stage2", "ssh_units")]
    for key, want, got in pairs:
        # the analytic mass sets the SE floor so that a rare cell sampled as 0 still counts
        se = max(mc.se[key], float(binomial_se(min(want, 1.0), mc.n)))
        if abs(got - want) > 4 * se + 1e-12:
            bad.append((strategy.value, key, want, got, se))
    return bad


def test_monte_carlo_agreement(verdict):
    triples = []
    for k, p in enumerate(MC_POINTS):
        for s in Strategy:
            prices = equilibrium(s, p).prices
            if k == 2:
                # off-equilibrium prices: scale every price by 0.9
                prices = type(prices)(s, {f: 0.9 * x for f, x in prices.prices.items()})
            triples.append((s, p, prices))
    bad = [b for seed, t in enumerate(triples) for b in _mc_failures(*t, seed=seed)]
    again = mc_demand(triples[5][0], triples[5][1], triples[5][2], n=10**6, seed=5)
    same = again == mc_demand(triples[5][0], triples[5][1], triples[5][2], n=10**6, seed=5)
    assert verdict("4 Monte Carlo masses within 4 SE at 12 triples, n=1e6", not bad and same and len(triples) == 12), bad


def test_proposition_structure(verdict):
    low = [validate_params(2, 1.3, a) for a in np.linspace(0.05, 0.14168, 8)]
    ok_a = not any(second_wins_somewhere((UP, US), p) for p in low)

    def gap(pair, q):
        p = validate_params(q, 1.3, 0.9)
        return optimal_profit(pair[0], p) - optimal_profit(pair[1], p)

    ok_b = (
        abs(gap((BP, BS), 3) - (3.06609 - 3.06453)) <= 1e-4
        and abs(gap((BP, BS), 4) - (3.82175 - 3.83680)) <= 1e-4
        and gap((BP, BS), 3) > 0 > gap((BP, BS), 4)
        and 3 < find_threshold((BP, BS), validate_params(2, 1.3, 0.9), "q", (3, 4)).value < 4
    )
    ok_c = (
        abs(gap((UP, BP), 1.2) - (2.03946 - 1.89532)) <= 1e-4
        and abs(gap((UP, BP), 3) - (2.83478 - 3.06609)) <= 1e-4
        and 1.2 < find_threshold((UP, BP), validate_params(2, 1.3, 0.9), "q", (1.2, 3)).value < 3
    )
    counts = [len(oscillation_scan(validate_params(2, 1.3, a))) for a in np.linspace(0.05, 0.95, 19)]
    ok_d = max(counts) <= 1
    verdict("5a UP beats US at every q for alpha <= 0.14168", ok_a)
    verdict("5b BP/BS switch in q in (3, 4) at alpha=0.9", ok_b)
    verdict("5c UP/BP switch in q in (1.2, 3) at alpha=0.9", ok_c)
    verdict("5d at most one US/BS switch per scan line at gamma=1.3", ok_d, f"max {max(counts)}")
    assert ok_a and ok_b and ok_c and ok_d


def test_high_gamma_regimes(verdict):
    p = validate_params(2, 2.5, 0.9)
    ok_bp = all(first_wins((BP, BS), p.with_(q=q))[0] for q in scan_points((BP, BS), p, np.linspace(1, 5, 401)[1:]))
    sweep = np.arange(0.6, 0.75 + 1e-12, 0.0005)
    many = [a for a in sweep if len(oscillation_scan(validate_params(2, 2.3, a))) >= 3]
    two = [a for a in np.linspace(0.05, 0.95, 91) if len(oscillation_scan(validate_params(2, 3.0, a))) == 2]
    verdict("6 BP weakly beats BS at every q, gamma=2.5, alpha=0.9", ok_bp)
    verdict("6 three or more US/BS switches at gamma=2.3", bool(many), f"alpha {many[0]:.4f}.." if many else "")
    verdict("6 exactly two US/BS switches at gamma=3", bool(two), f"alpha {two[0]:.3f}.." if two else "")
    assert ok_bp and many and two


RUNS = [
    ["equilibrium", "--format", "json"],
    ["equilibrium", "--format", "csv", "--q", "4", "--alpha", "0.9"],
    ["regions", "--pair", "BP,BS", "--gamma", "1.3"],
    ["regions", "--q-grid", "1.5:4.5:3", "--alpha-grid", "0.3,0.6,0.9", "--format", "json"],
    ["thresholds", "--pair", "BP,BS", "--alpha", "0.9", "--bracket", "3,4"],
    ["oscillation", "--gamma", "2.3", "--alpha", "0.697"],
    ["simulate", "--strategy", "US", "--n", "50000", "--seed", "9"],
]


def test_determinism_formats_scaling(verdict, tmp_path, capsys):
    identical = True
    for k, argv in enumerate(RUNS):
        a, b = tmp_path / f"{k}a", tmp_path / f"{k}b"
        assert main([*argv, "--out", str(a)]) == 0 and main([*argv, "--out", str(b)]) == 0
        identical &= a.read_bytes() == b.read_bytes()

    header = (tmp_path / "2a").read_text().split("\n")[0]
    eq = json.loads((tmp_path / "0a").read_text())
    keys = {"strategy", "case_id", "prices", "profit", "demand", "epsilon_limit"}
    rows = list(csv.DictReader(io.StringIO((tmp_path / "2a").read_text())))
    reparsed = all(
        float(r["profit_winner"]) == pytest.approx(max(optimal_profit(s, validate_params(float(r["q"]), 1.3, float(r["alpha"]))) for s in (BP, BS)), rel=1e-11)
        for r in rows[::37]
    )
    schemas = header == "q,alpha,winner,profit_winner,gap,case_winner" and all(set(r) == keys for r in eq["results"]) and reparsed

    rng = np.random.default_rng(77)
    scaled_ok = True
    for p, lam in zip(sample_params(50, seed=77), rng.uniform(0.1, 10.0, 50)):
        sp = scale_params(p, lam)
        for s in Strategy:
            a, b = optimal_profit(s, p) * lam, optimal_profit(s, sp)
            scaled_ok &= abs(a - b) <= 1e-10 * abs(a)
        scaled_ok &= rank_strategies(p)[0][0] is rank_strategies(sp)[0][0]
    maps_ok = region_map(validate_params(2, 1.3, 0.6)).winner.tolist() == region_map(
        scale_params(validate_params(2, 1.3, 0.6), 3.7)
    ).winner.tolist()

    verdict("7 repeated runs byte-identical", identical)
    verdict("7 CSV/JSON schemas and 12-digit CSV round trip", schemas)
    verdict("7 profits scale by lambda, winner invariant, 50 pairs", scaled_ok and maps_ok)
    assert identical and schemas and scaled_ok and maps_ok
