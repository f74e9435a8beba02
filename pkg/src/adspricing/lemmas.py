"""Structural checks of the equilibrium tables over a parameter grid.

Each check tests one structural property of the optimal prices and demand.
Monotonicity checks group the grid into lines of constant
(gamma, alpha, v, c_v, c_h) and walk each line in increasing q.
"""

from __future__ import annotations

import random
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from adspricing.closed_form import bp_thresholds, bs_subscription_prices, equilibrium, optimal_profit
from adspricing.model import ModelParams, Strategy

LEMMAS = (
    "software_with_ssh",
    "no_adoption",
    "bp_price_monotone",
    "bs_price_order",
    "restricted_market",
    "delay_mass",
    "delay_share",
)

_TOL = 1e-12


@dataclass(frozen=True)
class LemmaOutcome:
    name: str
    passed: bool
    checked: int
    counterexample: Mapping | None = None


@dataclass(frozen=True)
class LemmaReport:
    outcomes: Mapping[str, LemmaOutcome] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(o.passed for o in self.outcomes.values())

    def __getitem__(self, name: str) -> LemmaOutcome:
        return self.outcomes[name]

    def as_dict(self) -> dict:
        return {
            k: {"passed": o.passed, "checked": o.checked, "counterexample": o.counterexample}
            for k, o in self.outcomes.items()
        }


def _lines(grid: Iterable[ModelParams]) -> list[list[ModelParams]]:
    groups = defaultdict(list)
    for p in grid:
        groups[(p.gamma, p.alpha, p.v, p.c_v, p.c_h)].append(p)
    return [sorted(g, key=lambda p: p.q) for _, g in sorted(groups.items())]


def _fail(name, checked, params, **detail) -> LemmaOutcome:
    return LemmaOutcome(name, False, checked, {"params": params.as_dict(), **detail})


def _non_increasing(name, lines, value, what) -> LemmaOutcome:
    checked = 0
    for line in lines:
        prev = None
        for p in line:
            x = value(p)
            checked += 1
            if prev is not None and x > prev[1] + _TOL * max(1.0, abs(prev[1])):
                return _fail(name, checked, p, **{f"{what}_at_q": x, f"{what}_at_prev_q": prev[1], "prev_q": prev[0].q})
            prev = (p, x)
    return LemmaOutcome(name, True, checked)


def check_software_with_ssh(grid, spec=None) -> LemmaOutcome:
    """Pinning the UP software price to 0 loses nothing at the grid optimum."""
    from adspricing.oracle import GridSpec, optimize_prices

    spec = spec or GridSpec(resolution=64, refinement_rounds=4)
    checked = 0
    for p in grid:
        free = optimize_prices(Strategy.UP, p, spec)
        pinned = optimize_prices(Strategy.UP, p, spec, constraints={"p_s": 0.0})
        checked += 1
        if free.best_profit > pinned.best_profit + pinned.resolution_bound + _TOL:
            return _fail("software_with_ssh", checked, p, free=free.best_profit, pinned=pinned.best_profit)
    return LemmaOutcome("software_with_ssh", True, checked)


def check_no_adoption(grid) -> LemmaOutcome:
    """With c_h >= v(gamma - 1), UP and US sell no ADS exactly when q <= (c_h + 2v)/(v + v gamma)."""
    checked = 0
    for p in grid:
        if p.c_h < p.v * (p.gamma - 1):
            continue
        cutoff = (p.c_h + 2 * p.v) / (p.v + p.v * p.gamma)
        base = 2 * (2 * p.v - p.c_v)
        for s in (Strategy.UP, Strategy.US):
            eq = equilibrium(s, p)
            adopters = eq.demand.ssh_units
            checked += 1
            # masses carry rounding from thresholds that sit exactly at 1
            if p.q <= cutoff and (adopters > _TOL or abs(eq.profit - base) > _TOL * max(1.0, base)):
                return _fail("no_adoption", checked, p, strategy=s.value, adopters=adopters, profit=eq.profit)
            if p.q > cutoff and not adopters > _TOL:
                return _fail("no_adoption", checked, p, strategy=s.value, adopters=adopters, cutoff=cutoff)
    return LemmaOutcome("no_adoption", True, checked)


def check_bp_price_monotone(grid) -> LemmaOutcome:
    """BP software price is non-decreasing in q, flat at v(gamma - 1) exactly on (q1, q2] when alpha <= alpha_BP."""
    lines = _lines(grid)
    out = _non_increasing("bp_price_monotone", lines, lambda p: -equilibrium(Strategy.BP, p).prices["p_s"], "minus_p_s")
    if not out.passed:
        return out
    checked = 0
    for line in lines:
        for p in line:
            t = bp_thresholds(p)
            if p.alpha > t["alpha_BP"]:
                continue
            checked += 1
            flat = p.v * (p.gamma - 1)
            ps = equilibrium(Strategy.BP, p).prices["p_s"]
            near_edge = min(abs(p.q - t["q1_BP"]), abs(p.q - t["q2_BP"])) < 1e-9
            inside = t["q1_BP"] < p.q <= t["q2_BP"]
            at_flat = abs(ps - flat) <= 1e-12 * max(1.0, flat)
            if not near_edge and inside != at_flat:
                return _fail("bp_price_monotone", checked, p, p_s=ps, flat=flat, q1=t["q1_BP"], q2=t["q2_BP"])
    return LemmaOutcome("bp_price_monotone", True, out.checked + checked)


def check_bs_price_order(grid) -> LemmaOutcome:
    """BS high-q price below the low-q price pointwise; both strictly increasing in q."""
    checked = 0
    for line in _lines(grid):
        prev = None
        for p in line:
            high, low = bs_subscription_prices(p)
            checked += 1
            if not high < low:
                return _fail("bs_price_order", checked, p, r_s_high=high, r_s_low=low)
            if prev is not None and not (high > prev[0] and low > prev[1]):
                return _fail("bs_price_order", checked, p, r_s_high=high, r_s_low=low, previous=list(prev))
            prev = (high, low)
    return LemmaOutcome("bs_price_order", True, checked)


def check_restricted_market(grid, samples: int = 20, seed: int = 0, spec=None) -> LemmaOutcome:
    """Pricing the car above 2v is strictly worse than the full-market optimum.

    The restricted optimum plus its grid bound must stay below the better
    full-market strategy with the same licensing mode.
    """
    from adspricing.oracle import optimize_restricted

    grid = list(grid)
    picks = random.Random(seed).sample(grid, min(samples, len(grid)))
    checked = 0
    for p in picks:
        for mode, pair in (("perpetual", (Strategy.UP, Strategy.BP)), ("subscription", (Strategy.US, Strategy.BS))):
            r = optimize_restricted(p, mode, spec)
            full = max(optimal_profit(s, p) for s in pair)
            checked += 1
            if not r.best_profit + r.resolution_bound < full:
                return _fail(
                    "restricted_market", checked, p, mode=mode, restricted=r.best_profit, bound=r.resolution_bound, full=full
                )
    return LemmaOutcome("restricted_market", True, checked)


def _delay_share(eq) -> float:
    d = eq.demand
    never = d.progressive["NNN" if "NNN" in d.progressive else "NN"]
    adopters = 1.0 - never
    return d.delay_mass / adopters if adopters > 0 else 1.0


def check_delay_mass(grid) -> LemmaOutcome:
    """Delay mass non-increasing in q under US, BP, BS; no paid delayed software under UP."""
    lines = _lines(grid)
    checked = 0
    for s in (Strategy.US, Strategy.BP, Strategy.BS):
        out = _non_increasing("delay_mass", lines, lambda p, s=s: equilibrium(s, p).demand.delay_mass, f"{s.value}_delay")
        checked += out.checked
        if not out.passed:
            return LemmaOutcome("delay_mass", False, checked, {**out.counterexample, "strategy": s.value})
    for line in lines:
        for p in line:
            eq = equilibrium(Strategy.UP, p)
            checked += 1
            paid = eq.prices["p_s"] * eq.demand.software_stage2
            if paid != 0:
                return _fail("delay_mass", checked, p, strategy="UP", delayed_software_revenue=paid)
    return LemmaOutcome("delay_mass", True, checked)


def check_delay_share(grid) -> LemmaOutcome:
    """Share of ADS adopters who delay is non-increasing in q under US, BP, BS."""
    lines = _lines(grid)
    checked = 0
    for s in (Strategy.US, Strategy.BP, Strategy.BS):
        out = _non_increasing("delay_share", lines, lambda p, s=s: _delay_share(equilibrium(s, p)), f"{s.value}_share")
        checked += out.checked
        if not out.passed:
            return LemmaOutcome("delay_share", False, checked, {**out.counterexample, "strategy": s.value})
    return LemmaOutcome("delay_share", True, checked)


def lemma_checks(
    params_grid: Iterable[ModelParams],
    lemmas: Iterable[str] | None = None,
    restricted_samples: int = 20,
    seed: int = 0,
    oracle_spec=None,
) -> LemmaReport:
    """Run the selected structural checks; each outcome carries its first counterexample."""
    grid = list(params_grid)
    chosen = tuple(lemmas) if lemmas is not None else LEMMAS
    unknown = set(chosen) - set(LEMMAS)
    if unknown:
        raise ValueError(f"unknown lemma checks {sorted(unknown)}; choose from {LEMMAS}")
    runners = {
        "software_with_ssh": lambda: check_software_with_ssh(grid, oracle_spec),
        "no_adoption": lambda: check_no_adoption(grid),
        "bp_price_monotone": lambda: check_bp_price_monotone(grid),
        "bs_price_order": lambda: check_bs_price_order(grid),
        "restricted_market": lambda: check_restricted_market(grid, restricted_samples, seed),
        "delay_mass": lambda: check_delay_mass(grid),
        "delay_share": lambda: check_delay_share(grid),
    }
    return LemmaReport({name: runners[name]() for name in chosen})
