"""Closed-form equilibria of the four manufacturer strategies.

Each strategy's optimum is piecewise: a table of cases, each with a condition
on (q, gamma, alpha, t_h), an optimal price vector and an optimal profit.
Case numbers match the published tables (UP 1-3, US 1-4, BP 1-3, BS 1-2).

All formulas are written in units of v: thresholds are dimensionless, prices
and ADS profit terms carry one factor of v.  The vehicle (or bundle) is always
priced at 2v, so every consumer buys a car.

US cases 1 and 3 price the subscription at an arbitrarily small ``eps``; their
reported profit is the eps -> 0 supremum, and the price vector uses the
configured ``eps``.
"""

from __future__ import annotations

import math
import operator as op
from dataclasses import dataclass

from adspricing.demand import DemandProfile, demand_profile
from adspricing.errors import ConstraintViolation, Degenerate
from adspricing.model import ModelParams, PriceDecision, Strategy

DEFAULT_EPS = 1e-6
BS_GAMMA_SPLIT = 2.5
_BOUNDARY_RTOL = 1e-12


@dataclass(frozen=True)
class EquilibriumResult:
    strategy: Strategy
    case_id: int
    prices: PriceDecision
    profit: float
    demand: DemandProfile
    epsilon_limit: bool = False
    epsilon_loss: float = 0.0

    @property
    def strict_profit(self) -> float:
        """Profit with the eps-row loss bound subtracted (knife-edge tie breaking)."""
        return self.profit - self.epsilon_loss

    def as_dict(self) -> dict:
        return {
            "strategy": self.strategy.value,
            "case_id": self.case_id,
            "prices": self.prices.as_dict(),
            "profit": self.profit,
            "demand": self.demand.as_dict(),
            "epsilon_limit": self.epsilon_limit,
        }


def epsilon_penalty(alpha: float, eps: float) -> float:
    """Upper bound on the O(eps) profit loss of an eps-priced subscription row."""
    return (3 + alpha) / 2 * eps


# ---------------------------------------------------------------- thresholds


def up_thresholds(p: ModelParams) -> dict[str, float]:
    g, th = p.gamma, p.t_h
    return {
        "gamma_UP": 1 + th,
        "q1_UP": (g**2 + g + math.sqrt(g * (g + 1) * (g - th - 1) ** 2)) / (g**2 + g),
        "q2_UP": (th + 2) / (g + 1),
    }


def us_thresholds(p: ModelParams) -> dict[str, float]:
    g, th, a = p.gamma, p.t_h, p.alpha
    d = a**2 - 2 * a - 4 * g + 1
    root = math.sqrt((a - 1) * (g + 1) * d * (th - g + 1) ** 2)
    q3 = ((a**2 - 1) * th * (g + 1) - 2 * (-(a**2 * (g + 1)) - a * g**2 + a + g**2 + root + g)) / (
        (a - 1) * (g + 1) * (a * g + a + 3 * g - 1)
    )
    return {
        "gamma_US": 1 + th,
        "alpha_US": 2 * g - 2 * math.sqrt(g * (g + 1)) + 1,
        "q1_US": (g**2 + math.sqrt(g * (g + 1) * (-th + g - 1) ** 2) + g) / (g**2 + g),
        "q2_US": (a + (a - 1) * th + 2 * g - 1) / ((a + 1) * g),
        "q3_US": q3,
        "q4_US": (th + 2) / (g + 1),
    }


def bp_thresholds(p: ModelParams) -> dict[str, float]:
    g, a = p.gamma, p.alpha
    out = {
        "alpha_BP": g / (g + 1),
        "q1_BP": (a * (3 * g - 2) + g) / ((a + 1) * g),
        "q2_BP": (a * (2 * g**2 + g - 1) + 2 * g**2) / ((a + 1) * g * (g + 1)),
    }
    den = (a + 1) ** 2 * g**2 * (g + 1) * (a * g + a - g)
    if den > 0:
        rad = a * (a + 1) ** 2 * (g - 1) ** 2 * g**2 * (g + 1) * (a * g + a - g) ** 2 * (a * g + a + g)
        num = (
            a**3 * (g + 1) ** 2 * g**2
            + a**2 * (g**2 + 3 * g + 2) * g**2
            + math.sqrt(2) * math.sqrt(rad)
            + a * (g**2 - g**4)
            - g**4
            - g**3
        )
        out["q3_BP"] = num / den
    else:
        # only used for alpha > alpha_BP, where den > 0
        out["q3_BP"] = math.nan
    return out


def bs_thresholds(p: ModelParams) -> dict[str, float]:
    g, a = p.gamma, p.alpha
    den = g - 2 * a * (g - 2) * g
    out = {"alpha_BS": 1 / (2 * (g - 2)) if g != 2 else math.inf}
    if den > 0:
        out["q_BS"] = (math.sqrt(2) * math.sqrt(a * (g - 1) ** 2 * (2 * a + g)) + 2 * a + g) / den
    else:
        out["q_BS"] = math.inf
    return out


def case_thresholds(strategy, params: ModelParams) -> dict[str, float]:
    strategy = Strategy.parse(strategy)
    return {
        Strategy.UP: up_thresholds,
        Strategy.US: us_thresholds,
        Strategy.BP: bp_thresholds,
        Strategy.BS: bs_thresholds,
    }[strategy](params)


# ---------------------------------------------------------------- case logic


def _close(a: float, b: float) -> bool:
    if not (math.isfinite(a) and math.isfinite(b)):
        return False
    return abs(a - b) <= _BOUNDARY_RTOL * max(1.0, abs(a), abs(b))


def _le(a, b):
    return a <= b or _close(a, b)


def _ge(a, b):
    return a >= b or _close(a, b)


def _lt(a, b):
    return a < b or _close(a, b)


def _gt(a, b):
    return a > b or _close(a, b)


def _conditions(strategy: Strategy, p: ModelParams, le, ge, lt, gt) -> dict[int, bool]:
    q, g, a = p.q, p.gamma, p.alpha
    if strategy is Strategy.UP:
        t = up_thresholds(p)
        return {
            1: ge(g, t["gamma_UP"]) and le(q, t["q1_UP"]),
            2: (ge(g, t["gamma_UP"]) and gt(q, t["q1_UP"])) or (le(g, t["gamma_UP"]) and gt(q, t["q2_UP"])),
            3: le(g, t["gamma_UP"]) and le(q, t["q2_UP"]),
        }
    if strategy is Strategy.US:
        t = us_thresholds(p)
        hi_g, lo_g = ge(g, t["gamma_US"]), le(g, t["gamma_US"])
        lo_a, hi_a = le(a, t["alpha_US"]), gt(a, t["alpha_US"])
        return {
            1: (hi_g and lo_a and le(q, t["q1_US"])) or (hi_g and hi_a and le(q, t["q2_US"])),
            2: hi_g and hi_a and gt(q, t["q2_US"]) and le(q, t["q3_US"]),
            3: (hi_g and lo_a and ge(q, t["q1_US"]))
            or (hi_g and hi_a and ge(q, t["q3_US"]))
            or (lo_g and gt(q, t["q4_US"])),
            4: lo_g and le(q, t["q4_US"]),
        }
    if strategy is Strategy.BP:
        t = bp_thresholds(p)
        lo_a, hi_a = le(a, t["alpha_BP"]), gt(a, t["alpha_BP"])
        return {
            1: (lo_a and le(q, t["q1_BP"])) or (hi_a and le(q, t["q3_BP"])),
            2: lo_a and gt(q, t["q1_BP"]) and le(q, t["q2_BP"]),
            3: (hi_a and gt(q, t["q3_BP"])) or (lo_a and gt(q, t["q2_BP"])),
        }
    t = bs_thresholds(p)
    low_g = le(g, BS_GAMMA_SPLIT)
    high_g = g > BS_GAMMA_SPLIT
    if (low_g or (high_g and a < t["alpha_BS"])) and not math.isfinite(t["q_BS"]):
        raise Degenerate(f"q_BS has a pole at gamma={g}, alpha={a}")
    below = high_g and lt(a, t["alpha_BS"])
    return {
        1: (low_g and le(q, t["q_BS"])) or (below and le(q, t["q_BS"])) or (high_g and ge(a, t["alpha_BS"])),
        2: (low_g and gt(q, t["q_BS"])) or (below and gt(q, t["q_BS"])),
    }


def matching_cases(strategy, params: ModelParams) -> list[int]:
    """Every table row whose condition holds, with boundaries counted on both sides."""
    strategy = Strategy.parse(strategy)
    conds = _conditions(strategy, params, _le, _ge, _lt, _gt)
    return [k for k, ok in conds.items() if ok]


def case_select(strategy, params: ModelParams) -> int:
    """The table row whose (literal) condition holds; first listed row wins overlaps."""
    strategy = Strategy.parse(strategy)
    conds = _conditions(strategy, params, op.le, op.ge, op.lt, op.gt)
    for k, ok in conds.items():
        if ok:
            return k
    # only reachable when a literal condition column leaves a gap
    near = matching_cases(strategy, params)
    if near:
        return near[0]
    raise Degenerate(f"no {strategy.value} table row covers {params}")


# ---------------------------------------------------------------- table rows
#
# Each row returns (prices, profit, epsilon_limit).  Profit terms are shared
# between UP and the US eps rows so their limits agree bit for bit.


def _up_low(p: ModelParams) -> float:
    g, q, th = p.gamma, p.q, p.t_h
    return (th - g * q + 1) ** 2 * p.v / (4 * g * q)


def _up_high(p: ModelParams) -> float:
    g, q, th = p.gamma, p.q, p.t_h
    return (g * q + q - 2 - th) ** 2 * p.v / (4 * (g + 1) * q)


def _unbundled_base(p: ModelParams) -> float:
    return 2 * (2 * p.v - p.c_v)


def _bundled_base(p: ModelParams) -> float:
    return 2 * (2 * p.v - p.c)


def _row(strategy: Strategy, case: int, p: ModelParams, eps: float):
    g, q, a, th, v = p.gamma, p.q, p.alpha, p.t_h, p.v
    if strategy is Strategy.UP:
        # software is folded into the SSH price (p_s = 0)
        if case == 1:
            return {"p_v": 2 * v, "p_h": 0.5 * (th + g * q - 1) * v, "p_s": 0.0}, _up_low(p) + _unbundled_base(p), False
        if case == 2:
            return {"p_v": 2 * v, "p_h": 0.5 * (th + g * q + q - 2) * v, "p_s": 0.0}, _up_high(p) + _unbundled_base(p), False
        return {"p_v": 2 * v, "p_h": (g * q + q - 2) * v, "p_s": 0.0}, _unbundled_base(p), False
    if strategy is Strategy.US:
        if case == 1:
            ph = 0.5 * (-a - 1) * eps + 0.5 * v * (g * q + th - 1)
            return {"p_v": 2 * v, "p_h": ph, "r_s": eps}, _up_low(p) + _unbundled_base(p), True
        if case == 2:
            d = a**2 - 2 * a - 4 * g + 1
            ph = v * (-a * g + a + a**2 * (g * q - 1) + g * (-2 * g * q + q + 1) - th * (a + 2 * g - 1)) / d
            rs = v * (a + 2 * g - a * g * q - g * q + (a - 1) * th - 1) / d
            pi = -v * (
                a + g + g * q**2 * (a + g) - q * (a * g + a + 3 * g + th * (a + 2 * g - 1) - 1) + th**2 + a * th + th
            ) / (q * d)
            return {"p_v": 2 * v, "p_h": ph, "r_s": rs}, pi + _unbundled_base(p), False
        if case == 3:
            ph = eps / 2 * (-a - 3) + 0.5 * (th + g * q + q - 2) * v
            return {"p_v": 2 * v, "p_h": ph, "r_s": eps}, _up_high(p) + _unbundled_base(p), True
        return {"p_v": 2 * v, "p_h": (g - 1) * q * v, "r_s": (q - 1) * v}, _unbundled_base(p), False
    if strategy is Strategy.BP:
        if case == 1:
            k = a * (g + g * q - 2) + g * (q - 1)
            return {"p_b": 2 * v, "p_s": v * k / (4 * a)}, k**2 * v / (8 * a * g * q) + _bundled_base(p), False
        if case == 2:
            return {"p_b": 2 * v, "p_s": v * (g - 1)}, (a + 1) * (g - 1) * (q - 1) * v / q + _bundled_base(p), False
        k = a * (g + 1) * (g * q - 1) + g * (g * q + q - 2)
        m = a * g + a + g
        return {"p_b": 2 * v, "p_s": v * k / (2 * m)}, k**2 * v / (4 * g * (g + 1) * q * m) + _bundled_base(p), False
    if case == 1:
        return {"p_b": 2 * v, "r_s": 0.5 * v * (g * q - 1)}, a * (g * q - 1) ** 2 * v / (2 * g * q) + _bundled_base(p), False
    k = 2 * a * (g * q - 1) + g * (q - 1)
    return {"p_b": 2 * v, "r_s": v * k / (2 * (2 * a + g))}, k**2 * v / (4 * g * q * (2 * a + g)) + _bundled_base(p), False


def row_profit(strategy, case_id: int, params: ModelParams, eps: float = DEFAULT_EPS) -> float:
    """Profit formula of one table row, evaluated whether or not its condition holds."""
    return _row(Strategy.parse(strategy), case_id, params, eps)[1]


def row_prices(strategy, case_id: int, params: ModelParams, eps: float = DEFAULT_EPS) -> dict[str, float]:
    return dict(_row(Strategy.parse(strategy), case_id, params, eps)[0])


def equilibrium(strategy, params: ModelParams, eps: float = DEFAULT_EPS) -> EquilibriumResult:
    """Optimal prices and profit from the strategy's table.

    At a case boundary every row whose condition holds (within rounding) is
    evaluated and the most profitable one is reported.
    """
    strategy = Strategy.parse(strategy)
    if not 0 < eps <= 1e-3:
        raise ConstraintViolation("eps must lie in (0, 1e-3]")
    selected = case_select(strategy, params)
    best = None
    for case in dict.fromkeys([selected, *matching_cases(strategy, params)]):
        prices, pi, lim = _row(strategy, case, params, eps)
        if best is None or pi > best[2]:
            best = (case, prices, pi, lim)
    case, prices, pi, lim = best
    decision = PriceDecision(strategy, prices)
    return EquilibriumResult(
        strategy=strategy,
        case_id=case,
        prices=decision,
        profit=pi,
        demand=demand_profile(strategy, params, decision),
        epsilon_limit=lim,
        epsilon_loss=epsilon_penalty(params.alpha, eps) if lim else 0.0,
    )


def optimal_profit(strategy, params: ModelParams, eps: float = DEFAULT_EPS, strict: bool = False) -> float:
    """Equilibrium profit; ``strict`` subtracts the eps-row loss bound."""
    strategy = Strategy.parse(strategy)
    selected = case_select(strategy, params)
    best = None
    for case in dict.fromkeys([selected, *matching_cases(strategy, params)]):
        _, pi, lim = _row(strategy, case, params, eps)
        if strict and lim:
            pi -= epsilon_penalty(params.alpha, eps)
        best = pi if best is None else max(best, pi)
    return best


# ---------------------------------------------------------------- BS prices


def bs_subscription_prices(params: ModelParams) -> tuple[float, float]:
    """(r_s_h, r_s_l): the high-q and low-q BS subscription prices."""
    return row_prices(Strategy.BS, 2, params)["r_s"], row_prices(Strategy.BS, 1, params)["r_s"]
