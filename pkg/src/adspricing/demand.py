"""Consumer side of the two-stage game.

Utilities, indifference points, behaviour masses and manufacturer profit for
arbitrary prices.  Progressive and conservative consumers each have unit mass
and perceived reliability theta ~ U[0, 1].  A consumer who uses ADS in a stage
gets v*theta*q (stage 1) or v*theta*gamma*q (stage 2) instead of the bare
vehicle utility v.

The array kernels (:func:`profit_grid`, :func:`restricted_profit_grid`)
broadcast over price arrays and skip all validation; the grid oracle uses
them.  The scalar functions validate and return plain floats.
"""

from __future__ import annotations

from dataclasses import dataclass
from types import MappingProxyType
from typing import Mapping

import numpy as np

from adspricing.errors import ConstraintViolation, RestrictedPricing, StrategyMismatch
from adspricing.model import VEHICLE_FIELD, ModelParams, PriceDecision, Strategy

RESTRICTED = "restricted"

PROGRESSIVE_LABELS: dict[object, tuple[str, ...]] = {
    Strategy.UP: ("PPH", "PDP", "PDN", "NNN"),
    Strategy.US: ("PSS", "PSN", "PDS", "PDN", "NNN"),
    Strategy.BP: ("PH", "DP", "DN", "NN"),
    Strategy.BS: ("SS", "SN", "DS", "DN", "NN"),
    RESTRICTED: ("PH", "DP", "PN", "NA"),
}
CONSERVATIVE_LABELS: dict[object, tuple[str, ...]] = {
    Strategy.UP: ("NNN",),
    Strategy.US: ("NNN",),
    Strategy.BP: ("NP", "NN"),
    Strategy.BS: ("NS", "NN"),
    RESTRICTED: ("NA",),
}
# progressive consumers who postpone ADS to stage 2 (both outcomes of the redraw)
DELAY_LABELS: dict[object, tuple[str, ...]] = {
    Strategy.UP: ("PDP", "PDN"),
    Strategy.US: ("PDS", "PDN"),
    Strategy.BP: ("DP", "DN"),
    Strategy.BS: ("DS", "DN"),
    RESTRICTED: ("DP", "PN"),
}


@dataclass(frozen=True)
class Behavior:
    strategy: object  # Strategy, or RESTRICTED for the p > 2v market
    label: str
    segment: str = "progressive"

    def __post_init__(self):
        table = PROGRESSIVE_LABELS if self.segment == "progressive" else CONSERVATIVE_LABELS
        if self.segment not in ("progressive", "conservative") or self.label not in table[self.strategy]:
            raise ValueError(f"{self.label!r} is not a {self.segment} behaviour under {self.strategy}")


@dataclass(frozen=True)
class ThresholdSet:
    raw: Mapping[str, float]
    clamped: Mapping[str, float]


@dataclass(frozen=True)
class DemandProfile:
    """Behaviour masses per consumer segment plus aggregate unit counts.

    For perpetual licensing ``software_stage1``/``software_stage2`` count
    licences sold in each stage and ``software_perpetual`` their sum; for
    subscriptions they count subscribers per stage and ``software_perpetual``
    is zero.
    """

    strategy: object
    progressive: Mapping[str, float]
    conservative: Mapping[str, float]
    software_stage1: float
    software_stage2: float
    software_perpetual: float
    ssh_units: float
    vehicle_units: float

    @property
    def behavior_mass(self) -> dict[Behavior, float]:
        out = {Behavior(self.strategy, k, "progressive"): m for k, m in self.progressive.items()}
        out.update({Behavior(self.strategy, k, "conservative"): m for k, m in self.conservative.items()})
        return out

    @property
    def delay_mass(self) -> float:
        return sum(self.progressive[k] for k in DELAY_LABELS[self.strategy])

    def as_dict(self) -> dict:
        return {
            "strategy": getattr(self.strategy, "value", self.strategy),
            "progressive": dict(self.progressive),
            "conservative": dict(self.conservative),
            "software_stage1": self.software_stage1,
            "software_stage2": self.software_stage2,
            "software_perpetual": self.software_perpetual,
            "ssh_units": self.ssh_units,
            "vehicle_units": self.vehicle_units,
        }


def _clamp(x):
    return np.minimum(np.maximum(x, 0.0), 1.0)


def _check(strategy, prices: PriceDecision) -> Strategy:
    strategy = Strategy.parse(strategy)
    if prices.strategy is not strategy:
        raise StrategyMismatch(f"prices are tagged {prices.strategy.value}, expected {strategy.value}")
    return strategy


# ---------------------------------------------------------------- kernels


def _raw_thresholds(strategy: Strategy, params: ModelParams, pr: Mapping) -> dict:
    q, g, v = params.q, params.gamma, params.v
    if strategy is Strategy.UP:
        s = pr["p_h"] + pr["p_s"]
        return {
            "theta12": np.broadcast_to(1.0 / q, np.shape(s)) + 0.0,
            "theta23": (s + v) / (g * q * v),
            "theta13": (s + 2 * v) / (g * q * v + q * v),
        }
    if strategy is Strategy.US:
        r, ph = pr["r_s"], pr["p_h"]
        return {
            "theta12": (r + v) / (v * q) + 0.0 * ph,
            "theta23": (ph + r + v) / (v * g * q),
            "theta13": (ph + 2 * r + 2 * v) / (v * g * q + v * q),
        }
    if strategy is Strategy.BP:
        ps = pr["p_s"]
        t23 = (ps + v) / (g * q * v)
        return {
            "theta12": np.broadcast_to(1.0 / q, np.shape(ps)) + 0.0,
            "theta23": t23,
            "theta13": (ps + 2 * v) / (g * q * v + q * v),
            "theta34": t23,
        }
    r = pr["r_s"]
    t23 = (r + v) / (g * q * v)
    return {
        "theta12": (r + v) / (q * v),
        "theta23": t23,
        "theta13": (2 * r + 2 * v) / (q * v + g * q * v),
        "theta34": t23,
    }


def _split_progressive(c12, c23, c13):
    """Top (use both stages), delay and never masses from clamped thresholds."""
    top = 1.0 - np.maximum(c12, c13)
    delay = np.maximum(0.0, c12 - c23)
    return top, delay, 1.0 - top - delay


def _masses(strategy: Strategy, params: ModelParams, pr: Mapping):
    t = _raw_thresholds(strategy, params, pr)
    c = {k: _clamp(x) for k, x in t.items()}
    a = params.alpha
    top, delay, never = _split_progressive(c["theta12"], c["theta23"], c["theta13"])
    if strategy is Strategy.UP:
        prog = {"PPH": top, "PDP": a * delay, "PDN": (1 - a) * delay, "NNN": never}
        cons = {"NNN": np.ones_like(top)}
    elif strategy is Strategy.US:
        prog = {
            "PSS": a * top,
            "PSN": (1 - a) * top,
            "PDS": a * delay,
            "PDN": (1 - a) * delay,
            "NNN": never,
        }
        cons = {"NNN": np.ones_like(top)}
    elif strategy is Strategy.BP:
        prog = {"PH": top, "DP": a * delay, "DN": (1 - a) * delay, "NN": never}
        np_ = a * np.maximum(0.0, 1.0 - c["theta34"])
        cons = {"NP": np_, "NN": 1.0 - np_}
    else:
        prog = {"SS": a * top, "SN": (1 - a) * top, "DS": a * delay, "DN": (1 - a) * delay, "NN": never}
        ns = a * np.maximum(0.0, 1.0 - c["theta34"])
        cons = {"NS": ns, "NN": 1.0 - ns}
    return t, c, prog, cons


def _aggregates(strategy: Strategy, prog: Mapping, cons: Mapping) -> dict:
    if strategy is Strategy.UP:
        sw = prog["PPH"] + prog["PDP"]
        return {
            "software_stage1": prog["PPH"],
            "software_stage2": prog["PDP"],
            "software_perpetual": sw,
            "ssh_units": prog["PPH"] + prog["PDP"] + prog["PDN"],
            "vehicle_units": 2.0 + 0.0 * sw,
        }
    if strategy is Strategy.US:
        s1 = prog["PSS"] + prog["PSN"]
        return {
            "software_stage1": s1,
            "software_stage2": prog["PSS"] + prog["PDS"],
            "software_perpetual": 0.0 * s1,
            "ssh_units": prog["PSS"] + prog["PSN"] + prog["PDS"] + prog["PDN"],
            "vehicle_units": 2.0 + 0.0 * s1,
        }
    if strategy is Strategy.BP:
        sw = prog["PH"] + prog["DP"] + cons["NP"]
        return {
            "software_stage1": prog["PH"],
            "software_stage2": prog["DP"] + cons["NP"],
            "software_perpetual": sw,
            "ssh_units": 2.0 + 0.0 * sw,
            "vehicle_units": 2.0 + 0.0 * sw,
        }
    s1 = prog["SS"] + prog["SN"]
    return {
        "software_stage1": s1,
        "software_stage2": prog["SS"] + prog["DS"] + cons["NS"],
        "software_perpetual": 0.0 * s1,
        "ssh_units": 2.0 + 0.0 * s1,
        "vehicle_units": 2.0 + 0.0 * s1,
    }


def _profit_from_masses(strategy: Strategy, params: ModelParams, pr: Mapping, prog, cons):
    if strategy is Strategy.UP:
        return (
            (prog["PPH"] + prog["PDP"]) * pr["p_s"]
            + (prog["PPH"] + prog["PDP"] + prog["PDN"]) * (pr["p_h"] - params.c_h)
            + 2 * (pr["p_v"] - params.c_v)
        )
    if strategy is Strategy.US:
        return (
            (2 * prog["PSS"] + prog["PSN"] + prog["PDS"]) * pr["r_s"]
            + (prog["PSS"] + prog["PSN"] + prog["PDS"] + prog["PDN"]) * (pr["p_h"] - params.c_h)
            + 2 * (pr["p_v"] - params.c_v)
        )
    if strategy is Strategy.BP:
        return (prog["PH"] + prog["DP"] + cons["NP"]) * pr["p_s"] + 2 * (pr["p_b"] - params.c)
    return (2 * prog["SS"] + prog["SN"] + prog["DS"] + cons["NS"]) * pr["r_s"] + 2 * (pr["p_b"] - params.c)


def profit_grid(strategy, params: ModelParams, **prices) -> np.ndarray:
    """Profit for broadcastable price arrays, full-market model, no checks."""
    strategy = Strategy.parse(strategy)
    pr = {k: np.asarray(x, dtype=float) for k, x in prices.items()}
    _, _, prog, cons = _masses(strategy, params, pr)
    return _profit_from_masses(strategy, params, pr, prog, cons)


# ---------------------------------------------------------------- public


def behavior_utilities(strategy, params: ModelParams, prices: PriceDecision, theta) -> dict[str, float]:
    """Two-stage utility of each stage-1 plan (and the conservative stage-2 buy).

    Keys are behaviour labels; values broadcast over ``theta``.
    """
    strategy = _check(strategy, prices)
    q, g, v = params.q, params.gamma, params.v
    th = np.asarray(theta, dtype=float)
    p = prices.prices
    if strategy is Strategy.UP:
        base = p["p_s"] + p["p_v"] + p["p_h"]
        out = {
            "PPH": v * th * (q + g * q) - base,
            "PDP": v + v * th * g * q - base,
            "NNN": 2 * v - p["p_v"] + 0.0 * th,
        }
    elif strategy is Strategy.US:
        r = p["r_s"]
        out = {
            "PSS": (v * th * q - r) + (v * th * g * q - r) - p["p_v"] - p["p_h"],
            "PDS": v + v * th * g * q - r - p["p_v"] - p["p_h"],
            "NNN": 2 * v - p["p_v"] + 0.0 * th,
        }
    elif strategy is Strategy.BP:
        out = {
            "PH": v * th * (q + g * q) - p["p_s"] - p["p_b"],
            "DP": v + v * th * g * q - p["p_s"] - p["p_b"],
            "NN": 2 * v - p["p_b"] + 0.0 * th,
            "NP": v + v * th * g * q - p["p_s"] - p["p_b"],
        }
    else:
        r = p["r_s"]
        out = {
            "SS": v * th * (q + g * q) - 2 * r - p["p_b"],
            "DS": v + v * th * g * q - r - p["p_b"],
            "NN": 2 * v - p["p_b"] + 0.0 * th,
            "NS": v + v * th * g * q - r - p["p_b"],
        }
    if th.ndim == 0:
        return {k: float(x) for k, x in out.items()}
    return out


def indifference_points(strategy, params: ModelParams, prices: PriceDecision) -> ThresholdSet:
    strategy = _check(strategy, prices)
    t = _raw_thresholds(strategy, params, dict(prices.prices))
    raw = {k: float(x) for k, x in t.items()}
    return ThresholdSet(MappingProxyType(raw), MappingProxyType({k: min(max(x, 0.0), 1.0) for k, x in raw.items()}))


def _full_market(strategy: Strategy, params: ModelParams, prices: PriceDecision):
    name = VEHICLE_FIELD[strategy]
    if prices[name] > 2 * params.v:
        raise RestrictedPricing(f"{name} = {prices[name]:g} exceeds 2v; use restricted_demand_profit")


def _profile(strategy, prog, cons, agg) -> DemandProfile:
    return DemandProfile(
        strategy=strategy,
        progressive=MappingProxyType({k: float(x) for k, x in prog.items()}),
        conservative=MappingProxyType({k: float(x) for k, x in cons.items()}),
        **{k: float(x) for k, x in agg.items()},
    )


def demand_profile(strategy, params: ModelParams, prices: PriceDecision) -> DemandProfile:
    strategy = _check(strategy, prices)
    _full_market(strategy, params, prices)
    pr = dict(prices.prices)
    _, _, prog, cons = _masses(strategy, params, pr)
    return _profile(strategy, prog, cons, _aggregates(strategy, prog, cons))


def profit(strategy, params: ModelParams, prices: PriceDecision) -> float:
    """Manufacturer profit at the given (full-market) prices."""
    strategy = _check(strategy, prices)
    _full_market(strategy, params, prices)
    pr = dict(prices.prices)
    _, _, prog, cons = _masses(strategy, params, pr)
    return float(_profit_from_masses(strategy, params, pr, prog, cons))


# ---------------------------------------------------------- p > 2v market
#
# Nobody buys the bare car, so the only buyers are progressive consumers who
# plan to use ADS; their options mirror BP/BS with the outside option worth 0.


def _restricted_kernel(params: ModelParams, p_b, s, mode: str):
    q, g, v, a = params.q, params.gamma, params.v, params.alpha
    p_b = np.asarray(p_b, dtype=float)
    s = np.asarray(s, dtype=float)
    if mode == "perpetual":
        t12 = 1.0 / q + 0.0 * (p_b + s)
        t23 = (s + p_b - v) / (g * q * v)
        t13 = (s + p_b) / (q * v + g * q * v)
    else:
        t12 = (s + v) / (q * v) + 0.0 * p_b
        t23 = (s + p_b - v) / (g * q * v)
        t13 = (2 * s + p_b) / (q * v + g * q * v)
    top, delay, never = _split_progressive(_clamp(t12), _clamp(t23), _clamp(t13))
    prog = {"PH": top, "DP": a * delay, "PN": (1 - a) * delay, "NA": never}
    cons = {"NA": np.ones_like(top)}
    buyers = top + delay
    if mode == "perpetual":
        sw1, sw2 = top, a * delay
        revenue = (sw1 + sw2) * s
        agg = {"software_stage1": sw1, "software_stage2": sw2, "software_perpetual": sw1 + sw2}
    else:
        sw1, sw2 = top, a * top + a * delay
        revenue = (sw1 + sw2) * s
        agg = {"software_stage1": sw1, "software_stage2": sw2, "software_perpetual": 0.0 * top}
    agg["ssh_units"] = buyers
    agg["vehicle_units"] = buyers
    return prog, cons, agg, revenue + (p_b - params.c) * buyers


def restricted_profit_grid(params: ModelParams, bundle_price, software_price, software_mode: str = "perpetual"):
    """Vectorised restricted-market profit, no checks."""
    return _restricted_kernel(params, bundle_price, software_price, software_mode)[3]


def restricted_demand_profit(
    params: ModelParams, bundle_price: float, software_price: float, software_mode: str = "perpetual"
) -> tuple[DemandProfile, float]:
    """Demand and profit when the car (with SSH) is priced above 2v.

    Unbundling is equivalent to bundling here: every buyer takes SSH.
    ``software_price`` is the licence price (perpetual) or the per-stage fee
    (subscription).
    """
    if software_mode not in ("perpetual", "subscription"):
        raise ValueError("software_mode must be 'perpetual' or 'subscription'")
    if not bundle_price > 2 * params.v:
        raise ConstraintViolation("bundle_price must exceed 2v in the restricted market")
    if software_price < 0:
        raise ConstraintViolation("software_price must be non-negative")
    prog, cons, agg, pi = _restricted_kernel(params, bundle_price, software_price, software_mode)
    return _profile(RESTRICTED, prog, cons, agg), float(pi)
