"""Formula-free checks on the closed forms.

* :func:`optimize_prices` maximises profit by refined grid search, with a
  provable bound on how far the grid optimum can fall below the true one.
* :func:`mc_demand` simulates individual consumers and reports behaviour
  frequencies with standard errors.
* :func:`find_threshold` bisects for the parameter value at which two
  strategies swap rank.

Grid search layout: the car price (p_v or p_b) only enters profit through the
additive term 2(price - cost) while it stays at or below 2v, so it is searched
on its own 1-D grid; the ADS prices get a joint grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Callable, Mapping

import numpy as np

from adspricing.closed_form import DEFAULT_EPS, optimal_profit
from adspricing.demand import (
    CONSERVATIVE_LABELS,
    PROGRESSIVE_LABELS,
    DemandProfile,
    behavior_utilities,
    profit,
    profit_grid,
    restricted_profit_grid,
)
from adspricing.errors import BudgetExceeded, ConstraintViolation, NoSignChange
from adspricing.model import PRICE_FIELDS, VEHICLE_FIELD, ModelParams, PriceDecision, Strategy

# Largest number of units sold per unit of each price, used to turn the grid
# pitch into a profit bound: a price error of d moves profit by at most
# d * units, and demand only rises when a price falls.
MAX_UNITS: dict[Strategy, dict[str, float]] = {
    Strategy.UP: {"p_v": 2.0, "p_h": 1.0, "p_s": 1.0},
    Strategy.US: {"p_v": 2.0, "p_h": 1.0, "r_s": 2.0},
    Strategy.BP: {"p_b": 2.0, "p_s": 2.0},
    Strategy.BS: {"p_b": 2.0, "r_s": 3.0},
}


@dataclass(frozen=True)
class GridSpec:
    """Search grid for the price oracle.

    ``bounds`` maps price names to (lo, hi); missing names get defaults
    (car price in [0, 2v], ADS prices in [0, (1 + gamma) q v]).  ADS upper
    bounds are widened to the choke price if given narrower.
    """

    bounds: Mapping[str, tuple[float, float]] = field(default_factory=dict)
    resolution: int = 256
    refinement_rounds: int = 3
    refinement_shrink: float = 0.1
    starts: int = 3
    max_cells: int = 2**22

    def __post_init__(self):
        if self.resolution < 16:
            raise ConstraintViolation("resolution must be at least 16")
        if self.refinement_rounds < 0:
            raise ConstraintViolation("refinement_rounds must be non-negative")
        if not 0 < self.refinement_shrink < 1:
            raise ConstraintViolation("refinement_shrink must lie in (0, 1)")
        if self.starts < 1:
            raise ConstraintViolation("starts must be at least 1")
        clean = {}
        for name, (lo, hi) in dict(self.bounds).items():
            lo, hi = float(lo), float(hi)
            if not (math.isfinite(lo) and math.isfinite(hi)) or lo < 0 or hi <= lo:
                raise ConstraintViolation(f"bad bounds for {name}: ({lo}, {hi})")
            clean[name] = (lo, hi)
        object.__setattr__(self, "bounds", MappingProxyType(clean))


@dataclass(frozen=True)
class OracleResult:
    best_prices: PriceDecision
    best_profit: float
    resolution_bound: float
    evaluations: int


def _choke(params: ModelParams) -> float:
    return (1 + params.gamma) * params.q * params.v


def _axis_bounds(name: str, vehicle: bool, params: ModelParams, spec: GridSpec) -> tuple[float, float]:
    if vehicle:
        lo, hi = spec.bounds.get(name, (0.0, 2 * params.v))
        hi = min(hi, 2 * params.v)
        return (min(lo, hi), hi)
    lo, hi = spec.bounds.get(name, (0.0, _choke(params)))
    return lo, max(hi, _choke(params))


def _top_k(values: np.ndarray, k: int, min_sep: int) -> list[tuple[int, ...]]:
    """Indices of up to k grid maxima at least ``min_sep`` cells apart."""
    order = np.argsort(values, axis=None)[::-1]
    picked: list[tuple[int, ...]] = []
    for flat in order:
        idx = np.unravel_index(flat, values.shape)
        if all(max(abs(a - b) for a, b in zip(idx, p)) >= min_sep for p in picked):
            picked.append(tuple(int(i) for i in idx))
            if len(picked) == k:
                break
    return picked


def _grid_maximise(f: Callable, bounds: list[tuple[float, float]], spec: GridSpec, starts: int):
    """Coarse grid plus windowed refinement around the best few cells.

    Returns (argmax point, value, final pitch per axis, evaluations).
    """
    n = spec.resolution
    k = len(bounds)
    if n**k > spec.max_cells:
        raise BudgetExceeded(f"{n}^{k} = {n**k} cells exceeds the budget of {spec.max_cells}")
    axes = [np.linspace(lo, hi, n) for lo, hi in bounds]
    vals = f(*np.meshgrid(*axes, indexing="ij"))
    evals = vals.size
    pitch0 = [(hi - lo) / (n - 1) for lo, hi in bounds]
    seeds = _top_k(vals, starts, min_sep=max(2, n // 16))

    best = (None, -math.inf, pitch0)
    for seed in seeds:
        point = [axes[i][seed[i]] for i in range(k)]
        value = float(vals[seed])
        pitch = list(pitch0)
        span = [hi - lo for lo, hi in bounds]
        for _ in range(spec.refinement_rounds):
            sub = []
            for i, (lo, hi) in enumerate(bounds):
                span[i] *= spec.refinement_shrink
                half = max(span[i] / 2, 2 * pitch[i])
                a, b = max(lo, point[i] - half), min(hi, point[i] + half)
                sub.append(np.linspace(a, b, n))
                # pitch over the unclipped window, so the bound never shrinks from clipping
                pitch[i] = 2 * half / (n - 1)
            if n**k > spec.max_cells:
                raise BudgetExceeded("refinement grid exceeds the budget")
            grid_vals = f(*np.meshgrid(*sub, indexing="ij"))
            evals += grid_vals.size
            idx = np.unravel_index(int(np.argmax(grid_vals)), grid_vals.shape)
            if grid_vals[idx] >= value:
                value = float(grid_vals[idx])
                point = [sub[i][idx[i]] for i in range(k)]
        if value > best[1]:
            best = (point, value, pitch)
    return best[0], best[1], best[2], evals


def optimize_prices(
    strategy,
    params: ModelParams,
    spec: GridSpec | None = None,
    constraints: Mapping[str, float] | None = None,
) -> OracleResult:
    """Grid-search the profit-maximising prices of one strategy.

    ``constraints`` pins named prices (e.g. ``{"p_s": 0.0}``).  The returned
    ``resolution_bound`` bounds the gap to the true optimum over the searched
    box: sum over free axes of (final pitch) x (max units sold at that price).
    """
    strategy = Strategy.parse(strategy)
    spec = spec or GridSpec()
    fixed = {k: float(x) for k, x in (constraints or {}).items()}
    unknown = set(fixed) - set(PRICE_FIELDS[strategy])
    if unknown:
        raise ConstraintViolation(f"{strategy.value} has no price named {sorted(unknown)}")
    car = VEHICLE_FIELD[strategy]
    ads = [n for n in PRICE_FIELDS[strategy] if n != car and n not in fixed]
    units = MAX_UNITS[strategy]
    car_hi = _axis_bounds(car, True, params, spec)[1]

    bound = 0.0
    evals = 0
    best_ads = {}
    if ads:
        ads_bounds = [_axis_bounds(n, False, params, spec) for n in ads]

        def f_ads(*xs):
            pr = dict(fixed)
            pr.update(zip(ads, xs))
            pr.setdefault(car, car_hi)
            return profit_grid(strategy, params, **pr)

        point, _, pitch, e = _grid_maximise(f_ads, ads_bounds, spec, spec.starts)
        evals += e
        best_ads = dict(zip(ads, point))
        bound += sum(p * units[n] for n, p in zip(ads, pitch))

    if car not in fixed:
        car_bounds = [_axis_bounds(car, True, params, spec)]

        def f_car(x):
            pr = dict(fixed)
            pr.update(best_ads)
            return profit_grid(strategy, params, **pr, **{car: x})

        point, _, pitch, e = _grid_maximise(f_car, car_bounds, spec, 1)
        evals += e
        best_ads[car] = point[0]
        bound += pitch[0] * units[car]

    prices = dict(fixed)
    prices.update(best_ads)
    decision = PriceDecision(strategy, {n: float(prices[n]) for n in PRICE_FIELDS[strategy]})
    return OracleResult(decision, profit(strategy, params, decision), bound, evals)


@dataclass(frozen=True)
class RestrictedOptimum:
    bundle_price: float
    software_price: float
    best_profit: float
    resolution_bound: float


def optimize_restricted(
    params: ModelParams, software_mode: str = "perpetual", spec: GridSpec | None = None
) -> RestrictedOptimum:
    """Grid optimum of the market where the car sells above 2v.

    The bundle price ranges over (2v, 2v + (1 + gamma) q v]; at most one unit
    per consumer is sold, so each price axis contributes pitch x 2 (the
    subscription fee is paid up to twice) to the bound.
    """
    spec = spec or GridSpec(resolution=128)
    v = params.v
    lo = 2 * v * (1 + 1e-12)
    hi = 2 * v + _choke(params)
    bounds = [(lo, hi), (0.0, _choke(params))]

    def f(p_b, s):
        return restricted_profit_grid(params, p_b, s, software_mode)

    point, value, pitch, _ = _grid_maximise(f, bounds, spec, spec.starts)
    per_unit = 2.0 if software_mode == "subscription" else 1.0
    return RestrictedOptimum(point[0], point[1], value, pitch[0] + pitch[1] * per_unit)


# ---------------------------------------------------------------- Monte Carlo


# behaviour labels summed into each aggregate: (progressive, conservative)
_AGGREGATE_LABELS: dict[Strategy, dict[str, tuple[tuple[str, ...], tuple[str, ...]]]] = {
    Strategy.UP: {
        "software_stage1": (("PPH",), ()),
        "software_stage2": (("PDP",), ()),
        "software_perpetual": (("PPH", "PDP"), ()),
        "ssh_units": (("PPH", "PDP", "PDN"), ()),
    },
    Strategy.US: {
        "software_stage1": (("PSS", "PSN"), ()),
        "software_stage2": (("PSS", "PDS"), ()),
        "software_perpetual": ((), ()),
        "ssh_units": (("PSS", "PSN", "PDS", "PDN"), ()),
    },
    Strategy.BP: {
        "software_stage1": (("PH",), ()),
        "software_stage2": (("DP",), ("NP",)),
        "software_perpetual": (("PH", "DP"), ("NP",)),
    },
    Strategy.BS: {
        "software_stage1": (("SS", "SN"), ()),
        "software_stage2": (("SS", "DS"), ("NS",)),
        "software_perpetual": ((), ()),
    },
}


def binomial_se(freq, n: int):
    """Standard error of an empirical frequency over n independent draws."""
    f = np.asarray(freq, dtype=float)
    return np.sqrt(np.clip(f * (1 - f), 0.0, None) / n)


@dataclass(frozen=True)
class MCDemand:
    profile: DemandProfile
    se: Mapping[str, float]
    n: int


def _simulate_progressive(strategy, params, prices, theta, compatible):
    u = behavior_utilities(strategy, params, prices, theta)
    g, q, v = params.gamma, params.q, params.v
    top, delay, never = {
        Strategy.UP: ("PPH", "PDP", "NNN"),
        Strategy.US: ("PSS", "PDS", "NNN"),
        Strategy.BP: ("PH", "DP", "NN"),
        Strategy.BS: ("SS", "DS", "NN"),
    }[strategy]
    # ties go to the plan with more ADS use (first in this order)
    plan = np.argmax(np.stack([u[top], u[delay], u[never]]), axis=0)
    stage2_price = prices["r_s"] if strategy.subscription else prices["p_s"]
    keeps = compatible & (v * theta * g * q - stage2_price >= v)
    labels = PROGRESSIVE_LABELS[strategy]
    counts = dict.fromkeys(labels, 0)
    counts[never] = int(np.sum(plan == 2))
    if strategy.subscription:
        counts[labels[0]] = int(np.sum((plan == 0) & keeps))
        counts[labels[1]] = int(np.sum((plan == 0) & ~keeps))
    else:
        counts[top] = int(np.sum(plan == 0))
    delayers = plan == 1
    if strategy is Strategy.UP:
        counts["PDP"] = int(np.sum(delayers & keeps))
        counts["PDN"] = int(np.sum(delayers & ~keeps))
    else:
        buy = "DS" if strategy is Strategy.BS else ("PDS" if strategy is Strategy.US else "DP")
        skip = "PDN" if strategy is Strategy.US else "DN"
        counts[buy] = int(np.sum(delayers & keeps))
        counts[skip] = int(np.sum(delayers & ~keeps))
    return counts


def _simulate_conservative(strategy, params, prices, theta, compatible):
    if not strategy.bundled:
        return {"NNN": theta.size}
    price = prices["r_s"] if strategy.subscription else prices["p_s"]
    buys = compatible & (params.v * theta * params.gamma * params.q - price >= params.v)
    label = "NS" if strategy.subscription else "NP"
    return {label: int(np.sum(buys)), "NN": int(np.sum(~buys))}


def mc_demand(strategy, params: ModelParams, prices: PriceDecision, n: int = 100_000, seed: int = 0) -> MCDemand:
    """Simulate n progressive and n conservative consumers.

    Each consumer draws theta ~ U[0, 1] and a compatibility flag with
    probability alpha, picks the stage-1 plan with the highest two-stage
    utility, then re-decides in stage 2.  The SE map holds the binomial
    standard error of every behaviour frequency (keyed ``segment:label``) and
    of every aggregate.
    """
    strategy = Strategy.parse(strategy)
    if prices.strategy is not strategy:
        raise ConstraintViolation("prices belong to a different strategy")
    if n < 1:
        raise ConstraintViolation("n must be positive")
    rng = np.random.Generator(np.random.Philox(seed))
    theta_p, theta_c = rng.random(n), rng.random(n)
    compat_p, compat_c = rng.random(n) < params.alpha, rng.random(n) < params.alpha
    prog = {k: c / n for k, c in _simulate_progressive(strategy, params, prices, theta_p, compat_p).items()}
    cons_counts = _simulate_conservative(strategy, params, prices, theta_c, compat_c)
    cons = {k: cons_counts.get(k, 0) / n for k in CONSERVATIVE_LABELS[strategy]}

    se = {f"progressive:{k}": float(binomial_se(f, n)) for k, f in prog.items()}
    se.update({f"conservative:{k}": float(binomial_se(f, n)) for k, f in cons.items()})
    agg = {}
    for name, (pl, cl) in _AGGREGATE_LABELS[strategy].items():
        fp, fc = sum(prog[k] for k in pl), sum(cons[k] for k in cl)
        # subscribers who keep paying in both stages appear in both stage totals,
        # but within one stage total the cells are disjoint
        agg[name] = fp + fc
        se[name] = float(np.hypot(binomial_se(fp, n), binomial_se(fc, n)))
    if strategy.bundled:
        agg["ssh_units"], se["ssh_units"] = 2.0, 0.0
    agg["vehicle_units"], se["vehicle_units"] = 2.0, 0.0
    profile = DemandProfile(
        strategy=strategy,
        progressive=MappingProxyType(prog),
        conservative=MappingProxyType(cons),
        **agg,
    )
    return MCDemand(profile, MappingProxyType(se), n)


# ---------------------------------------------------------------- thresholds


@dataclass(frozen=True)
class ThresholdEstimate:
    """A switch point bracketed to within ``tol``.

    ``sign_lo``/``sign_hi`` are the signs of the compared quantity (first
    strategy's profit minus the second's, unless stated otherwise) at the
    final bracket ends.
    """

    name: str
    value: float
    bracket: tuple[float, float]
    sign_lo: int
    sign_hi: int
    tol: float

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "value": self.value,
            "bracket": list(self.bracket),
            "tol": self.tol,
            "sign_lo": self.sign_lo,
            "sign_hi": self.sign_hi,
        }


def bisect_predicate(pred: Callable[[float], bool], lo: float, hi: float, tol: float) -> tuple[float, float]:
    """Shrink [lo, hi] around the point where ``pred`` changes value.

    Requires pred(lo) != pred(hi); returns the final (lo, hi) with hi - lo <= tol.
    """
    at_lo = pred(lo)
    if at_lo == pred(hi):
        raise NoSignChange(f"predicate does not change on [{lo}, {hi}]", winner=at_lo)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if pred(mid) == at_lo:
            lo = mid
        else:
            hi = mid
    return lo, hi


def first_wins(
    comparison, params: ModelParams, eps: float = DEFAULT_EPS, strict: bool = False
) -> tuple[bool, float]:
    """Whether the first strategy of the pair wins, and the profit difference."""
    a, b = (Strategy.parse(s) for s in comparison)
    da = optimal_profit(a, params, eps, strict)
    db = optimal_profit(b, params, eps, strict)
    diff = da - db
    if abs(diff) <= 1e-12 * max(1.0, abs(da), abs(db)):
        return a < b, 0.0
    return diff > 0, diff


def _sign(x: float) -> int:
    return int(np.sign(x))


def find_threshold(
    comparison,
    params: ModelParams,
    axis: str,
    bracket: tuple[float, float],
    tol: float = 1e-6,
    eps: float = DEFAULT_EPS,
    strict: bool = False,
    name: str | None = None,
) -> ThresholdEstimate:
    """Bisect along ``axis`` for where the winner of ``comparison`` flips.

    Raises:
        NoSignChange: the same strategy wins at both bracket ends; its
            ``winner`` attribute names it.
    """
    a, b = (Strategy.parse(s) for s in comparison)
    if axis not in ("q", "gamma", "alpha"):
        raise ConstraintViolation("axis must be one of q, gamma, alpha")
    lo, hi = float(bracket[0]), float(bracket[1])
    if not lo < hi:
        raise ConstraintViolation("bracket must satisfy lo < hi")
    if not tol > 0:
        raise ConstraintViolation("tol must be positive")

    def at(x):
        return params.with_(**{axis: x})

    def pred(x):
        return first_wins((a, b), at(x), eps, strict)[0]

    try:
        lo, hi = bisect_predicate(pred, lo, hi, tol)
    except NoSignChange as exc:
        raise NoSignChange(
            f"{a.value} vs {b.value}: no switch on {axis} in [{lo}, {hi}]", winner=a if exc.winner else b
        ) from None
    d_lo = first_wins((a, b), at(lo), eps, strict)[1]
    d_hi = first_wins((a, b), at(hi), eps, strict)[1]
    return ThresholdEstimate(
        name=name or f"{a.value}/{b.value} switch in {axis}",
        value=0.5 * (lo + hi),
        bracket=(lo, hi),
        sign_lo=_sign(d_lo),
        sign_hi=_sign(d_hi),
        tol=tol,
    )


# ---------------------------------------------------------------- agreement


def sample_params(n: int, seed: int = 0, v: float = 1.0, c_v: float = 1.0) -> list[ModelParams]:
    """Uniform draws from q in (1, 5], alpha in [0.05, 0.95], t_h in [0, 0.5], gamma in (1 + t_h, 3.5]."""
    from adspricing.model import validate_params

    rng = np.random.Generator(np.random.Philox(seed))
    out = []
    for _ in range(n):
        u_q, u_a, u_t, u_g = rng.random(4)
        t_h = 0.5 * u_t
        q = 5.0 - 4.0 * u_q
        gamma = 3.5 - (2.5 - t_h) * u_g
        out.append(validate_params(q, gamma, 0.05 + 0.9 * u_a, v, c_v, t_h * v))
    return out


@dataclass(frozen=True)
class Agreement:
    """Closed-form profit against the grid optimum for one (strategy, params)."""

    strategy: Strategy
    params: ModelParams
    closed_form: float
    oracle: float
    resolution_bound: float
    excess_tol: float = 1e-6

    @property
    def ok(self) -> bool:
        below = self.closed_form >= self.oracle - self.resolution_bound - 1e-12
        above = self.closed_form <= self.oracle + self.excess_tol
        return below and above

    def as_dict(self) -> dict:
        return {
            "strategy": self.strategy.value,
            "params": self.params.as_dict(),
            "closed_form": self.closed_form,
            "oracle": self.oracle,
            "resolution_bound": self.resolution_bound,
            "ok": self.ok,
        }


def compare_with_oracle(params_list, spec: GridSpec | None = None, strategies=None) -> list[Agreement]:
    out = []
    for p in params_list:
        for s in strategies or tuple(Strategy):
            s = Strategy.parse(s)
            r = optimize_prices(s, p, spec)
            out.append(Agreement(s, p, optimal_profit(s, p), r.best_profit, r.resolution_bound))
    return out
