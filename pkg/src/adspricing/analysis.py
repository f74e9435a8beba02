"""Strategy comparison over the closed-form equilibria.

Profits are compared at the eps -> 0 limit of the eps-priced subscription
rows.  ``strict=True`` subtracts the eps loss bound from those rows instead,
so knife-edge ties go to perpetual licensing.  Remaining exact ties
(relative 1e-12) break in the order UP < US < BP < BS.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from adspricing.closed_form import DEFAULT_EPS, case_select, case_thresholds, optimal_profit
from adspricing.errors import ConstraintViolation, NoSignChange
from adspricing.model import ModelParams, Strategy
from adspricing.oracle import ThresholdEstimate, bisect_predicate, find_threshold, first_wins

DEFAULT_Q_GRID = np.linspace(1.0, 5.0, 82)[1:]
DEFAULT_ALPHA_GRID = np.linspace(0.05, 0.95, 19)
AXES = ("q", "alpha", "gamma")
ALL = tuple(Strategy)

_TIE_RTOL = 1e-12


def _tied(a: float, b: float) -> bool:
    return abs(a - b) <= _TIE_RTOL * max(1.0, abs(a), abs(b))


def _order(x: tuple[Strategy, float], y: tuple[Strategy, float]) -> int:
    if _tied(x[1], y[1]):
        return x[0].rank - y[0].rank
    return -1 if x[1] > y[1] else 1


def rank_strategies(
    params: ModelParams,
    eps: float = DEFAULT_EPS,
    strict: bool = False,
    strategies: Iterable | None = None,
) -> list[tuple[Strategy, float]]:
    """(strategy, equilibrium profit) pairs, best first."""
    chosen = [Strategy.parse(s) for s in (strategies or ALL)]
    scored = [(s, optimal_profit(s, params, eps, strict)) for s in chosen]
    return sorted(scored, key=functools.cmp_to_key(_order))


# ---------------------------------------------------------------- region maps


def _frozen(a) -> np.ndarray:
    a = np.asarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class RegionMap:
    """Winning strategy per cell of a two-parameter grid (axis1 rows, axis2 columns)."""

    axis1: str
    grid1: np.ndarray
    axis2: str
    grid2: np.ndarray
    strategies: tuple[Strategy, ...]
    winner: np.ndarray
    profit_winner: np.ndarray
    gap: np.ndarray
    cases: Mapping[Strategy, np.ndarray]

    @property
    def shape(self) -> tuple[int, int]:
        return self.winner.shape

    def rows(self) -> list[dict]:
        out = []
        for i, x in enumerate(self.grid1):
            for j, y in enumerate(self.grid2):
                w = self.winner[i, j]
                out.append(
                    {
                        self.axis1: float(x),
                        self.axis2: float(y),
                        "winner": w.value,
                        "profit_winner": float(self.profit_winner[i, j]),
                        "gap": float(self.gap[i, j]),
                        "case_winner": int(self.cases[w][i, j]),
                    }
                )
        return out

    def columns(self) -> tuple[str, ...]:
        return (self.axis1, self.axis2, "winner", "profit_winner", "gap", "case_winner")


def region_map(
    fixed: ModelParams,
    axis1: tuple[str, Sequence[float]] = ("q", DEFAULT_Q_GRID),
    axis2: tuple[str, Sequence[float]] = ("alpha", DEFAULT_ALPHA_GRID),
    strategies: Iterable | None = None,
    eps: float = DEFAULT_EPS,
    strict: bool = False,
) -> RegionMap:
    """Rank the chosen strategies (default all four) on every grid cell."""
    (n1, g1), (n2, g2) = axis1, axis2
    if n1 not in AXES or n2 not in AXES or n1 == n2:
        raise ConstraintViolation(f"axes must be two distinct names from {AXES}")
    chosen = tuple(Strategy.parse(s) for s in (strategies or ALL))
    if len(chosen) < 2:
        raise ConstraintViolation("compare at least two strategies")
    g1, g2 = np.asarray(g1, dtype=float), np.asarray(g2, dtype=float)
    shape = (g1.size, g2.size)
    winner = np.empty(shape, dtype=object)
    best = np.empty(shape)
    gap = np.empty(shape)
    cases = {s: np.empty(shape, dtype=int) for s in chosen}
    for i, x in enumerate(g1):
        for j, y in enumerate(g2):
            p = fixed.with_(**{n1: x, n2: y})
            ranked = rank_strategies(p, eps, strict, chosen)
            winner[i, j] = ranked[0][0]
            best[i, j] = ranked[0][1]
            gap[i, j] = max(0.0, ranked[0][1] - ranked[1][1])
            for s in chosen:
                cases[s][i, j] = case_select(s, p)
    return RegionMap(
        axis1=n1,
        grid1=_frozen(g1),
        axis2=n2,
        grid2=_frozen(g2),
        strategies=chosen,
        winner=_frozen(winner),
        profit_winner=_frozen(best),
        gap=_frozen(gap),
        cases={s: _frozen(c) for s, c in cases.items()},
    )


# ---------------------------------------------------------------- switch points


def _q_breakpoints(pair, params: ModelParams, lo: float, hi: float) -> list[float]:
    """Case boundaries in q of both strategies that fall inside (lo, hi]."""
    out = []
    for s in pair:
        for name, x in case_thresholds(s, params).items():
            if name.startswith("q") and np.isfinite(x) and lo < x <= hi:
                out.append(float(x))
    return out


def scan_points(pair, params: ModelParams, q_grid: Sequence[float]) -> np.ndarray:
    """q grid merged with the pair's case boundaries.

    Profit differences have kinks at case boundaries, and a winner band can be
    narrower than any practical grid pitch there.
    """
    q_grid = np.asarray(q_grid, dtype=float)
    extra = _q_breakpoints(pair, params, float(q_grid.min()), float(q_grid.max()))
    return np.unique(np.concatenate([q_grid, extra]))


def oscillation_scan(
    fixed: ModelParams,
    pair=(Strategy.US, Strategy.BS),
    q_grid: Sequence[float] = DEFAULT_Q_GRID,
    eps: float = DEFAULT_EPS,
    strict: bool = False,
    tol: float = 1e-9,
) -> list[ThresholdEstimate]:
    """Every q at which the winner of ``pair`` flips, in increasing order."""
    a, b = (Strategy.parse(s) for s in pair)
    points = scan_points((a, b), fixed, q_grid)
    wins = [first_wins((a, b), fixed.with_(q=q), eps, strict)[0] for q in points]
    out = []
    for k in range(len(points) - 1):
        if wins[k] != wins[k + 1]:
            est = find_threshold(
                (a, b),
                fixed,
                "q",
                (points[k], points[k + 1]),
                tol=tol,
                eps=eps,
                strict=strict,
                name=f"{a.value}/{b.value} switch in q at alpha={fixed.alpha:g}, gamma={fixed.gamma:g}",
            )
            out.append(est)
    return out


@dataclass(frozen=True)
class Dominance:
    """One strategy wins (weakly) over the whole searched range."""

    winner: Strategy
    loser: Strategy
    axis: str
    range: tuple[float, float]

    def as_dict(self) -> dict:
        return {"winner": self.winner.value, "loser": self.loser.value, "axis": self.axis, "range": list(self.range)}


def axis_domain(axis: str, fixed: ModelParams) -> tuple[float, float]:
    if axis == "q":
        return (1.0 + 1e-9, 5.0)
    if axis == "alpha":
        return (0.01, 0.99)
    if axis == "gamma":
        return (1.0 + fixed.t_h + 1e-9, 3.5)
    raise ConstraintViolation(f"axis must be one of {AXES}")


def dominance_frontier(
    pair,
    fixed: ModelParams,
    axis: str,
    bracket_hint: tuple[float, float] | None = None,
    points: int = 401,
    eps: float = DEFAULT_EPS,
    strict: bool = False,
    tol: float = 1e-6,
) -> ThresholdEstimate | Dominance:
    """First switch point of ``pair`` along ``axis``, or a dominance verdict."""
    a, b = (Strategy.parse(s) for s in pair)
    if bracket_hint is not None:
        try:
            return find_threshold((a, b), fixed, axis, bracket_hint, tol, eps, strict)
        except NoSignChange:
            pass
    lo, hi = axis_domain(axis, fixed)
    xs = np.linspace(lo, hi, points)
    if axis == "q":
        xs = np.unique(np.concatenate([xs, _q_breakpoints((a, b), fixed, lo, hi)]))
    wins = [first_wins((a, b), fixed.with_(**{axis: x}), eps, strict)[0] for x in xs]
    for k in range(len(xs) - 1):
        if wins[k] != wins[k + 1]:
            return find_threshold((a, b), fixed, axis, (xs[k], xs[k + 1]), tol, eps, strict)
    w = a if wins[0] else b
    return Dominance(w, b if w is a else a, axis, (float(lo), float(hi)))


# ---------------------------------------------------------------- propositions


def second_wins_somewhere(
    pair, params: ModelParams, q_grid=DEFAULT_Q_GRID, eps: float = DEFAULT_EPS, strict: bool = False
) -> bool:
    """Whether the second strategy strictly wins at any scan point in q."""
    return any(not first_wins(pair, params.with_(q=q), eps, strict)[0] for q in scan_points(pair, params, q_grid))


def _sup_threshold(name, pred, lo, hi, tol) -> ThresholdEstimate:
    lo, hi = bisect_predicate(pred, lo, hi, tol)
    # sign +1: first strategy dominates on the scan set; -1: the second wins somewhere
    return ThresholdEstimate(name, 0.5 * (lo + hi), (lo, hi), -1 if pred(lo) else 1, -1 if pred(hi) else 1, tol)


def alpha_threshold(
    pair, fixed: ModelParams, q_grid=DEFAULT_Q_GRID, bracket=(0.01, 0.99), tol: float = 1e-6, name=None, **kw
) -> ThresholdEstimate:
    """alpha at which the second strategy starts winning somewhere in q."""
    a, b = (Strategy.parse(s) for s in pair)

    def pred(x):
        return second_wins_somewhere((a, b), fixed.with_(alpha=x), q_grid, **kw)

    return _sup_threshold(name or f"alpha where {b.value} first beats {a.value}", pred, *bracket, tol)


def gamma_threshold(
    pair,
    fixed: ModelParams,
    q_grid=DEFAULT_Q_GRID,
    alpha_grid=DEFAULT_ALPHA_GRID,
    bracket: tuple[float, float] | None = None,
    tol: float = 1e-6,
    name=None,
    **kw,
) -> ThresholdEstimate:
    """gamma beyond which the first strategy wins every (q, alpha) cell."""
    a, b = (Strategy.parse(s) for s in pair)
    bracket = bracket or axis_domain("gamma", fixed)

    def pred(g):
        return any(second_wins_somewhere((a, b), fixed.with_(gamma=g, alpha=al), q_grid, **kw) for al in alpha_grid)

    return _sup_threshold(name or f"gamma beyond which {a.value} dominates {b.value}", pred, *bracket, tol)


def gamma_threshold_any_alpha(
    pair,
    fixed: ModelParams,
    q_grid=DEFAULT_Q_GRID,
    alpha_grid=DEFAULT_ALPHA_GRID,
    bracket: tuple[float, float] | None = None,
    tol: float = 1e-6,
    name=None,
    **kw,
) -> ThresholdEstimate:
    """gamma beyond which the first strategy wins every q for some alpha in the grid."""
    a, b = (Strategy.parse(s) for s in pair)
    bracket = bracket or axis_domain("gamma", fixed)

    def pred(g):
        return all(second_wins_somewhere((a, b), fixed.with_(gamma=g, alpha=al), q_grid, **kw) for al in alpha_grid)

    return _sup_threshold(name or f"gamma beyond which {a.value} dominates {b.value} for some alpha", pred, *bracket, tol)


def proposition_thresholds(
    fixed: ModelParams,
    band_alpha: float = 0.6,
    high_alpha: float = 0.9,
    wide_gamma: float = 2.5,
    q_grid=DEFAULT_Q_GRID,
    alpha_grid=DEFAULT_ALPHA_GRID,
    tol: float = 1e-6,
) -> dict[str, ThresholdEstimate | Dominance]:
    """Computed switch points of the pairwise comparisons.

    * alpha_U, alpha_B, alpha_S: alpha above which US beats UP, BS beats BP,
      BS beats US somewhere in q (at ``fixed.gamma``).
    * q1_U, q2_U: edges of the q band where US beats UP at ``band_alpha``.
    * q_B, q_P, q_S: BP/BS, UP/BP and US/BS switch in q at ``high_alpha``.
    * gamma_B: gamma beyond which BP beats BS on the whole (q, alpha) grid.
    * gamma_P: gamma beyond which BP beats UP for every q at some grid alpha.
    * alpha_P: alpha beyond which BP beats UP for every q at ``wide_gamma``.

    Comparisons without a switch in range come back as a :class:`Dominance`.
    """
    us_up = (Strategy.UP, Strategy.US)
    bp_bs = (Strategy.BP, Strategy.BS)
    up_bp = (Strategy.UP, Strategy.BP)
    us_bs = (Strategy.US, Strategy.BS)
    out: dict[str, ThresholdEstimate | Dominance] = {}

    def guard(key, pair, axis, fn):
        try:
            out[key] = fn()
        except NoSignChange as exc:
            # the predicate never flipped: either the second strategy wins somewhere everywhere, or nowhere
            first = pair[1] if exc.winner else pair[0]
            out[key] = Dominance(first, pair[0] if first is pair[1] else pair[1], axis, axis_domain(axis, fixed))

    g = fixed.gamma
    guard("alpha_U", us_up, "alpha", lambda: alpha_threshold(us_up, fixed, q_grid, tol=tol, name=f"alpha_U at gamma={g:g}"))
    guard("alpha_B", bp_bs, "alpha", lambda: alpha_threshold(bp_bs, fixed, q_grid, tol=tol, name=f"alpha_B at gamma={g:g}"))
    guard("alpha_S", us_bs, "alpha", lambda: alpha_threshold(us_bs, fixed, q_grid, tol=tol, name=f"alpha_S at gamma={g:g}"))

    # the band can open below the first grid point, so scan from the bottom of the domain
    band_grid = np.concatenate([[axis_domain("q", fixed)[0]], q_grid])
    band = oscillation_scan(fixed.with_(alpha=band_alpha), us_up, band_grid, tol=tol)
    for key, est in zip(("q1_U", "q2_U"), band):
        out[key] = _renamed(est, f"{key} at alpha={band_alpha:g}, gamma={g:g}")

    high = fixed.with_(alpha=high_alpha)
    for key, pair in (("q_B", bp_bs), ("q_P", up_bp), ("q_S", us_bs)):
        res = dominance_frontier(pair, high, "q", tol=tol)
        out[key] = _renamed(res, f"{key} at alpha={high_alpha:g}, gamma={g:g}") if isinstance(res, ThresholdEstimate) else res

    guard("gamma_B", bp_bs, "gamma", lambda: gamma_threshold(bp_bs, fixed, q_grid, alpha_grid, tol=tol, name="gamma_B"))
    guard("gamma_P", up_bp, "gamma", lambda: gamma_threshold_any_alpha(up_bp, fixed, q_grid, alpha_grid, tol=tol, name="gamma_P"))
    wide = fixed.with_(gamma=wide_gamma)
    guard(
        "alpha_P",
        (Strategy.BP, Strategy.UP),
        "alpha",
        lambda: alpha_threshold(
            (Strategy.BP, Strategy.UP),
            wide,
            q_grid,
            tol=tol,
            name=f"alpha_P at gamma={wide_gamma:g}",
        ),
    )
    return out


def _renamed(est: ThresholdEstimate, name: str) -> ThresholdEstimate:
    return ThresholdEstimate(name, est.value, est.bracket, est.sign_lo, est.sign_hi, est.tol)
