"""Command-line front end.

Every option can come from a JSON config file (``--config``); flags override
the config, which overrides the built-in defaults.  Exit status: 0 on
success, 2 on bad input, 3 when ``validate`` finds a counterexample.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

import numpy as np

from adspricing import analysis
from adspricing.closed_form import equilibrium
from adspricing.demand import demand_profile
from adspricing.errors import ADSPricingError, ConfigParse, IoFailure
from adspricing.model import PriceDecision, Strategy, validate_params
from adspricing.oracle import GridSpec, compare_with_oracle, find_threshold, mc_demand, sample_params
from adspricing.output import emit

COMMANDS = ("equilibrium", "regions", "thresholds", "validate", "simulate", "oscillation")
PARAM_NAMES = ("q", "alpha", "gamma", "v", "c_v", "c_h")

DEFAULTS = {
    "q": 2.0,
    "alpha": 0.6,
    "gamma": 1.3,
    "v": 1.0,
    "c_v": 1.0,
    "c_h": 0.1,
    "epsilon": 1e-6,
    "seed": 0,
    "strict": False,
    "out": None,
    "strategy": None,
    "pair": None,
    "axis": "q",
    "axis1": "q",
    "axis2": "alpha",
    "bracket": None,
    "tol": 1e-6,
    "samples": 200,
    "n": 100_000,
    "prices": None,
    "resolution": 256,
    "rounds": 3,
    "q_grid": None,
    "alpha_grid": None,
    "gamma_grid": None,
}
DEFAULT_FORMAT = {"regions": "csv", "oscillation": "csv"}

EXIT_OK, EXIT_INPUT, EXIT_COUNTEREXAMPLE, EXIT_IO = 0, 2, 3, 1


# ---------------------------------------------------------------- parsing


def _grid(text) -> np.ndarray:
    """``LO:HI:N`` for N evenly spaced points, or a comma list of values."""
    if isinstance(text, (list, tuple)):
        return np.asarray(text, dtype=float)
    text = str(text)
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigParse(f"grid {text!r} must look like LO:HI:N")
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
        if n < 1:
            raise ConfigParse("grid needs at least one point")
        return np.linspace(lo, hi, n)
    return np.asarray([float(x) for x in text.split(",") if x.strip()], dtype=float)


def _pair(text) -> tuple[Strategy, Strategy]:
    items = text if isinstance(text, (list, tuple)) else str(text).split(",")
    if len(items) != 2:
        raise ConfigParse(f"pair {text!r} must name two strategies, e.g. BP,BS")
    a, b = (Strategy.parse(s) for s in items)
    if a is b:
        raise ConfigParse("pair must name two different strategies")
    return a, b


def _bracket(text) -> tuple[float, float]:
    items = text if isinstance(text, (list, tuple)) else str(text).split(",")
    if len(items) != 2:
        raise ConfigParse(f"bracket {text!r} must be LO,HI")
    return float(items[0]), float(items[1])


def _prices(text) -> dict[str, float]:
    if isinstance(text, dict):
        return {k: float(v) for k, v in text.items()}
    out = {}
    for item in str(text).split(","):
        name, _, value = item.partition("=")
        if not value:
            raise ConfigParse(f"price {item!r} must be NAME=VALUE")
        out[name.strip()] = float(value)
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--seed", type=int)
    common.add_argument("--epsilon", type=float, help="subscription price used in eps-limit rows")
    common.add_argument("--strict", action="store_const", const=True, help="break eps-limit ties against subscriptions")
    for name in PARAM_NAMES:
        common.add_argument(f"--{name.replace('_', '-')}", dest=name, type=float)

    parser = argparse.ArgumentParser(prog="adspricing", description="ADS pricing strategy equilibria and comparisons")
    parser.add_argument("--config", dest="top_config", help="JSON run configuration naming its command")
    sub = parser.add_subparsers(dest="command")
    eq = sub.add_parser("equilibrium", parents=[common], help="optimal prices and profit per strategy")
    eq.add_argument("--strategy")

    reg = sub.add_parser("regions", parents=[common], help="winning strategy over a parameter grid")
    reg.add_argument("--pair")
    reg.add_argument("--axis1", choices=analysis.AXES)
    reg.add_argument("--axis2", choices=analysis.AXES)

    thr = sub.add_parser("thresholds", parents=[common], help="switch points between strategies")
    thr.add_argument("--pair")
    thr.add_argument("--axis", choices=analysis.AXES)
    thr.add_argument("--bracket")
    thr.add_argument("--tol", type=float)

    val = sub.add_parser("validate", parents=[common], help="closed form against the grid oracle")
    val.add_argument("--samples", type=int)
    val.add_argument("--resolution", type=int)
    val.add_argument("--rounds", type=int)

    sim = sub.add_parser("simulate", parents=[common], help="Monte Carlo demand at given prices")
    sim.add_argument("--strategy")
    sim.add_argument("--n", type=int)
    sim.add_argument("--prices", help="NAME=VALUE,... (default: equilibrium prices)")

    osc = sub.add_parser("oscillation", parents=[common], help="US/BS switch points along q")
    osc.add_argument("--pair")
    osc.add_argument("--tol", type=float)

    for p in (reg, osc, thr):
        p.add_argument("--q-grid", dest="q_grid", help="LO:HI:N or comma list")
        p.add_argument("--alpha-grid", dest="alpha_grid", help="LO:HI:N or comma list")
    reg.add_argument("--gamma-grid", dest="gamma_grid", help="LO:HI:N or comma list")
    return parser


def load_config(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigParse(f"cannot read config {path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigParse(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigParse("config must be a JSON object")
    unknown = set(doc) - {"command", "params", "options"}
    if unknown:
        raise ConfigParse(f"unknown config keys {sorted(unknown)}")
    for key in ("params", "options"):
        if not isinstance(doc.get(key, {}), dict):
            raise ConfigParse(f"config '{key}' must be an object")
    bad = set(doc.get("params", {})) - set(PARAM_NAMES)
    if bad:
        raise ConfigParse(f"unknown params {sorted(bad)}")
    return doc


def resolve(args: argparse.Namespace) -> tuple[str, dict]:
    """Merge defaults, config and flags (flags win)."""
    path = getattr(args, "config", None) or getattr(args, "top_config", None)
    cfg = load_config(path) if path else {}
    command = args.command or cfg.get("command")
    if command not in COMMANDS:
        raise ConfigParse(f"command must be one of {COMMANDS}")
    if args.command and cfg.get("command") not in (None, args.command):
        raise ConfigParse(f"config is for '{cfg['command']}', not '{args.command}'")
    opts = dict(DEFAULTS)
    opts["format"] = DEFAULT_FORMAT.get(command, "json")
    opts.update(cfg.get("params", {}))
    for key, value in cfg.get("options", {}).items():
        key = key.replace("-", "_")
        if key not in opts:
            raise ConfigParse(f"unknown option '{key}'")
        opts[key] = value
    for key, value in vars(args).items():
        if key not in ("command", "config", "top_config") and value is not None:
            opts[key] = value
    return command, opts


def _params(opts, **changes):
    raw = {k: opts[k] for k in PARAM_NAMES}
    raw.update(changes)
    return validate_params(**raw)


# ---------------------------------------------------------------- commands


def cmd_equilibrium(opts):
    p = _params(opts)
    chosen = [Strategy.parse(opts["strategy"])] if opts["strategy"] else list(Strategy)
    results = [equilibrium(s, p, opts["epsilon"]) for s in chosen]
    ranking = analysis.rank_strategies(p, opts["epsilon"], opts["strict"], chosen)
    doc = {
        "params": p.as_dict(),
        "results": results,
        "ranking": [{"strategy": s.value, "profit": pi} for s, pi in ranking],
        "winner": ranking[0][0].value,
    }
    rows = [
        {"strategy": r.strategy.value, "case_id": r.case_id, "profit": r.profit, "epsilon_limit": r.epsilon_limit, **r.prices.as_dict()}
        for r in results
    ]
    cols = ("strategy", "case_id", "profit", "epsilon_limit", "p_v", "p_h", "p_s", "p_b", "r_s")
    return doc, rows, cols


def _axis_grid(opts, axis):
    text = opts[f"{axis}_grid"]
    if text is not None:
        return _grid(text)
    if axis == "q":
        return analysis.DEFAULT_Q_GRID
    if axis == "alpha":
        return analysis.DEFAULT_ALPHA_GRID
    lo = 1 + opts["c_h"] / opts["v"]
    return np.linspace(lo, 3.5, 41)[1:]


def cmd_regions(opts):
    p = _params(opts)
    strategies = _pair(opts["pair"]) if opts["pair"] else None
    a1, a2 = opts["axis1"], opts["axis2"]
    rm = analysis.region_map(
        p, (a1, _axis_grid(opts, a1)), (a2, _axis_grid(opts, a2)), strategies, opts["epsilon"], opts["strict"]
    )
    rows = rm.rows()
    return {"axis1": a1, "axis2": a2, "strategies": rm.strategies, "cells": rows}, rows, rm.columns()


def _threshold_row(key, res):
    if isinstance(res, analysis.Dominance):
        return {"key": key, "kind": "dominance", "name": key, "winner": res.winner.value, "lo": res.range[0], "hi": res.range[1]}
    return {
        "key": key,
        "kind": "threshold",
        "name": res.name,
        "value": res.value,
        "lo": res.bracket[0],
        "hi": res.bracket[1],
        "tol": res.tol,
    }


def cmd_thresholds(opts):
    p = _params(opts)
    if opts["pair"]:
        pair = _pair(opts["pair"])
        if opts["bracket"]:
            res = find_threshold(pair, p, opts["axis"], _bracket(opts["bracket"]), opts["tol"], opts["epsilon"], opts["strict"])
        else:
            res = analysis.dominance_frontier(pair, p, opts["axis"], eps=opts["epsilon"], strict=opts["strict"], tol=opts["tol"])
        found = {f"{pair[0].value}/{pair[1].value}": res}
    else:
        kw = {"tol": opts["tol"]}
        if opts["q_grid"] is not None:
            kw["q_grid"] = _grid(opts["q_grid"])
        if opts["alpha_grid"] is not None:
            kw["alpha_grid"] = _grid(opts["alpha_grid"])
        found = analysis.proposition_thresholds(p, **kw)
    rows = [_threshold_row(k, r) for k, r in found.items()]
    return found, rows, ("key", "kind", "name", "value", "lo", "hi", "tol", "winner")


def cmd_validate(opts):
    params = sample_params(opts["samples"], opts["seed"], opts["v"], opts["c_v"])
    spec = GridSpec(resolution=opts["resolution"], refinement_rounds=opts["rounds"])
    checks = compare_with_oracle(params, spec)
    bad = [c for c in checks if not c.ok]
    doc = {
        "samples": len(params),
        "checks": len(checks),
        "max_abs_difference": max(abs(c.closed_form - c.oracle) for c in checks),
        "max_resolution_bound": max(c.resolution_bound for c in checks),
        "max_excess_over_oracle": max(c.closed_form - c.oracle for c in checks),
        "counterexamples": bad,
    }
    rows = [
        {
            "strategy": c.strategy.value,
            **{k: getattr(c.params, k) for k in ("q", "alpha", "gamma", "t_h")},
            "closed_form": c.closed_form,
            "oracle": c.oracle,
            "resolution_bound": c.resolution_bound,
            "ok": c.ok,
        }
        for c in checks
    ]
    cols = ("strategy", "q", "alpha", "gamma", "t_h", "closed_form", "oracle", "resolution_bound", "ok")
    return doc, rows, cols, bool(bad)


def cmd_simulate(opts):
    p = _params(opts)
    s = Strategy.parse(opts["strategy"] or "UP")
    if opts["prices"]:
        prices = PriceDecision(s, _prices(opts["prices"]))
    else:
        prices = equilibrium(s, p, opts["epsilon"]).prices
    analytic = demand_profile(s, p, prices)
    mc = mc_demand(s, p, prices, opts["n"], opts["seed"])
    rows = []
    for segment in ("progressive", "conservative"):
        for label, mass in getattr(analytic, segment).items():
            f = getattr(mc.profile, segment)[label]
            se = mc.se[f"{segment}:{label}"]
            rows.append({"segment": segment, "label": label, "analytic": mass, "simulated": f, "se": se})
    for name in ("software_stage1", "software_stage2", "software_perpetual", "ssh_units", "vehicle_units"):
        rows.append(
            {"segment": "aggregate", "label": name, "analytic": getattr(analytic, name), "simulated": getattr(mc.profile, name), "se": mc.se[name]}
        )
    doc = {"strategy": s.value, "params": p.as_dict(), "prices": prices, "n": mc.n, "seed": opts["seed"], "rows": rows}
    return doc, rows, ("segment", "label", "analytic", "simulated", "se")


def cmd_oscillation(opts):
    pair = _pair(opts["pair"] or "US,BS")
    q_grid = _axis_grid(opts, "q")
    alphas = _grid(opts["alpha_grid"]) if opts["alpha_grid"] is not None else np.asarray([opts["alpha"]])
    rows, lines = [], []
    for a in alphas:
        p = _params(opts, alpha=float(a))
        found = analysis.oscillation_scan(p, pair, q_grid, opts["epsilon"], opts["strict"], opts["tol"])
        lines.append({"alpha": float(a), "switches": found})
        rows += [{"alpha": float(a), "index": i, "q": e.value, "lo": e.bracket[0], "hi": e.bracket[1]} for i, e in enumerate(found)]
    doc = {"pair": pair, "gamma": opts["gamma"], "lines": lines}
    return doc, rows, ("alpha", "index", "q", "lo", "hi")


def run(command: str, opts: dict) -> int:
    """Dispatch one command and write its output; returns the exit status."""
    counterexample = False
    if command == "validate":
        doc, rows, cols, counterexample = cmd_validate(opts)
    else:
        doc, rows, cols = {
            "equilibrium": cmd_equilibrium,
            "regions": cmd_regions,
            "thresholds": cmd_thresholds,
            "simulate": cmd_simulate,
            "oscillation": cmd_oscillation,
        }[command](opts)
    emit(doc, opts["format"], opts["out"], rows=rows, columns=cols)
    return EXIT_COUNTEREXAMPLE if counterexample else EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        command, opts = resolve(args)
        return run(command, opts)
    except IoFailure as exc:
        print(f"adspricing: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ADSPricingError, ValueError, KeyError) as exc:
        print(f"adspricing: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
