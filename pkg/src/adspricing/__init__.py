"""Equilibrium pricing of autonomous-driving software sold with or without its hardware.

A manufacturer sells a car over two stages to progressive and conservative
consumers and chooses between bundling the software-supporting hardware (SSH)
with the car or selling it separately (U/B), and between perpetual licences and
subscriptions for the software (P/S).
"""

from adspricing.analysis import (
    Dominance,
    RegionMap,
    dominance_frontier,
    oscillation_scan,
    proposition_thresholds,
    rank_strategies,
    region_map,
)
from adspricing.closed_form import EquilibriumResult, case_select, equilibrium
from adspricing.demand import (
    Behavior,
    DemandProfile,
    behavior_utilities,
    demand_profile,
    indifference_points,
    profit,
    restricted_demand_profit,
)
from adspricing.errors import (
    ADSPricingError,
    BudgetExceeded,
    ConfigParse,
    ConstraintViolation,
    Degenerate,
    IoFailure,
    NoSignChange,
    NonFinite,
    RestrictedPricing,
    StrategyMismatch,
)
from adspricing.lemmas import LemmaReport, lemma_checks
from adspricing.model import ModelParams, PriceDecision, Strategy, scale_params, validate_params
from adspricing.oracle import (
    GridSpec,
    OracleResult,
    ThresholdEstimate,
    find_threshold,
    mc_demand,
    optimize_prices,
    optimize_restricted,
)
from adspricing.output import emit

__all__ = [
    "ADSPricingError",
    "Behavior",
    "BudgetExceeded",
    "ConfigParse",
    "ConstraintViolation",
    "Degenerate",
    "DemandProfile",
    "Dominance",
    "EquilibriumResult",
    "GridSpec",
    "IoFailure",
    "LemmaReport",
    "ModelParams",
    "NoSignChange",
    "NonFinite",
    "OracleResult",
    "PriceDecision",
    "RegionMap",
    "RestrictedPricing",
    "Strategy",
    "StrategyMismatch",
    "ThresholdEstimate",
    "behavior_utilities",
    "case_select",
    "demand_profile",
    "dominance_frontier",
    "emit",
    "equilibrium",
    "find_threshold",
    "indifference_points",
    "lemma_checks",
    "mc_demand",
    "optimize_prices",
    "optimize_restricted",
    "oscillation_scan",
    "profit",
    "proposition_thresholds",
    "rank_strategies",
    "region_map",
    "restricted_demand_profit",
    "scale_params",
    "validate_params",
]
