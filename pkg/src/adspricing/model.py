"""Market primitives, strategy tags and price vectors.

Everything here is immutable.  Parameters are validated once, by
:func:`validate_params`; the rest of the package trusts a ``ModelParams``
instance without re-checking it.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from types import MappingProxyType
from typing import Mapping

from adspricing.errors import ConstraintViolation, NonFinite, StrategyMismatch


class Strategy(enum.Enum):
    """SSH bundling (U/B) crossed with software licensing (P/S).

    Declaration order is the canonical tie-break order.
    """

    UP = "UP"
    US = "US"
    BP = "BP"
    BS = "BS"

    @property
    def rank(self) -> int:
        return _ORDER[self]

    @property
    def bundled(self) -> bool:
        return self in (Strategy.BP, Strategy.BS)

    @property
    def subscription(self) -> bool:
        return self in (Strategy.US, Strategy.BS)

    def __lt__(self, other):
        if not isinstance(other, Strategy):
            return NotImplemented
        return self.rank < other.rank

    @classmethod
    def parse(cls, tag) -> "Strategy":
        if isinstance(tag, Strategy):
            return tag
        try:
            return cls(str(tag).strip().upper())
        except ValueError:
            raise ValueError(f"unknown strategy {tag!r}; expected one of UP, US, BP, BS") from None


_ORDER = {s: i for i, s in enumerate(Strategy)}

PRICE_FIELDS: dict[Strategy, tuple[str, ...]] = {
    Strategy.UP: ("p_v", "p_h", "p_s"),
    Strategy.US: ("p_v", "p_h", "r_s"),
    Strategy.BP: ("p_b", "p_s"),
    Strategy.BS: ("p_b", "r_s"),
}

# price that every consumer pays for the car itself (vehicle or bundle)
VEHICLE_FIELD: dict[Strategy, str] = {
    Strategy.UP: "p_v",
    Strategy.US: "p_v",
    Strategy.BP: "p_b",
    Strategy.BS: "p_b",
}


@dataclass(frozen=True)
class ModelParams:
    """Market primitives plus the two derived quantities.

    Attributes:
        q: stage-1 ADS reliability multiplier, > 1.
        gamma: stage-2 upgrade multiplier.
        alpha: probability a consumer finds ADS compatible after stage 1.
        v: per-stage utility of the bare vehicle.
        c_v: unit cost of the vehicle structure.
        c_h: unit cost of the software-supporting hardware (SSH).
        t_h: c_h / v.
        c: c_v + c_h.
    """

    q: float
    gamma: float
    alpha: float
    v: float
    c_v: float
    c_h: float
    t_h: float
    c: float

    def with_(self, **changes) -> "ModelParams":
        """Re-validated copy with some primitives replaced."""
        raw = {k: getattr(self, k) for k in ("q", "gamma", "alpha", "v", "c_v", "c_h")}
        strict = changes.pop("strict_gamma", True)
        raw.update(changes)
        return validate_params(**raw, strict_gamma=strict)

    def as_dict(self) -> dict[str, float]:
        return {
            "q": self.q,
            "gamma": self.gamma,
            "alpha": self.alpha,
            "v": self.v,
            "c_v": self.c_v,
            "c_h": self.c_h,
            "t_h": self.t_h,
            "c": self.c,
        }


def validate_params(
    q: float,
    gamma: float,
    alpha: float,
    v: float = 1.0,
    c_v: float = 1.0,
    c_h: float = 0.1,
    *,
    strict_gamma: bool = True,
) -> ModelParams:
    """Check the market primitives and build a :class:`ModelParams`.

    ``strict_gamma=False`` drops the ``gamma > 1 + c_h/v`` requirement so the
    no-adoption regime (``gamma <= 1 + t_h``) can be studied; every other bound
    is always enforced.

    Raises:
        NonFinite: any input is NaN or infinite.
        ConstraintViolation: a bound is violated; the message names it.
    """
    raw = {"q": q, "gamma": gamma, "alpha": alpha, "v": v, "c_v": c_v, "c_h": c_h}
    vals = {}
    for name, x in raw.items():
        try:
            x = float(x)
        except (TypeError, ValueError):
            raise NonFinite(f"{name} must be a finite number, got {raw[name]!r}") from None
        if not math.isfinite(x):
            raise NonFinite(f"{name} must be finite, got {x!r}")
        vals[name] = x
    q, gamma, alpha = vals["q"], vals["gamma"], vals["alpha"]
    v, c_v, c_h = vals["v"], vals["c_v"], vals["c_h"]

    if v <= 0:
        raise ConstraintViolation("v must be positive")
    if q <= 1:
        raise ConstraintViolation("q must exceed 1")
    if not 0 < alpha < 1:
        raise ConstraintViolation("alpha must lie strictly between 0 and 1")
    if not 0 < c_v < 2 * v:
        raise ConstraintViolation("c_v must lie strictly between 0 and 2v")
    if c_h < 0:
        raise ConstraintViolation("c_h must be non-negative")
    t_h = c_h / v
    if gamma <= 1:
        raise ConstraintViolation("gamma must exceed 1")
    if strict_gamma and gamma <= 1 + t_h:
        raise ConstraintViolation("gamma must exceed 1 + c_h/v")
    return ModelParams(q=q, gamma=gamma, alpha=alpha, v=v, c_v=c_v, c_h=c_h, t_h=t_h, c=c_v + c_h)


def scale_params(params: ModelParams, lam: float) -> ModelParams:
    """Rescale the utility unit: v, c_v, c_h (and c) are multiplied by ``lam``.

    q, gamma, alpha and t_h are carried over untouched, so downstream
    profits scale by exactly ``lam``.
    """
    lam = float(lam)
    if not math.isfinite(lam):
        raise NonFinite("scale factor must be finite")
    if lam <= 0:
        raise ConstraintViolation("scale factor must be positive")
    return replace(
        params,
        v=params.v * lam,
        c_v=params.c_v * lam,
        c_h=params.c_h * lam,
        c=params.c * lam,
    )


@dataclass(frozen=True)
class PriceDecision:
    """Strategy-tagged price vector; the field set must match the tag."""

    strategy: Strategy
    prices: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        strategy = Strategy.parse(self.strategy)
        object.__setattr__(self, "strategy", strategy)
        expected = PRICE_FIELDS[strategy]
        got = dict(self.prices)
        if set(got) != set(expected):
            raise StrategyMismatch(
                f"{strategy.value} prices need fields {expected}, got {tuple(sorted(got))}"
            )
        clean = {}
        for name in expected:
            x = float(got[name])
            if not math.isfinite(x):
                raise NonFinite(f"price {name} must be finite")
            if x < 0:
                raise ConstraintViolation(f"price {name} must be non-negative")
            clean[name] = x
        object.__setattr__(self, "prices", MappingProxyType(clean))

    @classmethod
    def of(cls, strategy, **prices) -> "PriceDecision":
        return cls(Strategy.parse(strategy), prices)

    def __getitem__(self, name: str) -> float:
        return self.prices[name]

    @property
    def vehicle_price(self) -> float:
        return self.prices[VEHICLE_FIELD[self.strategy]]

    def as_dict(self) -> dict[str, float]:
        return dict(self.prices)

    def __reduce__(self):
        return (PriceDecision, (self.strategy, dict(self.prices)))
