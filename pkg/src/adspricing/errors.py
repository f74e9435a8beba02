"""Exception types raised across the package."""


class ADSPricingError(Exception):
    """Base class for every error raised by adspricing."""


class ConstraintViolation(ADSPricingError, ValueError):
    """A model parameter or price lies outside its admissible range."""


class NonFinite(ADSPricingError, ValueError):
    """An input was NaN or infinite."""


class StrategyMismatch(ADSPricingError, ValueError):
    """A price vector was supplied for a different strategy."""


class RestrictedPricing(ADSPricingError, ValueError):
    """Vehicle or bundle price above 2v; use the restricted-market model."""


class Degenerate(ADSPricingError, ArithmeticError):
    """A case threshold hit a pole of its closed form."""


class BudgetExceeded(ADSPricingError, RuntimeError):
    """A grid search would evaluate more cells than allowed."""


class NoSignChange(ADSPricingError, ValueError):
    """The bracket handed to a threshold search does not straddle a switch."""

    def __init__(self, message, winner=None):
        super().__init__(message)
        self.winner = winner


class ConfigParse(ADSPricingError, ValueError):
    """A run configuration could not be parsed."""


class IoFailure(ADSPricingError, OSError):
    """Writing an output file failed."""
