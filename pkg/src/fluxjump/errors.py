"""Error taxonomy shared across the package.

Each class marks a distinct failure mode so callers (and the command-line
driver) can map failures to stable exit codes without string matching.
"""
from __future__ import annotations


class ParameterError(ValueError):
    """An argument is outside its documented range (bad exponent, CFL, window)."""


class DomainError(ValueError):
    """A value lies below the reachable range of an increasing/decreasing branch."""


class RangeError(ValueError):
    """A value lies beyond the configured bound of a flux branch."""


class SizeError(ValueError):
    """An input is too large for an intentionally exhaustive reference path."""


class HypothesisViolationError(ValueError):
    """The flux pair fails a structural hypothesis (e.g. equal minima)."""


class ConstructionError(RuntimeError):
    """A numerical construction failed (no bracket, inconsistent geometry)."""


class InfeasibilityError(ConstructionError):
    """A recursively built sequence left its admissible region.

    Attributes:
        failing_index: first index at which the recursion became inadmissible.
    """

    def __init__(self, message: str, failing_index: int):
        super().__init__(message)
        self.failing_index = failing_index


class UndefinedExponentError(ValueError):
    """A scaling-exponent estimate is undefined (e.g. constant map)."""


class StabilityError(RuntimeError):
    """A time step violates the stability restriction of the scheme."""
