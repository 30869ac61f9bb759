"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class SelfSimilarError(ValueError):
    """Base class for all errors raised by :mod:`sscoupling`."""


class OutOfRange(SelfSimilarError):
    """A raw parameter lies outside its admissible range."""

    def __init__(self, parameter: str, message: str = ""):
        self.parameter = parameter
        super().__init__(f"{parameter}: {message}" if message else parameter)


class OutOfRegion(SelfSimilarError):
    """A coupling parameter r lies outside the closed region [lo, hi]."""


class ResourceLimit(SelfSimilarError):
    """A discretization would exceed the configured atom budget."""


class PoleEvaluation(SelfSimilarError):
    """A rational formula was evaluated at its pole."""


class DomainError(SelfSimilarError):
    """A square root of a negative radicand was requested."""


class NotNormalized(SelfSimilarError):
    """A discrete measure or coupling does not carry unit mass."""


class DegenerateInput(SelfSimilarError):
    """The requested quantity is undefined for these inputs (e.g. p == q)."""


class DegenerateSystem(SelfSimilarError):
    """A general IFS yields a non-positive denominator."""
