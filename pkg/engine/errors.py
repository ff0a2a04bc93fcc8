"""Exception hierarchy shared by the engine, the harness and the CLI.

Every error carries the process exit code the CLI reports for it.
"""

from __future__ import annotations

from typing import Any


class HDLogitError(Exception):
    """Base class for all domain errors."""

    exit_code: int = 1


class InvalidParameterError(HDLogitError, ValueError):
    """An argument lies outside its documented domain."""

    exit_code = 2


class ConfigurationError(HDLogitError, ValueError):
    """An experiment config or numerical setting is unusable."""

    exit_code = 2


class DatasetError(HDLogitError, ValueError):
    """A CSV dataset failed parsing or validation."""

    exit_code = 2


class SeparabilityIndeterminateError(HDLogitError):
    """The separability LP stopped without a feasible/infeasible verdict."""


class NonConvergenceError(HDLogitError):
    """A likelihood fit did not converge; ``fit`` holds the diagnostics."""

    def __init__(self, message: str, fit: Any = None):
        super().__init__(message)
        self.fit = fit


class SeparableDataError(HDLogitError):
    """Cases and controls are linearly separable, so the MLE does not exist."""

    exit_code = 3


class FixedPointError(HDLogitError):
    """The (alpha, sigma, lambda) system could not be solved."""


class OutOfRegionError(HDLogitError):
    """(kappa, gamma) lies on or above the MLE existence frontier."""


class FrontierError(HDLogitError):
    """Frontier construction or evaluation failed."""


class ProbeGridError(HDLogitError):
    """The separability fraction never crossed the target on the probe grid."""

    exit_code = 4


class RankDeficientError(HDLogitError):
    """A regression design is (numerically) rank deficient."""
