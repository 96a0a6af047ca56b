from __future__ import annotations

from typing import Optional

__all__ = (
    "PhaseLabError",
    "DomainError",
    "NoOscillationError",
    "DegenerateKernelError",
    "ExperimentPreconditionError",
    "NoPeakFound",
    "ResourceGuardError",
    "ConfigError",
)


class PhaseLabError(Exception):
    """Base error class for phaselab-related errors."""


class DomainError(PhaseLabError, ValueError):
    """Raised when an input lies outside the domain of an operation.

    Non-finite angles, an invalid ``(N, M)`` pair, an empty or full
    marked set and malformed scan grids all end up here.
    """


class NoOscillationError(DomainError):
    """Raised when a peak iteration is requested for a kernel that has none.

    This happens for phase sets violating the matching condition and for
    degenerate kernels, whose probability never oscillates.
    """


class DegenerateKernelError(DomainError):
    """Raised by operations that need two distinct eigenvalues."""


class ExperimentPreconditionError(DomainError):
    """Raised when an experiment is given phases it is not defined for."""


class NoPeakFound(PhaseLabError):
    """Raised when a sweep has no interior local maximum.

    Attributes
    ----------
    flat : bool
        `True` if the series never rises at all, as opposed to rising
        monotonically without turning over inside the sweep range.
    """

    def __init__(self, message: str, *, flat: bool) -> None:
        super().__init__(message)
        self.flat = flat


class ResourceGuardError(PhaseLabError):
    """Raised when a run would exceed one of the size guards.

    Attributes
    ----------
    limit : int
        The guard that was hit.
    """

    def __init__(self, message: str, limit: Optional[int] = None) -> None:
        super().__init__(message)
        self.limit = limit


class ConfigError(PhaseLabError):
    """Error while reading, validating or writing a run configuration."""
