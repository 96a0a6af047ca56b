from .. import __version__, version_info, VersionInfo
from .analysis import Engine, FigurePreset, SweepSeries
from .config import RunConfig
from .kernel import EigenSystem, Kernel2, PhaseSet, ProblemSpec, ReducedState

__all__ = [
    "EigenSystem",
    "Engine",
    "FigurePreset",
    "Kernel2",
    "PhaseSet",
    "ProblemSpec",
    "ReducedState",
    "RunConfig",
    "SweepSeries",
    "__version__",
    "version_info",
    "VersionInfo",
]
