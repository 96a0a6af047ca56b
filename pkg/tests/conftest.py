import numpy as np
import pytest

from phaselab import _early_init

_early_init()

from phaselab.core.analysis import FIGURE_PRESETS  # noqa: E402
from phaselab.core.kernel import PhaseSet, ProblemSpec, named_phase_set  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def grover() -> PhaseSet:
    return named_phase_set("grover")


@pytest.fixture(params=sorted(FIGURE_PRESETS))
def preset(request):
    return FIGURE_PRESETS[request.param]


@pytest.fixture
def fig_spec() -> ProblemSpec:
    return ProblemSpec(1000, 10)
