import math

from phaselab.core.kernel import PhaseSet, ProblemSpec, make_phase_set


def random_phases(rng) -> PhaseSet:
    return make_phase_set(*rng.uniform(0.0, 2.0 * math.pi, size=4))


def random_spec(rng, n_max: int = 10_000) -> ProblemSpec:
    n = int(rng.integers(2, n_max + 1))
    return ProblemSpec(n, int(rng.integers(1, n)))


def random_sparse_spec(rng, min_ratio: int = 100, max_ratio: int = 2000) -> ProblemSpec:
    """A problem with ``M/N <= 1/min_ratio``."""
    m = int(rng.integers(1, 11))
    return ProblemSpec(int(rng.integers(min_ratio * m, max_ratio * m + 1)), m)


def random_matched_phases(rng, low: float = 0.0, high: float = 2.0 * math.pi) -> PhaseSet:
    """Matched phases, ``theta1 - theta2 = phi1 - phi2`` drawn from ``(low, high)``."""
    theta2, phi2 = rng.uniform(0.0, 2.0 * math.pi, size=2)
    difference = rng.uniform(low, high)
    return make_phase_set(theta2 + difference, theta2, phi2 + difference, phi2)
