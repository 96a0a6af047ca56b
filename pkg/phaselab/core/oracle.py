"""Brute-force statevector simulation of the four-phase kernel.

This is the independent check on :mod:`phaselab.core.kernel`: it never
uses the two-level reduction and works on all ``N`` amplitudes. Each
iteration is one selective phase pass followed by a rank-1 update
against the uniform vector, O(N) in time and memory.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import AbstractSet, FrozenSet, Iterable, List, Tuple

import numpy as np
import numpy.typing as npt

from .errors import DomainError, ResourceGuardError
from .kernel import PhaseSet

__all__ = (
    "FullState",
    "MAX_ITERATIONS",
    "first_m_marked",
    "build_full_initial",
    "apply_kernel_full",
    "evolve_full",
    "marked_probability",
    "norm",
    "run_full",
)

log = logging.getLogger("phaselab.oracle")

#: Upper bound on ``m_max`` for a single oracle run.
MAX_ITERATIONS = 10**6


@dataclass(frozen=True)
class FullState:
    """Amplitudes over all ``N`` database items plus the marked index set."""

    amplitudes: npt.NDArray[np.complex128] = field(repr=False)
    marked: FrozenSet[int]

    def __post_init__(self) -> None:
        n = self.amplitudes.shape[0]
        if not 1 <= len(self.marked) <= n - 1:
            raise DomainError(
                f"The marked set must be a nonempty proper subset of range({n}),"
                f" got {len(self.marked)} indices"
            )
        norm_sq = float(np.vdot(self.amplitudes, self.amplitudes).real)
        if abs(norm_sq - 1.0) > 1e-10:
            raise DomainError(f"Full state is not normalized (|psi|^2 = {norm_sq!r})")

    @property
    def n(self) -> int:
        return int(self.amplitudes.shape[0])

    @property
    def mask(self) -> npt.NDArray[np.bool_]:
        return _marked_mask(self.n, self.marked)


def _validate_marked(n: int, marked: Iterable[int]) -> FrozenSet[int]:
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 2:
        raise DomainError(f"N must be an integer >= 2, got {n!r}")
    indices = frozenset(int(i) for i in marked)
    if not indices:
        raise DomainError("The marked set is empty")
    if len(indices) >= n:
        raise DomainError("Every item is marked; the search plane degenerates")
    out_of_range = [i for i in indices if not 0 <= i < n]
    if out_of_range:
        raise DomainError(f"Marked indices outside range({n}): {sorted(out_of_range)[:5]}")
    return indices


def _marked_mask(n: int, marked: AbstractSet[int]) -> npt.NDArray[np.bool_]:
    mask = np.zeros(n, dtype=bool)
    mask[np.fromiter(marked, dtype=np.intp, count=len(marked))] = True
    return mask


def first_m_marked(n: int, m: int) -> FrozenSet[int]:
    """Mark the first ``m`` indices of an ``n`` item database."""
    return _validate_marked(n, range(m))


def build_full_initial(n: int, marked: Iterable[int]) -> FullState:
    """The uniform superposition ``|s>`` over ``n`` items."""
    indices = _validate_marked(n, marked)
    amplitudes = np.full(n, 1.0 / math.sqrt(n), dtype=np.complex128)
    return FullState(amplitudes, indices)


def _phase_vector(mask: npt.NDArray[np.bool_], phases: PhaseSet) -> npt.NDArray[np.complex128]:
    return np.where(mask, phases.alpha, phases.beta).astype(np.complex128)


def _step(
    psi: npt.NDArray[np.complex128], phase_vector: npt.NDArray[np.complex128], phases: PhaseSet
) -> None:
    # psi <- -(delta psi + (gamma - delta) <s|psi> |s>) after the selective phase, in place
    n = psi.shape[0]
    np.multiply(psi, phase_vector, out=psi)
    projection = psi.sum() / n
    psi *= phases.delta
    psi += (phases.gamma - phases.delta) * projection
    np.negative(psi, out=psi)


def apply_kernel_full(state: FullState, phases: PhaseSet) -> FullState:
    """One application of ``G = -G2 G1`` to the full statevector."""
    psi = state.amplitudes.copy()
    _step(psi, _phase_vector(state.mask, phases), phases)
    return FullState(psi, state.marked)


def evolve_full(state: FullState, phases: PhaseSet, m: int) -> FullState:
    if m < 0:
        raise DomainError(f"m must be non-negative, got {m}")
    psi = state.amplitudes.copy()
    phase_vector = _phase_vector(state.mask, phases)
    for _ in range(m):
        _step(psi, phase_vector, phases)
    return FullState(psi, state.marked)


def marked_probability(state: FullState) -> float:
    """Total probability carried by the marked items."""
    marked_amplitudes = state.amplitudes[state.mask]
    return float(np.vdot(marked_amplitudes, marked_amplitudes).real)


def run_full(
    n: int, marked: Iterable[int], phases: PhaseSet, m_max: int
) -> List[Tuple[int, float]]:
    """Marked-set probability after every iteration ``0..m_max``.

    Raises
    ------
    ResourceGuardError
        If ``m_max`` exceeds `MAX_ITERATIONS`.
    """
    if m_max < 0:
        raise DomainError(f"m_max must be non-negative, got {m_max}")
    if m_max > MAX_ITERATIONS:
        raise ResourceGuardError(
            f"m_max={m_max} exceeds the oracle limit of {MAX_ITERATIONS} iterations",
            MAX_ITERATIONS,
        )
    state = build_full_initial(n, marked)
    mask = state.mask
    psi = state.amplitudes.copy()
    phase_vector = _phase_vector(mask, phases)
    series = [(0, len(state.marked) / n)]
    for m in range(1, m_max + 1):
        _step(psi, phase_vector, phases)
        marked_amplitudes = psi[mask]
        series.append((m, float(np.vdot(marked_amplitudes, marked_amplitudes).real)))
    log.debug("Oracle run N=%d, M=%d, m_max=%d done", n, len(state.marked), m_max)
    return series


def norm(state: FullState) -> float:
    return float(np.linalg.norm(state.amplitudes))
