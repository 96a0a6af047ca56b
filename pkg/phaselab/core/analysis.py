"""Experiments over the reduced model and the statevector oracle.

Nothing in here touches files or the terminal; every experiment returns
plain records that :mod:`phaselab.core.core_commands` serializes.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import numpy.typing as npt
from red_commons.logging import getLogger

from .errors import (
    DomainError,
    ExperimentPreconditionError,
    NoOscillationError,
    NoPeakFound,
    ResourceGuardError,
)
from .kernel import (
    MATCH_TOLERANCE,
    PhaseSet,
    ProblemSpec,
    TraceReconciliation,
    build_kernel,
    eigensystem,
    is_matched,
    make_phase_set,
    matched_peak_closed_form,
    matching_defect,
    predicted_peak_m,
    reduced_amplitudes,
    trace_reconciliation,
)
from .oracle import MAX_ITERATIONS, first_m_marked, run_full
from .utils import map_bounded

__all__ = (
    "Engine",
    "SweepPoint",
    "SweepSeries",
    "FigurePreset",
    "FIGURE_PRESETS",
    "ScalingRow",
    "DecayRow",
    "DecayReport",
    "ValidationReport",
    "OptimalityRow",
    "ScanCell",
    "EquivalenceCase",
    "EquivalenceReport",
    "MAX_FULL_N",
    "SUCCESS_THRESHOLD",
    "probabilities",
    "sweep",
    "find_peaks",
    "first_peak",
    "figure_preset",
    "scaling_experiment",
    "mismatch_decay_experiment",
    "cross_validate",
    "optimality_experiment",
    "phase_scan",
    "random_equivalence_cases",
    "oracle_equivalence",
)

log = getLogger("phaselab.analysis")

#: Largest database the statevector engine will allocate.
MAX_FULL_N = 10**7
#: Probability the search has to beat to count as a success.
SUCCESS_THRESHOLD = 0.5
#: Differences below this are treated as equal when locating peaks.
PEAK_TOLERANCE = 1e-12
#: Deviation allowed between the reduced and the statevector engines.
VALIDATION_TOLERANCE = 1e-10
#: Slack factor on the ``1/N`` fit of the mismatch decay.
DECAY_SLACK = 4.0
#: Minimum matching defect for the mismatch decay experiment.
DECAY_MIN_DEFECT = 0.5


class Engine(str, enum.Enum):
    """How probabilities are evaluated."""

    #: Repeated application of the 2x2 kernel.
    REDUCED = "reduced"
    #: The N-dimensional statevector oracle.
    FULL = "full"
    #: The eigendecomposition of the 2x2 kernel.
    SPECTRAL = "spectral"


class SweepPoint(NamedTuple):
    m: int
    p: float


@dataclass(frozen=True)
class SweepSeries:
    spec: ProblemSpec
    phases: PhaseSet
    points: Tuple[SweepPoint, ...]
    peaks: Tuple[SweepPoint, ...]
    engine: Engine = Engine.REDUCED

    @property
    def probabilities(self) -> npt.NDArray[np.float64]:
        return np.array([point.p for point in self.points], dtype=np.float64)

    @property
    def max_p(self) -> float:
        return max(point.p for point in self.points)


@dataclass(frozen=True)
class FigurePreset:
    id: str
    spec: ProblemSpec
    phases: PhaseSet
    m_max: int
    title: str = ""


_PI = math.pi

FIGURE_PRESETS: Dict[str, FigurePreset] = {
    "fig1": FigurePreset(
        id="fig1",
        spec=ProblemSpec(1000, 10),
        # delta = i e^{i3} is e^{i(pi/2 + 3)}
        phases=make_phase_set(_PI, _PI / 2, _PI, _PI / 2 + 3.0),
        m_max=200,
        title="N=1000, M=10, alpha = gamma = e^{i pi}, beta = e^{i pi/2}, delta = i e^{i3}",
    ),
    "fig2": FigurePreset(
        id="fig2",
        spec=ProblemSpec(1000, 10),
        phases=make_phase_set(1.7 * _PI, 1.6 * _PI, _PI, 0.9 * _PI),
        m_max=120,
        title="N=1000, M=10, alpha = e^{i1.7pi}, gamma = e^{i pi}, beta = e^{i1.6pi}, delta = e^{i0.9pi}",
    ),
    "fig3": FigurePreset(
        id="fig3",
        spec=ProblemSpec(1000, 10),
        phases=make_phase_set(1.7 * _PI, 0.7 * _PI, 1.9 * _PI, 0.9 * _PI),
        m_max=25,
        title="N=1000, M=10, alpha = e^{i1.7pi}, gamma = e^{i1.9pi}, beta = e^{i0.7pi}, delta = e^{i0.9pi}",
    ),
}


class ScalingRow(NamedTuple):
    n: int
    m: int
    m_star: int
    normalized: float
    p_star: float
    predicted: float


class DecayRow(NamedTuple):
    n: int
    max_p: float
    bound: float
    within_bound: bool


@dataclass(frozen=True)
class DecayReport:
    rows: Tuple[DecayRow, ...]
    fit_constant: float
    m_marked: int
    slack: float = DECAY_SLACK

    @property
    def within_bound(self) -> bool:
        return all(row.within_bound for row in self.rows)


@dataclass(frozen=True)
class ValidationReport:
    max_deviation: float
    tolerance: float
    m_max: int
    trace: TraceReconciliation
    deviations: Tuple[float, ...] = field(repr=False, default=())

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tolerance


class OptimalityRow(NamedTuple):
    difference: float
    predicted: Optional[float]
    closed_form: Optional[float]
    first_peak_m: Optional[int]
    first_peak_p: Optional[float]


class ScanCell(NamedTuple):
    dtheta: float
    dphi: float
    max_p: float
    first_peak_m: Optional[int]


class EquivalenceCase(NamedTuple):
    n: int
    m: int
    phases: PhaseSet


@dataclass(frozen=True)
class EquivalenceReport:
    cases: Tuple[EquivalenceCase, ...]
    deviations: Tuple[float, ...]

    @property
    def max_deviation(self) -> float:
        return max(self.deviations, default=0.0)


def _check_full_size(n: int) -> None:
    if n > MAX_FULL_N:
        raise ResourceGuardError(
            f"N={n} exceeds the statevector engine limit of {MAX_FULL_N}", MAX_FULL_N
        )


def _check_m_max(m_max: int, minimum: int) -> None:
    if isinstance(m_max, bool) or not isinstance(m_max, (int, np.integer)):
        raise DomainError(f"m_max must be an integer, got {m_max!r}")
    if m_max < minimum:
        raise DomainError(f"m_max must be at least {minimum}, got {m_max}")
    if m_max > MAX_ITERATIONS:
        raise ResourceGuardError(
            f"m_max={m_max} exceeds the limit of {MAX_ITERATIONS} iterations", MAX_ITERATIONS
        )


def probabilities(
    phases: PhaseSet, spec: ProblemSpec, m_max: int, engine: Engine = Engine.REDUCED
) -> npt.NDArray[np.float64]:
    """Success probability at every ``m`` in ``0..m_max`` as an array.

    ``p[0]`` is exactly ``M/N`` for every engine.
    """
    engine = Engine(engine)
    if engine is Engine.FULL:
        _check_full_size(spec.n_total)
        series = run_full(spec.n_total, first_m_marked(spec.n_total, spec.m_marked), phases, m_max)
        values = np.array([p for _, p in series], dtype=np.float64)
    elif engine is Engine.SPECTRAL:
        kernel = build_kernel(phases, spec)
        system = eigensystem(kernel)
        steps = np.arange(m_max + 1)
        a_w = spec.amplitude_w
        power_1 = np.exp(1j * steps * system.lambda1)
        if system.degenerate:
            amplitudes = power_1 * a_w
        else:
            power_2 = np.exp(1j * steps * system.lambda2)
            g1 = system.g1_vec
            projection = g1[0] * np.vdot(g1, spec.s_vector)
            amplitudes = power_2 * a_w + (power_1 - power_2) * projection
        values = np.abs(amplitudes) ** 2
    else:
        states = reduced_amplitudes(build_kernel(phases, spec), m_max)
        values = np.abs(states[:, 0]) ** 2
    values = np.clip(values, 0.0, 1.0)
    values[0] = spec.m_marked / spec.n_total
    return values


def find_peaks(values: Sequence[float], tol: float = PEAK_TOLERANCE) -> List[int]:
    """Indices of interior local maxima of ``values``.

    A point counts when it rises above its left neighbour and does not fall
    below its right one. On a plateau only the first point is reported.
    """
    array = np.asarray(values, dtype=np.float64)
    if array.size < 3:
        return []
    centre = array[1:-1]
    rises = centre - array[:-2] > tol
    holds = centre - array[2:] >= -tol
    return [int(i) + 1 for i in np.flatnonzero(rises & holds)]


def sweep(
    phases: PhaseSet, spec: ProblemSpec, m_max: int, engine: Engine = Engine.REDUCED
) -> SweepSeries:
    """Evaluate ``p`` at every integer ``m`` in ``0..m_max`` and mark local maxima.

    Raises
    ------
    DomainError
        If ``m_max < 1``.
    ResourceGuardError
        If the statevector engine is asked for ``N`` above `MAX_FULL_N`.
    """
    _check_m_max(m_max, 1)
    engine = Engine(engine)
    values = probabilities(phases, spec, m_max, engine)
    points = tuple(SweepPoint(m, float(p)) for m, p in enumerate(values))
    peaks = tuple(points[i] for i in find_peaks(values))
    log.trace("Sweep %s N=%d M=%d: %d peaks", engine.value, spec.n_total, spec.m_marked, len(peaks))
    return SweepSeries(spec=spec, phases=phases, points=points, peaks=peaks, engine=engine)


def first_peak(series: SweepSeries) -> SweepPoint:
    """The smallest-``m`` interior local maximum of ``series``.

    Raises
    ------
    DomainError
        If the series has fewer than three points.
    NoPeakFound
        If there is no interior maximum; ``flat`` tells a constant series
        apart from one that never turns over.
    """
    if len(series.points) < 3:
        raise DomainError("A peak needs at least three sweep points")
    if series.peaks:
        return series.peaks[0]
    values = series.probabilities
    flat = bool(np.all(np.abs(values - values[0]) <= PEAK_TOLERANCE))
    raise NoPeakFound(
        "The probability series is flat" if flat else "No interior peak in the sweep range",
        flat=flat,
    )


def figure_preset(preset_id: str) -> FigurePreset:
    try:
        return FIGURE_PRESETS[preset_id]
    except KeyError:
        raise DomainError(
            f"Unknown figure preset {preset_id!r} (expected one of: {', '.join(FIGURE_PRESETS)})"
        ) from None


def _peak_search_range(predicted: float) -> int:
    return max(3, math.ceil(2.0 * predicted) + 2)


def scaling_experiment(
    phases: PhaseSet,
    specs: Iterable[ProblemSpec],
    *,
    engine: Engine = Engine.REDUCED,
    workers: Optional[int] = None,
    match_tol: float = MATCH_TOLERANCE,
) -> List[ScalingRow]:
    """First peak iteration against ``sqrt(N/M)`` for matched phases.

    Each row reports ``m* sqrt(M/N)``; for the optimal phases it tends to
    ``pi/4`` as ``N/M`` grows.

    Raises
    ------
    ExperimentPreconditionError
        If the phases are not matched.
    """
    if not is_matched(phases, match_tol):
        raise ExperimentPreconditionError(
            f"The scaling experiment needs matched phases (defect {matching_defect(phases):.3g})"
        )
    engine = Engine(engine)

    def run(spec: ProblemSpec) -> ScalingRow:
        predicted = predicted_peak_m(phases, spec, match_tol)
        peak = first_peak(sweep(phases, spec, _peak_search_range(predicted), engine))
        normalized = peak.m * math.sqrt(spec.m_marked / spec.n_total)
        log.verbose(
            "Scaling N=%d M=%d: m*=%d (predicted %.3f)", spec.n_total, spec.m_marked, peak.m, predicted
        )
        return ScalingRow(spec.n_total, spec.m_marked, peak.m, normalized, peak.p, predicted)

    return map_bounded(run, list(specs), workers=workers)


def mismatch_decay_experiment(
    phases: PhaseSet,
    m_max: int,
    n_values: Iterable[int],
    *,
    m_marked: int = 1,
    workers: Optional[int] = None,
) -> DecayReport:
    """Maximum success probability against ``N`` for mismatched phases.

    ``M`` stays fixed so that ``M << N`` holds as ``N`` grows. Each row is
    compared with a ``1/N`` law fitted through the largest ``N`` and
    widened by `DECAY_SLACK`.

    Raises
    ------
    ExperimentPreconditionError
        If the matching defect is below `DECAY_MIN_DEFECT`.
    """
    defect = matching_defect(phases)
    if defect < DECAY_MIN_DEFECT:
        raise ExperimentPreconditionError(
            f"The decay experiment needs a matching defect >= {DECAY_MIN_DEFECT}, got {defect:.3g}"
        )
    _check_m_max(m_max, 0)
    sizes = sorted(set(int(n) for n in n_values))
    if not sizes:
        raise DomainError("n_values is empty")

    def run(n: int) -> float:
        values = probabilities(phases, ProblemSpec(n, m_marked), m_max)
        return float(values.max())

    maxima = map_bounded(run, sizes, workers=workers)
    fit_constant = maxima[-1] * sizes[-1]
    rows = []
    for n, max_p in zip(sizes, maxima):
        bound = DECAY_SLACK * fit_constant / n
        rows.append(DecayRow(n, max_p, bound, max_p <= bound))
    return DecayReport(rows=tuple(rows), fit_constant=fit_constant, m_marked=m_marked)


def cross_validate(
    phases: PhaseSet, spec: ProblemSpec, m_max: int, tol: float = VALIDATION_TOLERANCE
) -> ValidationReport:
    """Run both engines and compare them point by point.

    The report also carries the three-way trace reconciliation of the
    kernel.
    """
    _check_full_size(spec.n_total)
    _check_m_max(m_max, 0)
    reduced = probabilities(phases, spec, m_max, Engine.REDUCED)
    full = probabilities(phases, spec, m_max, Engine.FULL)
    deviations = np.abs(full - reduced)
    report = ValidationReport(
        max_deviation=float(deviations.max()),
        tolerance=float(tol),
        m_max=m_max,
        trace=trace_reconciliation(build_kernel(phases, spec)),
        deviations=tuple(float(d) for d in deviations),
    )
    if report.trace.printed_deviation > 1e-6:
        log.info(
            "Quoted trace closed form is off by %.3g; sign-corrected form is off by %.3g",
            report.trace.printed_deviation,
            report.trace.corrected_deviation,
        )
    return report


def optimality_experiment(
    spec: ProblemSpec, differences: Iterable[float], *, m_max: Optional[int] = None
) -> List[OptimalityRow]:
    """First peak for matched phases ``theta1 - theta2 = phi1 - phi2 = d``.

    The peak iteration is smallest at ``d = pi``.
    """
    rows = []
    for difference in differences:
        phases = make_phase_set(difference, 0.0, difference, 0.0)
        try:
            predicted = predicted_peak_m(phases, spec)
            closed_form = matched_peak_closed_form(phases, spec)
        except NoOscillationError:
            rows.append(OptimalityRow(float(difference), None, None, None, None))
            continue
        limit = m_max if m_max is not None else _peak_search_range(predicted)
        try:
            peak = first_peak(sweep(phases, spec, limit))
        except NoPeakFound:
            rows.append(OptimalityRow(float(difference), predicted, closed_form, None, None))
            continue
        rows.append(OptimalityRow(float(difference), predicted, closed_form, peak.m, peak.p))
    return rows


def _first_success_peak(values: npt.NDArray[np.float64]) -> Optional[int]:
    for index in find_peaks(values):
        if values[index] > SUCCESS_THRESHOLD:
            return index
    return None


def phase_scan(
    spec: ProblemSpec, resolution: int, m_max: int, *, workers: Optional[int] = None
) -> List[ScanCell]:
    """Map the best success probability over phase-difference space.

    Cells sit on ``k * 2pi / resolution`` for both ``dtheta = theta1 - theta2``
    and ``dphi = phi1 - phi2``. ``first_peak_m`` is the first local maximum
    that beats `SUCCESS_THRESHOLD`, or `None`.

    Raises
    ------
    DomainError
        If ``resolution < 3``.
    """
    if isinstance(resolution, bool) or not isinstance(resolution, int) or resolution < 3:
        raise DomainError(f"The scan grid needs at least 3 points per axis, got {resolution!r}")
    _check_m_max(m_max, 1)
    grid = [2.0 * math.pi * k / resolution for k in range(resolution)]

    def run_row(dtheta: float) -> List[ScanCell]:
        cells = []
        for dphi in grid:
            values = probabilities(make_phase_set(dtheta, 0.0, dphi, 0.0), spec, m_max)
            cells.append(ScanCell(dtheta, dphi, float(values.max()), _first_success_peak(values)))
        return cells

    rows = map_bounded(run_row, grid, workers=workers)
    return [cell for row in rows for cell in row]


def random_equivalence_cases(
    count: int,
    seed: int = 0,
    *,
    sizes: Sequence[int] = (16, 256, 1000, 4096),
) -> List[EquivalenceCase]:
    """Random ``(N, M, phases)`` draws for comparing the two engines.

    ``M`` is drawn from ``{1, 4, 10, N/4}``.
    """
    rng = np.random.default_rng(seed)
    cases = []
    for _ in range(count):
        n = int(rng.choice(sizes))
        m = int(rng.choice([1, 4, 10, n // 4]))
        angles = rng.uniform(0.0, 2.0 * math.pi, size=4)
        cases.append(EquivalenceCase(n, m, make_phase_set(*angles)))
    return cases


def oracle_equivalence(
    cases: Iterable[EquivalenceCase], m_max: int, *, workers: Optional[int] = None
) -> EquivalenceReport:
    """Largest ``|p_full - p_reduced|`` over ``0..m_max`` for every case."""
    cases = tuple(cases)

    def run(case: EquivalenceCase) -> float:
        spec = ProblemSpec(case.n, case.m)
        full = probabilities(case.phases, spec, m_max, Engine.FULL)
        reduced = probabilities(case.phases, spec, m_max, Engine.REDUCED)
        return float(np.max(np.abs(full - reduced)))

    return EquivalenceReport(cases=cases, deviations=tuple(map_bounded(run, cases, workers=workers)))
