import math

import numpy as np
import pytest

from phaselab.core import analysis
from phaselab.core.analysis import Engine, FIGURE_PRESETS
from phaselab.core.errors import DomainError, ExperimentPreconditionError, NoPeakFound, ResourceGuardError
from phaselab.core.kernel import (
    ProblemSpec,
    build_kernel,
    eigensystem,
    make_phase_set,
    matching_defect,
    named_phase_set,
    predicted_peak_m,
)

from tests.helpers import random_matched_phases, random_phases, random_sparse_spec, random_spec

SCALING_SPECS = [ProblemSpec(100, 1), ProblemSpec(400, 1), ProblemSpec(1000, 10), ProblemSpec(10_000, 10)]


def test_fig3_first_peak():
    preset = analysis.figure_preset("fig3")
    series = analysis.sweep(preset.phases, preset.spec, preset.m_max)
    assert len(series.points) == 26
    assert series.points[0].p == 0.01
    peak = analysis.first_peak(series)
    assert abs(peak.m - 8) <= 1
    assert peak.p >= 0.99
    assert series.points[8].p >= 0.98


def test_fig1_never_succeeds():
    preset = analysis.figure_preset("fig1")
    series = analysis.sweep(preset.phases, preset.spec, 1000)
    assert len(series.points) == 1001
    assert series.max_p < 0.5


def test_fig2_reaches_unity():
    preset = analysis.figure_preset("fig2")
    series = analysis.sweep(preset.phases, preset.spec, preset.m_max)
    assert any(point.p >= 0.99 for point in series.points[48:54])
    assert 48 <= analysis.first_peak(series).m <= 53


def test_unknown_preset():
    with pytest.raises(DomainError):
        analysis.figure_preset("fig4")


def test_presets_have_titles():
    for preset_id, preset in FIGURE_PRESETS.items():
        assert preset.id == preset_id
        assert preset.title
        assert preset.spec == ProblemSpec(1000, 10)


@pytest.mark.parametrize("engine", [Engine.FULL, Engine.SPECTRAL])
def test_engines_agree(preset, engine):
    reduced = analysis.sweep(preset.phases, preset.spec, preset.m_max).probabilities
    other = analysis.sweep(preset.phases, preset.spec, preset.m_max, engine).probabilities
    np.testing.assert_allclose(other, reduced, atol=1e-9 if engine is Engine.SPECTRAL else 1e-10)
    assert other[0] == reduced[0] == 0.01


def test_sweep_preconditions(grover):
    with pytest.raises(DomainError):
        analysis.sweep(grover, ProblemSpec(100, 1), 0)
    with pytest.raises(ResourceGuardError):
        analysis.sweep(grover, ProblemSpec(analysis.MAX_FULL_N + 1, 1), 5, Engine.FULL)


@pytest.mark.parametrize(
    "values,expected",
    [
        ([0.0, 1.0, 0.0, 1.0, 0.0], [1, 3]),
        ([0.0, 1.0, 1.0, 0.0], [1]),
        ([0.1, 0.2, 0.3, 0.4], []),
        ([0.5, 0.5, 0.5], []),
        ([1.0, 0.0], []),
    ],
)
def test_find_peaks(values, expected):
    assert analysis.find_peaks(values) == expected


def test_flat_series_has_no_peak():
    series = analysis.sweep(make_phase_set(0, 0, 0, 0), ProblemSpec(100, 1), 20)
    with pytest.raises(NoPeakFound) as excinfo:
        analysis.first_peak(series)
    assert excinfo.value.flat


def test_rising_series_has_no_peak(grover):
    series = analysis.sweep(grover, ProblemSpec(1_000_000, 1), 10)
    with pytest.raises(NoPeakFound) as excinfo:
        analysis.first_peak(series)
    assert not excinfo.value.flat


def test_first_peak_needs_three_points(grover):
    series = analysis.sweep(grover, ProblemSpec(100, 1), 1)
    with pytest.raises(DomainError):
        analysis.first_peak(series)


def test_grover_four_items(grover):
    series = analysis.sweep(grover, ProblemSpec(4, 1), 5)
    assert analysis.first_peak(series) == (1, pytest.approx(1.0))


def _check_scaling(rows):
    assert [(row.n, row.m) for row in rows] == [(spec.n_total, spec.m_marked) for spec in SCALING_SPECS]
    by_ratio = sorted(rows, key=lambda row: row.n / row.m)
    for row in by_ratio[-2:]:
        assert abs(row.normalized - math.pi / 4) <= 0.1
    for row in rows:
        assert 0.65 <= row.normalized <= 0.9
        assert row.p_star > 0.99
        assert row.normalized == pytest.approx(row.m_star * math.sqrt(row.m / row.n))


def test_scaling_law(grover):
    _check_scaling(analysis.scaling_experiment(grover, SCALING_SPECS, workers=2))


@pytest.mark.slow
def test_scaling_law_full_engine(grover):
    full = analysis.scaling_experiment(grover, SCALING_SPECS, engine=Engine.FULL)
    _check_scaling(full)
    reduced = analysis.scaling_experiment(grover, SCALING_SPECS, workers=1)
    assert [row.m_star for row in full] == [row.m_star for row in reduced]


def test_scaling_is_global_phase_invariant():
    rows = analysis.scaling_experiment(named_phase_set("optimal", 0.7), SCALING_SPECS)
    reference = analysis.scaling_experiment(named_phase_set("grover"), SCALING_SPECS)
    assert [row.m_star for row in rows] == [row.m_star for row in reference]


def test_scaling_needs_matched_phases():
    with pytest.raises(ExperimentPreconditionError):
        analysis.scaling_experiment(FIGURE_PRESETS["fig1"].phases, SCALING_SPECS)


def test_mismatch_decay():
    report = analysis.mismatch_decay_experiment(FIGURE_PRESETS["fig1"].phases, 200, [16_000, 1000, 4000, 2000, 8000])
    assert [row.n for row in report.rows] == [1000, 2000, 4000, 8000, 16_000]
    assert report.within_bound
    maxima = [row.max_p for row in report.rows]
    assert maxima == sorted(maxima, reverse=True)
    assert report.fit_constant == pytest.approx(16_000 * maxima[-1])


def test_mismatch_decay_with_more_marked_items():
    report = analysis.mismatch_decay_experiment(FIGURE_PRESETS["fig1"].phases, 200, [1000, 10_000], m_marked=10)
    assert report.rows[0].max_p > report.rows[1].max_p
    assert report.rows[0].max_p < 0.5


def test_mismatch_decay_without_iterations():
    report = analysis.mismatch_decay_experiment(FIGURE_PRESETS["fig1"].phases, 0, [1000, 2000])
    assert [row.max_p for row in report.rows] == [1 / 1000, 1 / 2000]


@pytest.mark.parametrize("preset_id", ["fig2", "fig3"])
def test_mismatch_decay_needs_mismatch(preset_id):
    with pytest.raises(ExperimentPreconditionError):
        analysis.mismatch_decay_experiment(FIGURE_PRESETS[preset_id].phases, 100, [1000])


def test_cross_validate_passes_on_fig2():
    preset = FIGURE_PRESETS["fig2"]
    report = analysis.cross_validate(preset.phases, preset.spec, preset.m_max)
    assert report.passed
    assert report.max_deviation <= 1e-10
    assert len(report.deviations) == preset.m_max + 1
    assert report.trace.corrected_deviation <= 1e-12
    assert report.trace.printed_deviation > 1e-6


def test_cross_validate_with_zero_tolerance():
    preset = FIGURE_PRESETS["fig2"]
    report = analysis.cross_validate(preset.phases, preset.spec, preset.m_max, tol=0.0)
    assert report.max_deviation > 0.0
    assert not report.passed


def test_cross_validate_guard():
    with pytest.raises(ResourceGuardError):
        analysis.cross_validate(FIGURE_PRESETS["fig2"].phases, ProblemSpec(analysis.MAX_FULL_N + 1, 10), 10)


def test_optimality_minimum_at_pi(fig_spec):
    differences = [k * math.pi / 8 for k in range(0, 16)]
    rows = analysis.optimality_experiment(fig_spec, differences)
    assert rows[0].first_peak_m is None
    assert rows[0].predicted is None
    found = [row.first_peak_m for row in rows if row.first_peak_m is not None]
    assert len(found) == 15
    at_pi = rows[8]
    assert at_pi.difference == pytest.approx(math.pi)
    assert at_pi.first_peak_m == min(found)
    assert at_pi.closed_form == pytest.approx(2.5 * math.pi)
    for row in rows[1:]:
        assert abs(row.first_peak_m - row.predicted) <= 1.5


def test_phase_scan_rejects_small_grids(fig_spec):
    with pytest.raises(DomainError):
        analysis.phase_scan(fig_spec, 2, 50)
    with pytest.raises(DomainError):
        analysis.phase_scan(fig_spec, 1, 50)


def test_phase_scan_diagonal_optimum(fig_spec):
    resolution = 24
    cells = analysis.phase_scan(fig_spec, resolution, 200, workers=2)
    assert len(cells) == resolution * resolution
    assert cells[0].first_peak_m is None
    diagonal = [cells[k * resolution + k] for k in range(resolution)]
    found = [cell.first_peak_m for cell in diagonal if cell.first_peak_m is not None]
    at_pi = diagonal[resolution // 2]
    assert at_pi.dtheta == pytest.approx(math.pi)
    assert at_pi.dphi == pytest.approx(math.pi)
    assert at_pi.first_peak_m == min(found)


@pytest.mark.slow
def test_phase_scan_matching_ridge(fig_spec):
    resolution = 25
    step = 2 * math.pi / resolution
    cells = analysis.phase_scan(fig_spec, resolution, 200)
    successes = [cell for cell in cells if cell.max_p >= 0.9]
    assert successes
    for cell in successes:
        gap = abs(math.remainder(cell.dtheta - cell.dphi, 2 * math.pi))
        assert gap <= step + 1e-9


def test_random_equivalence_cases_are_valid():
    cases = analysis.random_equivalence_cases(50, seed=7)
    assert len(cases) == 50
    assert cases == analysis.random_equivalence_cases(50, seed=7)
    for case in cases:
        assert case.n in (16, 256, 1000, 4096)
        assert case.m in (1, 4, 10, case.n // 4)
        ProblemSpec(case.n, case.m)


@pytest.mark.slow
def test_oracle_equivalence():
    report = analysis.oracle_equivalence(analysis.random_equivalence_cases(50, seed=11), 200)
    assert len(report.deviations) == 50
    assert report.max_deviation <= 1e-10


def test_spectral_engine_over_long_sweeps(rng):
    for _ in range(30):
        phases, spec = random_phases(rng), random_spec(rng)
        if eigensystem(build_kernel(phases, spec)).degenerate:
            continue
        reduced = analysis.probabilities(phases, spec, 10_000)
        spectral = analysis.probabilities(phases, spec, 10_000, Engine.SPECTRAL)
        np.testing.assert_allclose(spectral, reduced, atol=1e-10)


def test_matched_first_peak_follows_prediction(rng):
    checked = 0
    for _ in range(300):
        phases, spec = random_matched_phases(rng, 0.05, 2 * math.pi - 0.05), random_sparse_spec(rng)
        predicted = predicted_peak_m(phases, spec)
        if predicted < 3:
            continue
        peak = analysis.first_peak(analysis.sweep(phases, spec, math.ceil(2 * predicted)))
        assert abs(peak.m - round(predicted)) <= 1
        assert peak.p >= 0.9
        checked += 1
    assert checked >= 250


def test_mismatched_phases_never_succeed(rng):
    checked = 0
    while checked < 200:
        phases = random_phases(rng)
        if matching_defect(phases) < 0.5:
            continue
        spec = random_sparse_spec(rng, max_ratio=1000)
        assert analysis.sweep(phases, spec, 1000).max_p < 0.5
        checked += 1
