"""Implementations of the ``phaselab`` subcommands.

Every command takes a merged `RunConfig`, writes exactly one data
document and returns an exit code. Errors propagate to
:func:`phaselab.__main__.run_cli`, which maps them onto exit codes.
"""
from __future__ import annotations

import logging
import math
from pathlib import Path
from typing import Any, Callable, Dict, Optional

from phaselab import __version__

from . import analysis, kernel
from ._cli import ExitCodes
from .analysis import FIGURE_PRESETS, Engine
from .config import Command, OutputFormat, RunConfig
from .data_manager import emit, render_csv, render_json, write_metadata
from .errors import DomainError, NoOscillationError, NoPeakFound
from .kernel import PhaseSet, ProblemSpec

__all__ = (
    "COMMANDS",
    "run_command",
    "cmd_kernel",
    "cmd_sweep",
    "cmd_figure",
    "cmd_validate",
    "cmd_scan",
    "cmd_scaling",
    "cmd_decay",
    "cmd_optimality",
    "cmd_presets",
)

log = logging.getLogger("phaselab.commands")

DEFAULT_N = 1000
DEFAULT_M = 10
DEFAULT_SWEEP_M_MAX = 100
DEFAULT_SCAN_GRID = 25
DEFAULT_SCAN_M_MAX = 200
DEFAULT_SCALING_SPECS = ((100, 1), (400, 1), (1000, 10), (10000, 10))
DEFAULT_DECAY_N_VALUES = (1000, 2000, 4000, 8000, 16000)
DEFAULT_DECAY_M_MAX = 200
DEFAULT_DIFFERENCES = tuple(k * math.pi / 8 for k in range(1, 16))


def _problem(config: RunConfig, n: int = DEFAULT_N, m: int = DEFAULT_M) -> ProblemSpec:
    return ProblemSpec(config.n if config.n is not None else n, config.m if config.m is not None else m)


def _phases(config: RunConfig, fallback: Optional[PhaseSet] = None) -> PhaseSet:
    if config.phases is not None:
        return kernel.make_phase_set(*config.phases)
    if config.family is not None:
        return kernel.named_phase_set(config.family, config.family_angle)
    if fallback is not None:
        return fallback
    raise DomainError(f"'{config.command.value}' needs --phases or --family")


def _format(config: RunConfig, default: OutputFormat = OutputFormat.CSV) -> OutputFormat:
    return config.output_format if config.output_format is not None else default


def _phase_doc(phases: PhaseSet) -> Dict[str, Any]:
    return {
        "theta1": phases.theta1,
        "theta2": phases.theta2,
        "phi1": phases.phi1,
        "phi2": phases.phi2,
        "alpha": phases.alpha,
        "beta": phases.beta,
        "gamma": phases.gamma,
        "delta": phases.delta,
    }


def _trace_doc(trace: kernel.TraceReconciliation) -> Dict[str, Any]:
    return {**trace._asdict(), "printed_deviation": trace.printed_deviation, "corrected_deviation": trace.corrected_deviation}


def _finish(config: RunConfig, payload: bytes) -> None:
    out = Path(config.output_path) if config.output_path else None
    emit(payload, out)
    if out is not None:
        write_metadata(out, config.to_dict(), __version__)


def _optional(func: Callable[[], Any]) -> Any:
    try:
        return func()
    except NoOscillationError:
        return None


def cmd_kernel(config: RunConfig) -> ExitCodes:
    """Dump the kernel, its eigensystem and the matching diagnostics as JSON."""
    phases = _phases(config)
    spec = _problem(config)
    k2 = kernel.build_kernel(phases, spec)
    system = kernel.eigensystem(k2)
    trace = kernel.trace_reconciliation(k2)
    if trace.printed_deviation > 1e-6:
        log.info("Quoted closed-form trace is off by %.3g; using the computed trace.", trace.printed_deviation)
    document = {
        "command": Command.KERNEL.value,
        "n": spec.n_total,
        "m": spec.m_marked,
        "phases": _phase_doc(phases),
        "matrix": k2.g,
        "g1": k2.g1,
        "g2": k2.g2,
        "trace": k2.trace_g,
        "determinant": k2.det_g,
        "phase_product": phases.alpha * phases.beta * phases.gamma * phases.delta,
        "k": k2.k_scalar,
        "discriminant": k2.discriminant,
        "eigenvalues": [system.xi1, system.xi2],
        "eigenphases": [system.lambda1, system.lambda2],
        "delta_lambda": system.delta_lambda,
        "eigenvectors": [system.g1_vec, system.g2_vec],
        "branch_sign": system.branch_sign,
        "degenerate": system.degenerate,
        "eigenvector_formula": None if system.degenerate else kernel.eigenvector_formula(k2, system.branch_sign),
        "matching_defect": kernel.matching_defect(phases),
        "angle_form_defect": kernel.angle_form_defect(phases),
        "matched": kernel.is_matched(phases, config.match_tolerance),
        "trace_reconciliation": _trace_doc(trace),
        "predicted_peak_m": _optional(lambda: kernel.predicted_peak_m(phases, spec, config.match_tolerance)),
        "alignment": None if system.degenerate else kernel.g1_alignment(phases, spec),
    }
    _finish(config, render_json(document))
    return ExitCodes.OK


def _series_payload(config: RunConfig, series: analysis.SweepSeries, extra: Dict[str, Any]) -> bytes:
    if _format(config) is OutputFormat.CSV:
        return render_csv(("m", "p"), series.points)
    try:
        first = analysis.first_peak(series)
    except NoPeakFound:
        first = None
    document = {
        **extra,
        "engine": series.engine,
        "n": series.spec.n_total,
        "m": series.spec.m_marked,
        "phases": _phase_doc(series.phases),
        "points": series.points,
        "peaks": series.peaks,
        "first_peak": first,
        "max_p": series.max_p,
        "predicted_peak_m": _optional(lambda: kernel.predicted_peak_m(series.phases, series.spec, config.match_tolerance)),
    }
    return render_json(document)


def cmd_sweep(config: RunConfig) -> ExitCodes:
    phases = _phases(config)
    spec = _problem(config)
    m_max = config.m_max if config.m_max is not None else DEFAULT_SWEEP_M_MAX
    series = analysis.sweep(phases, spec, m_max, config.engine)
    _finish(config, _series_payload(config, series, {"command": Command.SWEEP.value}))
    return ExitCodes.OK


def cmd_figure(config: RunConfig) -> ExitCodes:
    if config.figure_id is None:
        raise DomainError(f"'figure' needs a preset id ({', '.join(FIGURE_PRESETS)})")
    preset = analysis.figure_preset(config.figure_id)
    m_max = config.m_max if config.m_max is not None else preset.m_max
    series = analysis.sweep(preset.phases, preset.spec, m_max, config.engine)
    log.debug("Figure %s: max p = %.6f", preset.id, series.max_p)
    extra = {"command": Command.FIGURE.value, "id": preset.id, "title": preset.title}
    _finish(config, _series_payload(config, series, extra))
    return ExitCodes.OK


def cmd_validate(config: RunConfig) -> ExitCodes:
    """Cross-check both engines; exit 1 when they disagree beyond the tolerance."""
    preset = analysis.figure_preset(config.figure_id or "fig2")
    phases = _phases(config, preset.phases)
    spec = _problem(config, preset.spec.n_total, preset.spec.m_marked)
    m_max = config.m_max if config.m_max is not None else preset.m_max
    report = analysis.cross_validate(phases, spec, m_max, config.tolerance)
    document = {
        "command": Command.VALIDATE.value,
        "n": spec.n_total,
        "m": spec.m_marked,
        "m_max": m_max,
        "phases": _phase_doc(phases),
        "tolerance": report.tolerance,
        "max_deviation": report.max_deviation,
        "passed": report.passed,
        "trace_reconciliation": _trace_doc(report.trace),
    }
    _finish(config, render_json(document))
    if not report.passed:
        log.warning("Engines deviate by %.3g, above the tolerance %.3g.", report.max_deviation, report.tolerance)
        return ExitCodes.TOLERANCE_FAILURE
    return ExitCodes.OK


def cmd_scan(config: RunConfig) -> ExitCodes:
    spec = _problem(config)
    resolution = config.grid if config.grid is not None else DEFAULT_SCAN_GRID
    m_max = config.m_max if config.m_max is not None else DEFAULT_SCAN_M_MAX
    cells = analysis.phase_scan(spec, resolution, m_max, workers=config.workers)
    if _format(config) is OutputFormat.CSV:
        payload = render_csv(("dtheta", "dphi", "max_p", "first_peak_m"), cells)
    else:
        payload = render_json(
            {"command": Command.SCAN.value, "n": spec.n_total, "m": spec.m_marked, "grid": resolution, "m_max": m_max, "cells": cells}
        )
    _finish(config, payload)
    return ExitCodes.OK


def cmd_scaling(config: RunConfig) -> ExitCodes:
    phases = _phases(config, kernel.named_phase_set("grover"))
    pairs = config.specs or DEFAULT_SCALING_SPECS
    specs = [ProblemSpec(n, m) for n, m in pairs]
    rows = analysis.scaling_experiment(phases, specs, engine=config.engine, workers=config.workers, match_tol=config.match_tolerance)
    if _format(config) is OutputFormat.CSV:
        payload = render_csv(("n", "m", "m_star", "normalized"), (row[:4] for row in rows))
    else:
        payload = render_json(
            {
                "command": Command.SCALING.value,
                "engine": Engine(config.engine),
                "phases": _phase_doc(phases),
                "reference": math.pi / 4,
                "rows": rows,
            }
        )
    _finish(config, payload)
    return ExitCodes.OK


def cmd_decay(config: RunConfig) -> ExitCodes:
    phases = _phases(config, FIGURE_PRESETS["fig1"].phases)
    n_values = config.n_values or DEFAULT_DECAY_N_VALUES
    m_max = config.m_max if config.m_max is not None else DEFAULT_DECAY_M_MAX
    report = analysis.mismatch_decay_experiment(
        phases, m_max, n_values, m_marked=config.m if config.m is not None else 1, workers=config.workers
    )
    if _format(config) is OutputFormat.CSV:
        payload = render_csv(("n", "max_p", "bound", "within_bound"), report.rows)
    else:
        payload = render_json(
            {
                "command": Command.DECAY.value,
                "phases": _phase_doc(phases),
                "m": report.m_marked,
                "m_max": m_max,
                "matching_defect": kernel.matching_defect(phases),
                "fit_constant": report.fit_constant,
                "slack": report.slack,
                "within_bound": report.within_bound,
                "rows": report.rows,
            }
        )
    _finish(config, payload)
    return ExitCodes.OK


def cmd_optimality(config: RunConfig) -> ExitCodes:
    spec = _problem(config)
    differences = config.differences or DEFAULT_DIFFERENCES
    rows = analysis.optimality_experiment(spec, differences, m_max=config.m_max)
    if _format(config) is OutputFormat.CSV:
        payload = render_csv(("difference", "predicted", "closed_form", "first_peak_m", "first_peak_p"), rows)
    else:
        payload = render_json({"command": Command.OPTIMALITY.value, "n": spec.n_total, "m": spec.m_marked, "rows": rows})
    _finish(config, payload)
    return ExitCodes.OK


def cmd_presets(config: RunConfig) -> ExitCodes:
    presets = [
        {
            "id": preset.id,
            "title": preset.title,
            "n": preset.spec.n_total,
            "m": preset.spec.m_marked,
            "m_max": preset.m_max,
            "phases": _phase_doc(preset.phases),
            "matched": kernel.is_matched(preset.phases, config.match_tolerance),
        }
        for preset in FIGURE_PRESETS.values()
    ]
    _finish(config, render_json({"command": Command.PRESETS.value, "presets": presets}))
    return ExitCodes.OK


COMMANDS: Dict[Command, Callable[[RunConfig], ExitCodes]] = {
    Command.KERNEL: cmd_kernel,
    Command.SWEEP: cmd_sweep,
    Command.FIGURE: cmd_figure,
    Command.VALIDATE: cmd_validate,
    Command.SCAN: cmd_scan,
    Command.SCALING: cmd_scaling,
    Command.DECAY: cmd_decay,
    Command.OPTIMALITY: cmd_optimality,
    Command.PRESETS: cmd_presets,
}


def run_command(config: RunConfig) -> ExitCodes:
    log.debug("Running %s", config.command.value)
    code = COMMANDS[config.command](config)
    log.debug("%s finished with %s", config.command.value, code.name)
    return code
