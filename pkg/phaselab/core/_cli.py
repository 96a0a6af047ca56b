import argparse
import math
import re
import sys
from enum import IntEnum
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from .analysis import FIGURE_PRESETS, Engine
from .config import Command, OutputFormat
from .kernel import PHASE_FAMILIES

__all__ = (
    "ExitCodes",
    "parse_angle",
    "non_negative_int",
    "positive_int",
    "spec_pair",
    "parse_cli_flags",
    "CONFIG_FLAGS",
    "config_overrides",
    "log_dir",
)


# This needs to be an int enum to be used
# with sys.exit
class ExitCodes(IntEnum):
    #: The command ran and its checks passed.
    OK = 0
    #: A validation ran but exceeded its tolerance.
    TOLERANCE_FAILURE = 1
    #: The CLI command was used incorrectly, such as an invalid angle or problem size.
    INVALID_CLI_USAGE = 2
    #: A size or iteration guard refused the run.
    RESOURCE_GUARD = 3
    #: An unexpected error occurred.
    CRITICAL = 70  # Exit code borrowed from os.EX_SOFTWARE.
    #: The config file could not be read or validated.
    CONFIGURATION_ERROR = 78  # Exit code borrowed from os.EX_CONFIG.


#: argparse destinations that map one-to-one onto RunConfig fields
CONFIG_FLAGS = (
    "phases",
    "family",
    "family_angle",
    "n",
    "m",
    "m_max",
    "engine",
    "output_format",
    "output_path",
    "tolerance",
    "match_tolerance",
    "figure_id",
    "grid",
    "specs",
    "n_values",
    "differences",
    "workers",
)

_NUMBER = r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?"
_PI_RE = re.compile(rf"^(?P<sign>[+-]?)(?:(?P<coef>{_NUMBER})\s*\*?\s*)?pi(?:\s*/\s*(?P<div>{_NUMBER}))?$", re.IGNORECASE)


def parse_angle(arg: str) -> float:
    """Parse an angle in radians; ``pi`` multiples such as ``1.7pi``, ``-pi/2`` or ``3*pi/2`` are allowed."""
    text = arg.strip()
    match = _PI_RE.match(text)
    if match:
        value = math.pi * float(match["coef"] or 1.0)
        if match["div"] is not None:
            divisor = float(match["div"])
            if divisor == 0.0:
                raise argparse.ArgumentTypeError(f"Division by zero in angle {arg!r}.")
            value /= divisor
        return -value if match["sign"] == "-" else value
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{arg!r} is not an angle (use radians, optionally with pi).")
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError("Angles have to be finite.")
    return value


def non_negative_int(arg: str) -> int:
    try:
        x = int(arg)
    except ValueError:
        raise argparse.ArgumentTypeError("The argument has to be a number.")
    if x < 0:
        raise argparse.ArgumentTypeError("The argument has to be a non-negative integer.")
    if x > sys.maxsize:
        raise argparse.ArgumentTypeError(f"The argument has to be lower than or equal to {sys.maxsize}.")
    return x


def positive_int(arg: str) -> int:
    x = non_negative_int(arg)
    if x < 1:
        raise argparse.ArgumentTypeError("The argument has to be a positive integer.")
    return x


def non_negative_float(arg: str) -> float:
    try:
        x = float(arg)
    except ValueError:
        raise argparse.ArgumentTypeError("The argument has to be a number.")
    if not x >= 0.0:
        raise argparse.ArgumentTypeError("The argument has to be a non-negative number.")
    return x


def spec_pair(arg: str) -> Tuple[int, int]:
    """Parse ``N:M`` (or ``N,M``) into a pair of integers."""
    parts = re.split(r"[:,]", arg)
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"Expected N:M, got {arg!r}.")
    return non_negative_int(parts[0]), non_negative_int(parts[1])


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    group = common.add_argument_group("run options")
    group.add_argument(
        "-v",
        "--verbose",
        "--debug",
        action="count",
        default=0,
        dest="logging_level",
        help="Increase the verbosity of the logs, each usage of this flag increases the verbosity level by 1.",
    )
    group.add_argument(
        "--config", type=Path, default=None, help="Load a JSON or YAML run configuration. Flags given on the command line win."
    )
    group.add_argument("--save-config", type=Path, default=None, help="Write the merged run configuration to this path.")
    group.add_argument("--out", type=Path, default=None, dest="output_path", help="Write data here instead of standard output.")
    group.add_argument(
        "--workers",
        type=positive_int,
        default=None,
        help="Maximum number of experiment rows evaluated concurrently. Defaults to the number of physical cores.",
    )
    group.add_argument(
        "--log-dir",
        nargs="?",
        const="",
        default=None,
        help="Also write rotating log files to this directory (the user log directory when no value is given).",
    )
    group.add_argument(
        "--force-disable-rich-logging",
        action="store_false",
        dest="rich_logging",
        help="Use plain text console logs.",
    )
    return common


def _add_phase_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("phases")
    exclusive = group.add_mutually_exclusive_group()
    exclusive.add_argument(
        "--phases",
        nargs=4,
        type=parse_angle,
        default=None,
        metavar=("THETA1", "THETA2", "PHI1", "PHI2"),
        help="The four rotation angles in radians; pi literals are accepted (e.g. 1.7pi, pi/2).",
    )
    exclusive.add_argument("--family", choices=sorted(PHASE_FAMILIES), default=None, help="Use a named phase family.")
    group.add_argument("--family-angle", type=parse_angle, default=None, help="Free angle of the named family.")
    group.add_argument(
        "--match-tol",
        type=non_negative_float,
        default=None,
        dest="match_tolerance",
        help="Largest |alpha*delta - beta*gamma| still treated as matched.",
    )


def _add_problem_flags(parser: argparse.ArgumentParser, *, m_max: bool = True) -> None:
    parser.add_argument("--n", type=positive_int, default=None, help="Database size N.")
    parser.add_argument("--m", type=positive_int, default=None, help="Number of marked items M.")
    if m_max:
        parser.add_argument("--m-max", type=non_negative_int, default=None, dest="m_max", help="Largest iteration count.")


def _add_engine_flag(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--engine", choices=[e.value for e in Engine], default=None, help="How probabilities are evaluated.")


def _add_format_flag(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--format", choices=[f.value for f in OutputFormat], default=None, dest="output_format", help="Output data format."
    )


def _protect_negative_angles(args: Sequence[str]) -> List[str]:
    # argparse reads "-pi" as an unknown option, but it does accept plain negative numbers
    protected = []
    for arg in args:
        if arg.startswith("-") and _PI_RE.match(arg):
            arg = repr(parse_angle(arg))
        protected.append(arg)
    return protected


def parse_cli_flags(args: Sequence[str]) -> argparse.Namespace:
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="phaselab",
        description="Four-phase generalized Grover kernel laboratory",
        usage="phaselab <command> [arguments]",
    )
    parser.add_argument("--version", "-V", action="store_true", help="Show phaselab's current version")
    subparsers = parser.add_subparsers(dest="command", metavar="command")

    kernel = subparsers.add_parser(Command.KERNEL.value, parents=[common], help="Print the 2x2 kernel and its eigensystem as JSON.")
    _add_phase_flags(kernel)
    _add_problem_flags(kernel, m_max=False)

    sweep = subparsers.add_parser(Command.SWEEP.value, parents=[common], help="Success probability for m = 0..m_max.")
    _add_phase_flags(sweep)
    _add_problem_flags(sweep)
    _add_engine_flag(sweep)
    _add_format_flag(sweep)

    figure = subparsers.add_parser(Command.FIGURE.value, parents=[common], help="Sweep data of a figure preset.")
    figure.add_argument("figure_id", nargs="?", default=None, metavar="ID", help=f"One of: {', '.join(FIGURE_PRESETS)}.")
    figure.add_argument("--m-max", type=non_negative_int, default=None, dest="m_max", help="Largest iteration count (defaults to the preset's).")
    _add_engine_flag(figure)
    _add_format_flag(figure)

    validate = subparsers.add_parser(Command.VALIDATE.value, parents=[common], help="Compare the reduced and statevector engines.")
    validate.add_argument("--preset", default=None, dest="figure_id", metavar="ID", help="Start from a figure preset (default fig2).")
    _add_phase_flags(validate)
    _add_problem_flags(validate)
    validate.add_argument("--tol", type=non_negative_float, default=None, dest="tolerance", help="Largest allowed deviation.")

    scan = subparsers.add_parser(Command.SCAN.value, parents=[common], help="Grid scan over phase differences.")
    _add_problem_flags(scan)
    scan.add_argument("--grid", type=non_negative_int, default=None, help="Grid points per axis (at least 3).")
    _add_format_flag(scan)

    scaling = subparsers.add_parser(Command.SCALING.value, parents=[common], help="First peak iteration against sqrt(N/M).")
    _add_phase_flags(scaling)
    scaling.add_argument("--specs", nargs="+", type=spec_pair, default=None, metavar="N:M", help="Problem sizes to run.")
    _add_engine_flag(scaling)
    _add_format_flag(scaling)

    decay = subparsers.add_parser(Command.DECAY.value, parents=[common], help="Maximum probability against N for mismatched phases.")
    _add_phase_flags(decay)
    _add_problem_flags(decay)
    decay.add_argument("--n-values", nargs="+", type=positive_int, default=None, dest="n_values", metavar="N", help="Database sizes.")
    _add_format_flag(decay)

    optimality = subparsers.add_parser(Command.OPTIMALITY.value, parents=[common], help="First peak against the matched phase difference.")
    _add_problem_flags(optimality)
    optimality.add_argument("--differences", nargs="+", type=parse_angle, default=None, metavar="D", help="Phase differences.")
    _add_format_flag(optimality)

    subparsers.add_parser(Command.PRESETS.value, parents=[common], help="List the figure presets as JSON.")

    namespace = parser.parse_args(_protect_negative_angles(args))
    if not namespace.version and namespace.command is None:
        parser.error("a command is required")
    return namespace


def config_overrides(namespace: argparse.Namespace) -> dict:
    """Flags the user actually gave, keyed by RunConfig field."""
    overrides = {}
    for name in CONFIG_FLAGS:
        value = getattr(namespace, name, None)
        if value is None:
            continue
        if isinstance(value, Path):
            value = str(value)
        elif isinstance(value, list):
            value = tuple(value)
        overrides[name] = value
    return overrides


def log_dir(namespace: argparse.Namespace) -> Optional[Path]:
    from .data_manager import default_log_dir

    if namespace.log_dir is None:
        return None
    return Path(namespace.log_dir) if namespace.log_dir else default_log_dir()
