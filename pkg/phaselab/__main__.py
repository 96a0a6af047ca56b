from phaselab import _early_init

# this needs to be called as early as possible
_early_init()

import logging
import sys
from typing import NoReturn, Optional, Sequence

import phaselab.logging
from phaselab import __version__
from phaselab.core import data_manager
from phaselab.core._cli import ExitCodes, config_overrides, log_dir, parse_cli_flags
from phaselab.core.config import Command, RunConfig, dump_config, load_config, merge_config
from phaselab.core.core_commands import run_command
from phaselab.core.errors import ConfigError, PhaseLabError, ResourceGuardError
from phaselab.core.utils._internal_utils import cli_level_to_log_level

log = logging.getLogger("phaselab.main")


def _build_config(cli_flags) -> RunConfig:
    command = Command(cli_flags.command)
    base = load_config(cli_flags.config, command) if cli_flags.config is not None else None
    config = merge_config(base, command, config_overrides(cli_flags))
    if cli_flags.save_config is not None:
        data_manager.atomic_write(cli_flags.save_config, dump_config(config, cli_flags.save_config))
        log.info("Saved run configuration to %s", cli_flags.save_config)
    return config


def run_cli(argv: Optional[Sequence[str]] = None) -> int:
    """Parse ``argv``, run one command and return its exit code."""
    try:
        cli_flags = parse_cli_flags(sys.argv[1:] if argv is None else argv)
    except SystemExit as exc:
        # argparse already printed the usage message
        return ExitCodes.OK if exc.code in (0, None) else ExitCodes.INVALID_CLI_USAGE

    if cli_flags.version:
        print("phaselab version {}".format(__version__))
        return ExitCodes.OK

    try:
        phaselab.logging.init_logging(
            level=cli_level_to_log_level(cli_flags.logging_level),
            location=log_dir(cli_flags),
            rich_logging=cli_flags.rich_logging,
        )
    except OSError as exc:
        print(f"Can't set up logging: {exc}", file=sys.stderr)
        return ExitCodes.CONFIGURATION_ERROR

    try:
        config = _build_config(cli_flags)
        return run_command(config)
    except ConfigError as exc:
        log.error("%s", exc)
        return ExitCodes.CONFIGURATION_ERROR
    except ResourceGuardError as exc:
        log.error("%s", exc)
        return ExitCodes.RESOURCE_GUARD
    except PhaseLabError as exc:
        log.error("%s", exc)
        return ExitCodes.INVALID_CLI_USAGE
    except Exception:
        log.critical("Unexpected error while running phaselab", exc_info=True)
        return ExitCodes.CRITICAL


def main() -> NoReturn:
    sys.exit(int(run_cli()))


if __name__ == "__main__":
    main()
