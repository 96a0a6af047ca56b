from __future__ import annotations

import dataclasses
import enum
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple

import orjson
import yaml
from schema import And, Or, Schema, SchemaError, Use
from schema import Optional as Key

from .analysis import Engine
from .errors import ConfigError

__all__ = (
    "Command",
    "OutputFormat",
    "RunConfig",
    "RUN_CONFIG_SCHEMA",
    "load_config",
    "dump_config",
    "merge_config",
)

log = logging.getLogger("phaselab.config")


class Command(str, enum.Enum):
    KERNEL = "kernel"
    SWEEP = "sweep"
    FIGURE = "figure"
    VALIDATE = "validate"
    SCAN = "scan"
    SCALING = "scaling"
    DECAY = "decay"
    OPTIMALITY = "optimality"
    PRESETS = "presets"


class OutputFormat(str, enum.Enum):
    CSV = "csv"
    JSON = "json"


@dataclass(frozen=True)
class RunConfig:
    """Everything a command needs to reproduce its output.

    Fields left at `None` fall back to the command's own default, so a
    saved config replays the same run on the same build.
    """

    command: Command
    phases: Optional[Tuple[float, float, float, float]] = None
    family: Optional[str] = None
    family_angle: float = math.pi
    n: Optional[int] = None
    m: Optional[int] = None
    m_max: Optional[int] = None
    engine: Engine = Engine.REDUCED
    output_format: Optional[OutputFormat] = None
    output_path: Optional[str] = None
    tolerance: float = 1e-10
    match_tolerance: float = 1e-9
    figure_id: Optional[str] = None
    grid: Optional[int] = None
    specs: Tuple[Tuple[int, int], ...] = ()
    n_values: Tuple[int, ...] = ()
    differences: Tuple[float, ...] = ()
    workers: Optional[int] = None

    def to_dict(self) -> Dict[str, Any]:
        """Plain, ordered representation; keys follow the field order."""
        out: Dict[str, Any] = {}
        for f in dataclasses.fields(self):
            out[f.name] = _plain(getattr(self, f.name))
        return out

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> RunConfig:
        try:
            validated = RUN_CONFIG_SCHEMA.validate(dict(data))
        except SchemaError as exc:
            raise ConfigError(f"Invalid run configuration: {exc.code}") from None
        return cls(**validated)


def _plain(value: Any) -> Any:
    if isinstance(value, enum.Enum):
        return value.value
    if isinstance(value, tuple):
        return [_plain(v) for v in value]
    return value


def _positive_int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool) and value > 0


def _int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


_number = And(Or(int, float), Use(float))
_optional_int = Or(None, And(_int))

RUN_CONFIG_SCHEMA = Schema(
    {
        "command": And(str, Use(Command), error="command must be one of: " + ", ".join(c.value for c in Command)),
        Key("phases"): Or(
            None,
            And([_number], lambda angles: len(angles) == 4, Use(tuple), error="phases must be four numbers"),
        ),
        Key("family"): Or(None, str),
        Key("family_angle"): _number,
        Key("n"): _optional_int,
        Key("m"): _optional_int,
        Key("m_max"): _optional_int,
        Key("engine"): And(str, Use(Engine), error="engine must be reduced, full or spectral"),
        Key("output_format"): Or(None, And(str, Use(OutputFormat)), error="output_format must be csv or json"),
        Key("output_path"): Or(None, str),
        Key("tolerance"): And(_number, lambda x: x >= 0.0, error="tolerance must be >= 0"),
        Key("match_tolerance"): And(_number, lambda x: x >= 0.0, error="match_tolerance must be >= 0"),
        Key("figure_id"): Or(None, str),
        Key("grid"): _optional_int,
        Key("specs"): And(
            [And([_int], lambda pair: len(pair) == 2, Use(tuple))],
            Use(tuple),
            error="specs must be a list of [N, M] pairs",
        ),
        Key("n_values"): And([_int], Use(tuple), error="n_values must be a list of integers"),
        Key("differences"): And([_number], Use(tuple), error="differences must be a list of numbers"),
        Key("workers"): Or(None, And(_positive_int), error="workers must be a positive integer"),
    }
)


def _is_yaml(path: Path) -> bool:
    return path.suffix.lower() in (".yaml", ".yml")


def load_config(path: Path, command: Optional[Command] = None) -> RunConfig:
    """Read a JSON or YAML run configuration.

    The format is picked by file suffix. ``command`` fills in a file that
    does not name one and overrides a file that names another.

    Raises
    ------
    ConfigError
        If the file can't be read, parsed or validated.
    """
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"Can't read config file {path}: {exc.strerror}") from None
    try:
        data = yaml.safe_load(raw) if _is_yaml(path) else orjson.loads(raw)
    except (yaml.YAMLError, orjson.JSONDecodeError) as exc:
        raise ConfigError(f"Can't parse config file {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"Config file {path} must hold a mapping at the top level")
    if command is not None:
        stored = data.get("command")
        if stored is not None and stored != command.value:
            log.warning("Config file is for '%s'; running '%s' instead.", stored, command.value)
        data["command"] = command.value
    log.debug("Loaded run configuration from %s", path)
    return RunConfig.from_dict(data)


def dump_config(config: RunConfig, path: Path) -> bytes:
    """Serialize ``config`` in the format implied by ``path``'s suffix."""
    data = config.to_dict()
    if _is_yaml(Path(path)):
        return yaml.safe_dump(data, sort_keys=False, default_flow_style=None).encode("utf-8")
    return orjson.dumps(data, option=orjson.OPT_INDENT_2) + b"\n"


def merge_config(base: Optional[RunConfig], command: Command, overrides: Mapping[str, Any]) -> RunConfig:
    """Apply explicitly given flags on top of ``base``.

    ``overrides`` maps field names to flag values; `None` means the flag
    was not given and keeps the value from ``base``.
    """
    given = {key: value for key, value in overrides.items() if value is not None}
    if base is None:
        base = RunConfig(command=command)
    merged = RunConfig.from_dict({**base.to_dict(), **{k: _plain(v) for k, v in given.items()}, "command": command.value})
    return merged
