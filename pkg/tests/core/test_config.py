import math

import orjson
import pytest

from phaselab.core.analysis import Engine
from phaselab.core.config import Command, OutputFormat, RunConfig, dump_config, load_config, merge_config
from phaselab.core.errors import ConfigError


@pytest.fixture
def config() -> RunConfig:
    return RunConfig(
        command=Command.SCALING,
        phases=(math.pi, 0.0, math.pi, 0.0),
        engine=Engine.FULL,
        output_format=OutputFormat.JSON,
        specs=((100, 1), (400, 1)),
        tolerance=1e-12,
        workers=2,
    )


@pytest.mark.parametrize("suffix", [".json", ".yaml", ".yml"])
def test_round_trip(tmp_path, config, suffix):
    path = tmp_path / f"run{suffix}"
    path.write_bytes(dump_config(config, path))
    assert load_config(path) == config


def test_dump_is_stable(tmp_path, config):
    path = tmp_path / "run.json"
    first = dump_config(config, path)
    assert first == dump_config(load_config_from_bytes(tmp_path, first), path)
    assert first.endswith(b"\n")
    assert list(orjson.loads(first))[:3] == ["command", "phases", "family"]


def load_config_from_bytes(tmp_path, data: bytes) -> RunConfig:
    path = tmp_path / "copy.json"
    path.write_bytes(data)
    return load_config(path)


def test_missing_keys_use_defaults(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text("command: sweep\nfamily: long\nn: 400\n")
    loaded = load_config(path)
    assert loaded == RunConfig(command=Command.SWEEP, family="long", n=400)
    assert loaded.engine is Engine.REDUCED
    assert loaded.family_angle == math.pi


def test_command_argument_wins(tmp_path, caplog):
    path = tmp_path / "run.json"
    path.write_bytes(orjson.dumps({"command": "decay", "m_max": 50}))
    with caplog.at_level("WARNING", logger="phaselab.config"):
        loaded = load_config(path, Command.SWEEP)
    assert loaded.command is Command.SWEEP
    assert loaded.m_max == 50
    assert "decay" in caplog.text


def test_command_is_filled_in(tmp_path):
    path = tmp_path / "run.json"
    path.write_bytes(orjson.dumps({"grid": 7}))
    assert load_config(path, Command.SCAN) == RunConfig(command=Command.SCAN, grid=7)


@pytest.mark.parametrize(
    "document",
    [
        {"command": "sweep", "engine": "quantum"},
        {"command": "sweep", "phases": [1, 2, 3]},
        {"command": "sweep", "phases": [1, 2, 3, "pi"]},
        {"command": "sweep", "tolerance": -1.0},
        {"command": "sweep", "workers": 0},
        {"command": "sweep", "n": 1.5},
        {"command": "scaling", "specs": [[100, 1, 3]]},
        {"command": "sweep", "colour": "blue"},
        {"command": "teleport"},
    ],
)
def test_invalid_documents(tmp_path, document):
    path = tmp_path / "run.json"
    path.write_bytes(orjson.dumps(document))
    with pytest.raises(ConfigError):
        load_config(path)


def test_missing_command(tmp_path):
    path = tmp_path / "run.json"
    path.write_bytes(orjson.dumps({"n": 10}))
    with pytest.raises(ConfigError):
        load_config(path)


@pytest.mark.parametrize("content", [b"{not json", b"[1, 2, 3]", b""])
def test_unparseable_files(tmp_path, content):
    path = tmp_path / "run.json"
    path.write_bytes(content)
    with pytest.raises(ConfigError):
        load_config(path)


def test_bad_yaml(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text("command: [sweep\n")
    with pytest.raises(ConfigError):
        load_config(path)


def test_unreadable_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")


def test_merge_prefers_given_flags(config):
    merged = merge_config(config, Command.SCALING, {"workers": 8, "specs": ((1000, 10),), "engine": None})
    assert merged.workers == 8
    assert merged.specs == ((1000, 10),)
    assert merged.engine is Engine.FULL
    assert merged.phases == config.phases


def test_merge_without_base():
    merged = merge_config(None, Command.SWEEP, {"phases": (1.0, 2.0, 3.0, 4.0), "engine": Engine.SPECTRAL, "m": None})
    assert merged == RunConfig(command=Command.SWEEP, phases=(1.0, 2.0, 3.0, 4.0), engine=Engine.SPECTRAL)


def test_merge_validates():
    with pytest.raises(ConfigError):
        merge_config(None, Command.SWEEP, {"tolerance": -1.0})
