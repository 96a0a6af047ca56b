import csv
import dataclasses
import enum
import io
import logging
import os
import platform
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence
from uuid import uuid4

import numpy as np
import orjson
import platformdirs

__all__ = (
    "appdir",
    "default_log_dir",
    "atomic_write",
    "format_value",
    "render_csv",
    "render_json",
    "to_jsonable",
    "metadata_path",
    "emit",
    "write_metadata",
)

log = logging.getLogger("phaselab.data_manager")

appdir = platformdirs.PlatformDirs("phaselab")


def default_log_dir() -> Path:
    return appdir.user_log_path


def atomic_write(path: Path, data: bytes) -> None:
    """
    Write ``data`` to ``path`` through a temporary file in the same directory.

    The temp file is fsynced before it replaces ``path`` and the directory
    is fsynced after, so a reader sees either the old file or the new one.
    Directories have no fsync on Windows; there the last step is skipped.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp_path = path.parent / "{}-{}.tmp".format(path.stem, uuid4().fields[0])
    with tmp_path.open(mode="wb") as fs:
        fs.write(data)
        fs.flush()
        os.fsync(fs.fileno())

    tmp_path.replace(path)

    try:
        flag = os.O_DIRECTORY  # pylint: disable=no-member
    except AttributeError:
        pass
    else:
        fd = os.open(path.parent, flag)
        try:
            os.fsync(fd)
        finally:
            os.close(fd)


def format_value(value: Any) -> str:
    """Locale-independent CSV cell text; floats keep 17 significant digits."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def render_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> bytes:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(value) for value in row])
    return buffer.getvalue().encode("utf-8")


def to_jsonable(value: Any) -> Any:
    """Convert domain records into orjson-friendly values.

    Complex numbers become ``[re, im]``, arrays become nested lists and
    NamedTuples become objects in field order.
    """
    if value is None or isinstance(value, (str, bool)):
        return value
    if isinstance(value, enum.Enum):
        return value.value
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    if isinstance(value, np.ndarray):
        return [to_jsonable(item) for item in value]
    if hasattr(value, "_asdict"):
        return {key: to_jsonable(item) for key, item in value._asdict().items()}
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return {f.name: to_jsonable(getattr(value, f.name)) for f in dataclasses.fields(value) if f.repr}
    if isinstance(value, dict):
        return {str(key): to_jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple, frozenset, set)):
        items = sorted(value) if isinstance(value, (set, frozenset)) else value
        return [to_jsonable(item) for item in items]
    raise TypeError(f"Can't serialize {type(value).__name__} to JSON")


def render_json(document: Any) -> bytes:
    return orjson.dumps(to_jsonable(document), option=orjson.OPT_INDENT_2) + b"\n"


def metadata_path(out: Path) -> Path:
    out = Path(out)
    return out.with_name(out.name + ".meta.json")


def emit(payload: bytes, out: Optional[Path]) -> None:
    """Send a data payload to ``out`` or, without one, to standard output."""
    if out is None:
        sys.stdout.buffer.write(payload)
        sys.stdout.flush()
        return
    atomic_write(Path(out), payload)
    log.info("Wrote %s", out)


def write_metadata(out: Path, config: dict, version: str) -> Path:
    """Write the run sidecar next to ``out``; data files never carry timestamps."""
    sidecar = metadata_path(out)
    document = {
        "version": version,
        "created_utc": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "platform": platform.platform(),
        "python": platform.python_version(),
        "numpy": np.__version__,
        "config": config,
    }
    atomic_write(sidecar, render_json(document))
    log.debug("Wrote run metadata to %s", sidecar)
    return sidecar
