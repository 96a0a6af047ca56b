import logging.handlers
import pathlib
import re
from datetime import datetime
from logging import LogRecord
from typing import List, Optional, Tuple

from rich._log_render import LogRender  # DEP-WARN
from rich.console import Console
from rich.highlighter import NullHighlighter
from rich.logging import RichHandler
from rich.style import Style
from rich.text import Text
from rich.theme import Theme

__all__ = ("RotatingFileHandler", "PhaseLabRichHandler", "init_logging", "MAX_OLD_LOGS")

MAX_OLD_LOGS = 8

FILE_FORMAT = "[{asctime}] [{levelname}] {name}: {message}"

LOG_THEME = Theme(
    {
        "log.time": Style(dim=True),
        "logging.level.warning": Style(color="yellow"),
        "logging.level.critical": Style(color="white", bgcolor="red"),
        "logging.level.verbose": Style(color="magenta", italic=True, dim=True),
        "logging.level.trace": Style(color="white", italic=True, dim=True),
        "repr.number": Style(color="cyan"),
    }
)

# handlers owned by init_logging, replaced on every call
_installed: List[logging.Handler] = []


class RotatingFileHandler(logging.handlers.RotatingFileHandler):
    """Rotating file handler working off a stem and a directory.

    Files rotate downwards: the first log is ``{stem}.log``, after the
    first rollover it becomes ``{stem}-part1.log`` and logging continues in
    ``{stem}-part2.log``. On start the handler appends to the highest part
    left over from a previous run.
    """

    def __init__(
        self,
        stem: str,
        directory: pathlib.Path,
        maxBytes: int = 0,
        backupCount: int = 0,
        encoding: Optional[str] = None,
    ) -> None:
        self.baseStem = stem
        self.directory = directory.resolve()
        part_re = re.compile(rf"{stem}-part(?P<partnum>\d+)\.log")
        highest_part = max(
            (int(match["partnum"]) for match in map(part_re.fullmatch, (p.name for p in directory.iterdir())) if match),
            default=0,
        )
        filename = directory / (f"{stem}-part{highest_part}.log" if highest_part else f"{stem}.log")
        super().__init__(filename, mode="a", maxBytes=maxBytes, backupCount=backupCount, encoding=encoding, delay=False)

    def doRollover(self):
        if self.stream:
            self.stream.close()
            self.stream = None
        initial_path = self.directory / f"{self.baseStem}.log"
        if self.backupCount > 0 and initial_path.exists():
            initial_path.replace(self.directory / f"{self.baseStem}-part1.log")

        match = re.match(rf"{self.baseStem}(?:-part(?P<part>\d+))?\.log", pathlib.Path(self.baseFilename).name)
        latest_part_num = int(match.groupdict(default="1").get("part", "1"))
        if self.backupCount < 1:
            pathlib.Path(self.baseFilename).unlink()
        elif latest_part_num > self.backupCount:
            # shift every part down by one and reuse the last slot
            for i in range(1, self.backupCount + 1):
                next_log = self.directory / f"{self.baseStem}-part{i + 1}.log"
                if next_log.exists():
                    next_log.replace(self.directory / f"{self.baseStem}-part{i}.log")
        else:
            self.baseFilename = str(self.directory / f"{self.baseStem}-part{latest_part_num + 1}.log")

        self.stream = self._open()


class _NamedLogRender(LogRender):
    def __call__(self, console, renderables, log_time=None, time_format=None, level="", logger_name=None, **kwargs):
        output = Text()
        if self.show_time:
            log_time = log_time or console.get_datetime()
            display = log_time.strftime(time_format or self.time_format)
            if display == self._last_time:
                output.append(" " * (len(display) + 1))
            else:
                output.append(f"{display} ", style="log.time")
                self._last_time = display
        if self.show_level:
            output.append(level)
            output.append(" ")
        if logger_name:
            output.append(f"[{logger_name}] ", style="bright_black")
        output.append(*renderables)
        return output


class PhaseLabRichHandler(RichHandler):
    """RichHandler that shows the logger name where rich puts the source path."""

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self._log_render = _NamedLogRender(
            show_time=self._log_render.show_time,
            show_level=self._log_render.show_level,
            show_path=False,
            level_width=self._log_render.level_width,
        )

    def get_level_text(self, record: LogRecord) -> Text:
        level_text = super().get_level_text(record)
        level_text.stylize("bold")
        return level_text

    def emit(self, record: LogRecord) -> None:
        message = self.format(record)
        traceback = None
        if self.rich_tracebacks and record.exc_info and record.exc_info != (None, None, None):
            traceback = self._make_traceback(record)
            message = record.getMessage()
        message_text = Text(message)
        if self.highlighter:
            message_text = self.highlighter(message_text)
        time_format = None if self.formatter is None else self.formatter.datefmt
        self.console.print(
            self._log_render(
                self.console,
                [message_text],
                log_time=datetime.fromtimestamp(record.created),
                time_format=time_format,
                level=self.get_level_text(record),
                logger_name=record.name,
            ),
            soft_wrap=True,
        )
        if traceback:
            self.console.print(traceback)

    def _make_traceback(self, record: LogRecord):
        from rich.traceback import Traceback

        exc_type, exc_value, exc_traceback = record.exc_info
        return Traceback.from_exception(
            exc_type,
            exc_value,
            exc_traceback,
            width=self.tracebacks_width,
            extra_lines=self.tracebacks_extra_lines,
            word_wrap=self.tracebacks_word_wrap,
            show_locals=self.tracebacks_show_locals,
            indent_guides=False,
        )


def _rotate_latest(location: pathlib.Path) -> None:
    previous_logs: List[pathlib.Path] = []
    latest_logs: List[Tuple[pathlib.Path, str]] = []
    for path in location.iterdir():
        match = re.match(r"latest(?P<part>-part\d+)?\.log", path.name)
        if match:
            latest_logs.append((path, match.groupdict(default="")["part"]))
        elif re.match(r"previous(?:-part\d+)?\.log", path.name):
            previous_logs.append(path)
    for path in previous_logs:
        path.unlink()
    for path, part in latest_logs:
        path.replace(location / f"previous{part}.log")


def init_logging(level: int, location: Optional[pathlib.Path] = None, *, rich_logging: bool = True) -> None:
    """Configure the root logger for a CLI run.

    Console logs always go to stderr so that data on stdout stays clean.
    With ``location`` set, ``latest.log`` and ``phaselab.log`` are written
    there as well; the previous run's ``latest`` files become ``previous``.
    """
    root_logger = logging.getLogger()
    for handler in _installed:
        root_logger.removeHandler(handler)
        handler.close()
    _installed.clear()
    root_logger.setLevel(level)

    file_formatter = logging.Formatter(FILE_FORMAT, datefmt="%Y-%m-%d %H:%M:%S", style="{")
    if rich_logging:
        console = Console(stderr=True, theme=LOG_THEME, tab_size=4)
        stderr_handler: logging.Handler = PhaseLabRichHandler(
            console=console,
            rich_tracebacks=True,
            show_path=False,
            highlighter=NullHighlighter(),
        )
        stderr_handler.setFormatter(logging.Formatter("{message}", datefmt="[%X]", style="{"))
    else:
        stderr_handler = logging.StreamHandler()
        stderr_handler.setFormatter(file_formatter)
    _installed.append(stderr_handler)
    logging.captureWarnings(True)

    if location is not None:
        location.mkdir(parents=True, exist_ok=True)
        _rotate_latest(location)
        for stem in ("latest", "phaselab"):
            fhandler = RotatingFileHandler(
                stem=stem,
                directory=location,
                maxBytes=1_000_000,  # About 1MB per logfile
                backupCount=MAX_OLD_LOGS,
                encoding="utf-8",
            )
            fhandler.setFormatter(file_formatter)
            _installed.append(fhandler)

    for handler in _installed:
        root_logger.addHandler(handler)
