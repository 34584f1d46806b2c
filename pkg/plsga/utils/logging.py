"""
Log levels, shortcuts and console setup for plsga runs

Besides the standard levels plsga logs run phases at STEP (between INFO and WARNING, so
they show by default) and per-generation / per-repeat details at VERB (between DEBUG and
INFO, shown with -v).
"""
from __future__ import absolute_import
import logging as _logging
import os
import sys

from .pyutils import ConsoleColors

STAGE_LOGLEVEL = 25
VERBOSE_LOGLEVEL = 15
ALWAYS_LEVEL = 40

_logging.addLevelName(STAGE_LOGLEVEL, "STEP")
_logging.addLevelName(VERBOSE_LOGLEVEL, "VERB")

# -v count to root level
VERBOSITY_LEVELS = (_logging.WARNING, _logging.INFO, VERBOSE_LOGLEVEL, _logging.DEBUG)


def log_stage(msg, *args):
    """Logs the start of a run phase"""
    _logging.log(STAGE_LOGLEVEL, msg, *args)


def log_verbose(msg, *args):
    _logging.log(VERBOSE_LOGLEVEL, msg, *args)


def log_all(level, msg, *args):
    """Logs regardless of verbosity, displayed with the style of `level`"""
    _logging.log(ALWAYS_LEVEL, msg, *args, extra={"display_level": level})


class RunFormatter(_logging.Formatter):
    """Level-tagged messages. Console output may be colored, file output is timestamped"""

    STYLES = {
        _logging.CRITICAL: ConsoleColors.RED + ConsoleColors.BOLD,
        _logging.ERROR: ConsoleColors.RED,
        _logging.WARNING: ConsoleColors.YELLOW,
        STAGE_LOGLEVEL: ConsoleColors.DEFAULT + ConsoleColors.BOLD,
        _logging.INFO: ConsoleColors.BLUE,
        VERBOSE_LOGLEVEL: ConsoleColors.BLUE,
        _logging.DEBUG: ConsoleColors.DEFAULT + ConsoleColors.DIM,
    }
    INDENTS = {VERBOSE_LOGLEVEL: " -> ", _logging.DEBUG: " + "}

    def __init__(self, timestamps=False, color=False):
        fmt = "%(asctime)s [%(levelname)s] %(message)s" if timestamps \
            else "[%(levelname)s] %(message)s"
        super().__init__(fmt, "%Y-%m-%d %H:%M:%S")
        self.color = color

    def format(self, record):
        # handlers share the record, format a copy
        record = _logging.makeLogRecord(record.__dict__)
        level = getattr(record, "display_level", record.levelno)
        record.levelname = _logging.getLevelName(level)
        record.msg = self.INDENTS.get(level, "") + record.getMessage()
        record.args = None
        style = self.STYLES.get(level)
        if self.color and style:
            record.levelname = ConsoleColors.format_text(record.levelname, style)
            record.msg = ConsoleColors.format_text(record.msg, style)
        return super().format(record)


def _console_supports_color(stream):
    if os.environ.get("NO_COLOR") or os.environ.get("ENVIRONMENT") == "BATCH":
        return False
    return bool(getattr(stream, "isatty", bool)())


def setup_logging(loglevel, logfile=None):
    """Configures the root logger for a command line run.

    Args:
      loglevel (int): verbosity, 0 (warnings and phases) to 3 (debug)
      logfile: optional file receiving the same messages, timestamped
    """
    level = VERBOSITY_LEVELS[max(0, min(int(loglevel), len(VERBOSITY_LEVELS) - 1))]
    root = _logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)
    root.setLevel(level)

    console = _logging.StreamHandler(sys.stdout)
    console.setFormatter(RunFormatter(color=_console_supports_color(sys.stdout)))
    root.addHandler(console)

    if logfile:
        file_handler = _logging.FileHandler(logfile, encoding="utf-8")
        file_handler.setFormatter(RunFormatter(timestamps=True))
        root.addHandler(file_handler)
