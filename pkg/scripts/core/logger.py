#!/usr/bin/env python3
"""
Logging Utilities
One logger tree for the planner: console and log-file handlers live on the
package logger, planner modules log through its children.
"""
import os
import sys
import logging
from datetime import datetime
from pathlib import Path
from typing import Iterable, Optional

from tqdm import tqdm

PACKAGE_LOGGER = 'scripts'
LOG_FORMAT = '[%(asctime)s] %(levelname)s: %(message)s'
DATE_FORMAT = '%H:%M:%S'


def resolve_level(name: Optional[str] = None) -> int:
    """Numeric level from a name or LOG_LEVEL; unknown names give INFO."""
    level = logging.getLevelName((name or os.getenv('LOG_LEVEL', 'INFO')).upper())
    return level if isinstance(level, int) else logging.INFO


class ScriptLogger:
    """
    Logger handed to the experiment scripts.

    Owns the handlers of the package logger, so records from
    scripts.planner.* and scripts.evaluation.* land in the same console
    stream and log file as the script's own.
    """

    def __init__(
        self,
        name: str,
        log_file: Optional[str] = None,
        log_level: Optional[str] = None,
        console_output: bool = True,
        quiet: bool = False
    ):
        """
        Args:
            name: Script name, used as a child of the package logger
            log_file: Also write records to this file (optional)
            log_level: Level name; LOG_LEVEL when omitted
            console_output: Write records to stdout
            quiet: Console shows warnings and errors only, no progress bars
        """
        self.quiet = quiet
        self.package = logging.getLogger(PACKAGE_LOGGER)
        self.logger = self.package.getChild(name)
        self.package.setLevel(resolve_level(log_level))
        self.formatter = logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT)
        self.log_file: Optional[Path] = None

        # a new script logger replaces whatever the previous one attached
        self.close()

        if console_output:
            console = logging.StreamHandler(sys.stdout)
            if quiet:
                console.setLevel(logging.WARNING)
            self._attach(console)
        if log_file:
            self.add_file(log_file)

    def _attach(self, handler: logging.Handler):
        handler.setFormatter(self.formatter)
        self.package.addHandler(handler)

    def add_file(self, path: str) -> Path:
        """Copy every record to a log file, creating its directory."""
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        self._attach(logging.FileHandler(target))
        self.log_file = target
        return target

    def close(self):
        """Detach and close every handler of the package logger."""
        for handler in list(self.package.handlers):
            self.package.removeHandler(handler)
            handler.close()

    def debug(self, message: str):
        self.logger.debug(message)

    def info(self, message: str):
        self.logger.info(message)

    def warning(self, message: str):
        self.logger.warning(message)

    def error(self, message: str):
        self.logger.error(message)

    def section(self, title: str, width: int = 80, rule: str = '='):
        """Banner: title between two rules."""
        self.logger.info(rule * width)
        self.logger.info(title)
        self.logger.info(rule * width)

    def subsection(self, title: str, width: int = 80):
        self.section(title, width, rule='-')

    def resolutions(self, label: str, size: int, res):
        """One line with the resolutions at a graph size."""
        self.logger.info(
            f"{label:>7}: |V|={size} d={res.d:.4g} eps={res.eps:.4g} rho={res.rho:.4g} beta={res.beta:.4g}"
        )

    def progress(self, iterable: Optional[Iterable] = None, total: Optional[int] = None, desc: str = ''):
        """tqdm bar over the iteration loop; disabled when quiet or stdout is not a terminal."""
        disable = self.quiet or not sys.stdout.isatty()
        return tqdm(iterable, total=total, desc=desc, unit='it', disable=disable, leave=False, dynamic_ncols=True)


def get_logger(
    name: str,
    log_dir: Optional[str] = None,
    log_level: Optional[str] = None,
    quiet: bool = False,
    to_file: bool = True
) -> ScriptLogger:
    """
    Script logger with a timestamped log file <log_dir>/<name>_<YYYYmmdd_HHMMSS>.log.

    Args:
        name: Script name
        log_dir: Directory for the log file (LOG_DIR, else results/)
        log_level: Level name
        quiet: Console shows warnings and errors only
        to_file: Write the log file at all

    Returns:
        Configured ScriptLogger
    """
    log_file = None
    if to_file:
        directory = log_dir or os.getenv('LOG_DIR', 'results')
        log_file = str(Path(directory) / f"{name}_{datetime.now():%Y%m%d_%H%M%S}.log")
    return ScriptLogger(name, log_file=log_file, log_level=log_level, quiet=quiet)
