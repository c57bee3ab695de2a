# qeccal:logging_utils.py

# MIT License
#
# Copyright (c) 2025 Jonas Waldeck
#
# Permission is hereby granted, free of charge, to any person obtaining a copy
# of this software and associated documentation files (the "Software"), to deal
# in the Software without restriction, including without limitation the rights
# to use, copy, modify, merge, publish, distribute, sublicense, and/or sell
# copies of the Software, and to permit persons to whom the Software is
# furnished to do so, subject to the following conditions:
#
# The above copyright notice and this permission notice shall be included in all
# copies or substantial portions of the Software.
#
# THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND.

"""
Handler setup for CLI runs. Library modules only call logging.getLogger(__name__);
setup_logger("qeccal", ...) attaches handlers once for the whole package tree.

Records carry the running stage and seed:

    2026-01-03T18:43:55.067Z INFO qeccal.correlation_inference [infer seed=7]: ...
"""

from __future__ import annotations

import logging
import sys
import time
from logging.handlers import TimedRotatingFileHandler
from pathlib import Path
from typing import Optional

LOG_FORMAT = "%(asctime)s.%(msecs)03dZ %(levelname)s %(name)s [%(stage)s]: %(message)s"
LOG_DATEFMT = "%Y-%m-%dT%H:%M:%S"
LOG_BACKUPS = 14


class _UTCZFormatter(logging.Formatter):
    converter = time.gmtime


class StageFilter(logging.Filter):
    """Stamps every record with the stage label so per-module records stay attributable."""

    def __init__(self, stage: str = "-") -> None:
        super().__init__()
        self.stage = stage

    def filter(self, record: logging.LogRecord) -> bool:
        if not hasattr(record, "stage"):
            record.stage = self.stage
        return True


def parse_level(level: str | int) -> int:
    if isinstance(level, int):
        return level
    value = logging.getLevelName(str(level).upper())
    if not isinstance(value, int):
        raise ValueError(f"unknown log level: {level!r}")
    return value


def setup_logger(
    name: str,
    logs_dir: Path,
    level: str | int = "INFO",
    to_console: bool = True,
    *,
    stage: Optional[str] = None,
    seed: Optional[int] = None,
) -> logging.Logger:
    """
    Daily rotating file `<logs_dir>/<name>.log` (UTC, LOG_BACKUPS days) plus an
    optional stdout echo. Calling again replaces the handlers.
    """
    lvl = parse_level(level)
    logs_dir = Path(logs_dir)
    logs_dir.mkdir(parents=True, exist_ok=True)

    logger = logging.getLogger(name)
    logger.setLevel(lvl)
    logger.propagate = False
    for h in list(logger.handlers):
        h.close()
    logger.handlers.clear()

    label = stage or "-"
    if seed is not None:
        label = f"{label} seed={seed}"
    stamp = StageFilter(label)
    fmt = _UTCZFormatter(fmt=LOG_FORMAT, datefmt=LOG_DATEFMT)

    fh = TimedRotatingFileHandler(
        str(logs_dir / f"{name}.log"),
        when="D",
        interval=1,
        backupCount=LOG_BACKUPS,
        encoding="utf-8",
        utc=True,
    )
    handlers: list[logging.Handler] = [fh]
    if to_console:
        handlers.append(logging.StreamHandler(sys.stdout))
    for h in handlers:
        h.setFormatter(fmt)
        h.addFilter(stamp)
        logger.addHandler(h)

    return logger
