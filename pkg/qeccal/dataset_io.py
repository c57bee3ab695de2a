# MIT License
#
# Copyright (c) 2026 Jonas Waldeck
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

# qeccal:dataset_io.py

"""
Syndrome dataset text format, version 1:

    QECSYN 1
    detectors <n>
    det <ancilla_id> <tick>        (n lines)
    truth xz                       (optional)
    shots <m>
    <n chars of 0/1>[ <2 chars of 0/1>]   (m lines)
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Optional

import numpy as np

from .code_model import DetectorCoord
from .noise_sim import SyndromeDataset

logger = logging.getLogger(__name__)

MAGIC = "QECSYN 1"


class FormatError(ValueError):
    def __init__(self, message: str, line: int = 0, col: int = 0, path: Optional[str] = None) -> None:
        self.message = message
        self.line = line
        self.col = col
        self.path = path
        super().__init__(str(self))

    def __str__(self) -> str:
        where = self.path or "<input>"
        return f"{where}:{self.line}:{self.col}: {self.message}"


def format_dataset(dataset: SyndromeDataset) -> str:
    lines = [MAGIC, f"detectors {dataset.n_detectors}"]
    lines += [f"det {d.ancilla} {d.tick}" for d in dataset.detector_list]
    if dataset.truth is not None:
        lines.append("truth xz")
    lines.append(f"shots {dataset.n_shots}")

    if dataset.n_shots:
        body = np.where(dataset.shots.astype(bool), ord("1"), ord("0")).astype(np.uint8)
        if dataset.truth is not None:
            sep = np.full((dataset.n_shots, 1), ord(" "), dtype=np.uint8)
            tr = np.where(dataset.truth.astype(bool), ord("1"), ord("0")).astype(np.uint8)
            body = np.concatenate([body, sep, tr], axis=1)
        lines += [row.tobytes().decode("ascii") for row in body]
    return "\n".join(lines) + "\n"


def write_dataset(path: Path, dataset: SyndromeDataset) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_dataset(dataset), encoding="ascii", newline="\n")
    logger.info("wrote %s (%d shots x %d detectors)", path, dataset.n_shots, dataset.n_detectors)


def _header_int(line: str, keyword: str, lineno: int, path: Optional[str]) -> int:
    parts = line.split(" ")
    if len(parts) != 2 or parts[0] != keyword:
        raise FormatError(f"expected '{keyword} <count>', got {line!r}", lineno, 1, path)
    try:
        value = int(parts[1])
    except ValueError:
        raise FormatError(f"bad {keyword} count {parts[1]!r}", lineno, len(keyword) + 2, path) from None
    if value < 0 or parts[1] != str(value):
        raise FormatError(f"bad {keyword} count {parts[1]!r}", lineno, len(keyword) + 2, path)
    return value


def parse_dataset(text: str, path: Optional[str] = None) -> SyndromeDataset:
    if not text.endswith("\n"):
        raise FormatError("missing final newline", text.count("\n") + 1, len(text.rsplit("\n", 1)[-1]) + 1, path)
    lines = text[:-1].split("\n")
    pos = 0

    def _next() -> tuple[int, str]:
        nonlocal pos
        if pos >= len(lines):
            raise FormatError("unexpected end of file", pos + 1, 1, path)
        pos += 1
        return pos, lines[pos - 1]

    lineno, line = _next()
    if line != MAGIC:
        raise FormatError(f"expected {MAGIC!r}", lineno, 1, path)

    lineno, line = _next()
    n = _header_int(line, "detectors", lineno, path)

    detectors: list[DetectorCoord] = []
    for _ in range(n):
        lineno, line = _next()
        parts = line.split(" ")
        if len(parts) != 3 or parts[0] != "det" or not parts[1]:
            raise FormatError(f"expected 'det <ancilla> <tick>', got {line!r}", lineno, 1, path)
        try:
            tick = int(parts[2])
        except ValueError:
            raise FormatError(f"bad tick {parts[2]!r}", lineno, len(parts[0]) + len(parts[1]) + 3, path) from None
        if parts[2] != str(tick):
            raise FormatError(f"bad tick {parts[2]!r}", lineno, len(parts[0]) + len(parts[1]) + 3, path)
        detectors.append(DetectorCoord(parts[1], tick))

    lineno, line = _next()
    has_truth = line == "truth xz"
    if has_truth:
        lineno, line = _next()
    m = _header_int(line, "shots", lineno, path)

    width = n + 3 if has_truth else n
    if len(lines) - pos != m:
        raise FormatError(f"expected {m} shot lines, found {len(lines) - pos}", pos + 1, 1, path)

    shots = np.zeros((m, n), dtype=np.uint8)
    truth = np.zeros((m, 2), dtype=bool) if has_truth else None
    for r in range(m):
        lineno, line = _next()
        if len(line) != width:
            raise FormatError(f"expected {width} characters, got {len(line)}", lineno, min(len(line), width) + 1, path)
        raw = np.frombuffer(line.encode("ascii", errors="replace"), dtype=np.uint8)
        bits = raw[:n]
        bad = np.flatnonzero((bits != ord("0")) & (bits != ord("1")))
        if bad.size:
            raise FormatError(f"expected 0 or 1, got {line[bad[0]]!r}", lineno, int(bad[0]) + 1, path)
        shots[r] = bits - ord("0")
        if has_truth:
            if line[n] != " ":
                raise FormatError("expected a space before the truth bits", lineno, n + 1, path)
            for k, ch in enumerate(line[n + 1:]):
                if ch not in "01":
                    raise FormatError(f"expected 0 or 1, got {ch!r}", lineno, n + 2 + k, path)
                truth[r, k] = ch == "1"

    return SyndromeDataset(tuple(detectors), shots, truth, {"source": path or "text"})


def read_dataset(path: Path) -> SyndromeDataset:
    path = Path(path)
    try:
        text = path.read_text(encoding="ascii")
    except UnicodeDecodeError as e:
        raise FormatError("non-ASCII content", 0, e.start + 1, str(path)) from None
    ds = parse_dataset(text, str(path))
    logger.info("read %s (%d shots x %d detectors)", path, ds.n_shots, ds.n_detectors)
    return ds
