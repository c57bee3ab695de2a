# qeccal:config.py

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

from __future__ import annotations

from dataclasses import asdict, dataclass
from pathlib import Path
import json
import os
from typing import Any

# Circuit-level noise defaults (averaged device rates)
P_1Q_DEFAULT = 0.0009
P_2Q_DEFAULT = 0.015
P_RO_DEFAULT = 0.0116
T_BAR_US_DEFAULT = 35.0

# Idle time per layer type, in microseconds
IDLE_ROT_US = 0.05
IDLE_CZ_US = 0.1

# Heterogeneous noise: Normal(mu, delta * sigma), drawn once per gate
HET_MU_2Q = 0.015
HET_SIGMA_2Q = 0.01
HET_MU_1Q = 0.0009
HET_SIGMA_1Q = 0.0004

GAMMA_DEFAULT = 0.09
DM_MAX_DEFAULT = 2

N_BOOT_DEFAULT = 100
N_BOOT_BLOCKS = 64
SHOT_BLOCK = 4096

C_TIME_SPAN_DEFAULT = 9
C_NBR_SEP_DEFAULT = 2
C_SUBSET_BUDGET = 1 << 16


@dataclass(frozen=True)
class Config:
    repo_root: Path

    out_dir: Path = None    # type: ignore[assignment]
    logs_dir: Path = None   # type: ignore[assignment]
    cache_dir: Path = None  # type: ignore[assignment]

    p_1q: float = P_1Q_DEFAULT
    p_2q: float = P_2Q_DEFAULT
    p_ro: float = P_RO_DEFAULT
    t_bar_us: float = T_BAR_US_DEFAULT

    gamma: float = GAMMA_DEFAULT
    dm_max: int = DM_MAX_DEFAULT
    n_boot: int = N_BOOT_DEFAULT
    shot_block: int = SHOT_BLOCK

    c_time_span: int = C_TIME_SPAN_DEFAULT
    c_nbr_sep: int = C_NBR_SEP_DEFAULT

    def __post_init__(self) -> None:
        def _p(env_key: str, default_path: Path) -> Path:
            raw = os.getenv(env_key, str(default_path))
            return Path(raw).expanduser().resolve()

        object.__setattr__(self, "out_dir",   _p("QECCAL_OUT_DIR",   self.repo_root / "data" / "out"))
        object.__setattr__(self, "logs_dir",  _p("QECCAL_LOGS_DIR",  self.repo_root / "logs"))
        object.__setattr__(self, "cache_dir", _p("QECCAL_CACHE_DIR", self.repo_root / "data" / "cache"))

    def snapshot(self) -> dict[str, Any]:
        """Plain-JSON view of the effective configuration (paths as strings)."""
        out = asdict(self)
        for k, v in list(out.items()):
            if isinstance(v, Path):
                out[k] = str(v)
        return out


def load_run_config(path: Path | None) -> dict[str, Any]:
    """
    Read an optional JSON run-config file. Keys are CLI option names with
    dashes replaced by underscores (e.g. "p2q", "shots", "seed").
    """
    if path is None:
        return {}
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(data, dict):
        raise ValueError(f"run config must be a JSON object: {path}")
    return {str(k).replace("-", "_"): v for k, v in data.items()}
