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

# qeccal:export_csv.py

from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .code_model import DetectorKey
from .decoder import CyclePoint, GammaPoint
from .diagnostics import (
    ClassReport,
    DecayFit,
    DeltaGammaRow,
    DriftReport,
    MeanSyndromeRow,
    NuReport,
    TPrimeReport,
    ValidationRow,
    XYPoint,
)

# table file names, one per analysis product
COVARIANCE_CSV = "fig3a_cov.csv"
CLASS_TOTALS_CSV = "fig3b_classes.csv"
P_VS_NU_CSV = "fig4a.csv"
XY_SYMMETRY_CSV = "fig4b.csv"
TIME_DECAY_CSV = "fig5a.csv"
TPRIME_PER_CYCLE_CSV = "fig5b.csv"
TPRIME_PER_ANCILLA_CSV = "fig5c.csv"
MEAN_SYNDROME_CSV = "appB.csv"
DRIFT_CSV = "appH.csv"


def _fmt(x) -> object:
    if x is None:
        return ""
    if isinstance(x, float) and not math.isfinite(x):
        return ""
    return x


def _key(dets: DetectorKey) -> str:
    return " ".join(str(d) for d in dets)


def write_rows(out_path: Path, header: Sequence[str], rows: Iterable[Sequence[object]]) -> Path:
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with out_path.open("w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(list(header))
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return out_path


def export_covariance_panels(out_path: Path, panels: Iterable[tuple[float, Sequence[str], np.ndarray]]) -> Path:
    """All panels in one table, keyed by the dm column."""
    rows = (
        [dm, a, b, float(matrix[i, j])]
        for dm, ancillas, matrix in panels
        for i, a in enumerate(ancillas)
        for j, b in enumerate(ancillas)
    )
    return write_rows(out_path, ["dm", "ancilla_a", "ancilla_b", "covariance"], rows)


def export_class_totals(out_path: Path, report: ClassReport, expected: Optional[ClassReport] = None) -> Path:
    exp = {r.error_class: r.total for r in expected.rows} if expected is not None else {}
    rows = (
        [r.error_class, r.total, r.dispersion, r.count, r.negative_total, exp.get(r.error_class)]
        for r in report.rows
    )
    return write_rows(out_path, ["class", "total_p", "dispersion", "count", "negative_total", "expected_total_p"], rows)


def export_p_vs_nu(out_path: Path, report: NuReport) -> Path:
    rows = [[_key(p.detectors), p.error_class, p.nu, p.p, p.stderr] for p in report.points]
    rows.append(["# spearman", "", "", report.spearman, report.pvalue])
    return write_rows(out_path, ["detectors", "class", "nu", "p", "stderr"], rows)


def export_xy_symmetry(out_path: Path, points: Sequence[XYPoint]) -> Path:
    rows = ([p.location, p.qubit, p.p_x, p.stderr_x, p.p_y, p.stderr_y] for p in points)
    return write_rows(out_path, ["location", "qubit", "p_x", "stderr_x", "p_y", "stderr_y"], rows)


def export_time_decay(out_path: Path, fit: DecayFit) -> Path:
    rows: list[list[object]] = [[dm, c, "", ""] for dm, c in zip(fit.dms, fit.covariances)]
    rows.append(["# fit", "", fit.base, fit.c0])
    return write_rows(out_path, ["dm", "covariance", "fit_base", "fit_c0"], rows)


def export_tprime(out_dir: Path, reports: Sequence[TPrimeReport]) -> list[Path]:
    out_dir = Path(out_dir)
    per_cycle = write_rows(
        out_dir / TPRIME_PER_CYCLE_CSV,
        ["support", "ancilla", "cycle", "p", "stderr"],
        (
            ["with_c" if rep.with_c else "without_c", r.ancilla, r.cycle, r.p, r.stderr]
            for rep in reports
            for r in rep.per_cycle
        ),
    )
    per_anc = write_rows(
        out_dir / TPRIME_PER_ANCILLA_CSV,
        ["support", "ancilla", "p_tprime", "p_mc"],
        (
            ["with_c" if rep.with_c else "without_c", a.ancilla, a.p_mean, a.p_mc]
            for rep in reports
            for a in rep.per_ancilla
        ),
    )
    return [per_cycle, per_anc]


def export_mean_syndrome(out_path: Path, rows: Sequence[MeanSyndromeRow]) -> Path:
    return write_rows(out_path, ["ancilla", "tick", "cycle", "mean"], ([r.ancilla, r.tick, r.tick // 2, r.mean] for r in rows))


def export_drift(out_path: Path, reports: Sequence[DriftReport]) -> Path:
    rows = (
        [r.p, r.epsilon, r.p1, r.p2, r.p12, r.shots, r.sim_p1, r.sim_p2, r.sim_p12, r.sim_stderr]
        for r in reports
    )
    return write_rows(
        out_path,
        ["p", "epsilon", "p1", "p2", "p12", "shots", "sim_p1", "sim_p2", "sim_p12", "sim_p12_stderr"],
        rows,
    )


def export_gamma_scan(out_path: Path, points: Sequence[GammaPoint], delta_rows: Sequence[DeltaGammaRow] = ()) -> Path:
    rows: list[list[object]] = [
        ["", p.gamma, p.fidelity, p.stderr, p.relative_improvement, p.relative_stderr] for p in points
    ]
    rows += [
        [r.delta, r.point.gamma, r.point.fidelity, r.point.stderr, r.point.relative_improvement, r.point.relative_stderr]
        for r in delta_rows
    ]
    return write_rows(out_path, ["delta", "gamma", "fidelity", "stderr", "relative_improvement", "relative_stderr"], rows)


def export_fidelity(out_path: Path, points: Sequence[CyclePoint]) -> Path:
    rows = ([p.cycles, p.fidelity, p.stderr, p.uniform_fidelity, p.uniform_stderr] for p in points)
    return write_rows(out_path, ["cycles", "fidelity", "stderr", "uniform_fidelity", "uniform_stderr"], rows)


def export_validation(out_path: Path, rows: Sequence[ValidationRow]) -> Path:
    return write_rows(
        out_path,
        ["detectors", "weight", "true_p", "inferred_p", "stderr", "z"],
        ([_key(r.detectors), len(r.detectors), r.true_p, r.inferred_p, r.stderr, r.z] for r in rows),
    )


def export_decoded(out_path: Path, decoded: np.ndarray, truth: Optional[np.ndarray] = None) -> Path:
    if truth is None:
        rows = ([i, int(x), int(z), "", ""] for i, (x, z) in enumerate(decoded))
    else:
        rows = ([i, int(x), int(z), int(tx), int(tz)] for i, ((x, z), (tx, tz)) in enumerate(zip(decoded, truth)))
    return write_rows(out_path, ["shot", "x_flip", "z_flip", "truth_x", "truth_z"], rows)
