# qeccal:diagnostics.py

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

"""
Analysis products computed from datasets and inferred models.

Everything here returns plain rows; export_csv writes them out.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np
from scipy.stats import spearmanr

from .catalog import (
    FaultCatalog,
    catalog_for,
    classify_signature,
    generate_c_class,
    schedule_signatures,
    translate_signatures,
)
from .code_model import (
    KIND_Z,
    SLOT_GATE1,
    SLOT_IDLE,
    CircuitSchedule,
    DetectorCoord,
    DetectorKey,
    ErrorClass,
    ErrorSignature,
    build_layout,
    build_schedule,
)
from .config import C_NBR_SEP_DEFAULT, C_TIME_SPAN_DEFAULT, N_BOOT_DEFAULT
from .correlation_inference import (
    InferredModel,
    ModelEntry,
    analytic_moments,
    annotate_model,
    build_support,
    bulk_detectors,
    covariance_matrix,
    cycle_average,
    estimate_moments,
    estimate_support_moments,
    infer_pairwise_spitz,
    infer_probabilities,
    model_from_channels,
    subset_closure,
)
from .decoder import GammaPoint, gamma_scan
from .noise_sim import (
    MODE_HETEROGENEOUS,
    DriftChannel,
    NoiseParams,
    SignatureChannel,
    SyndromeDataset,
    channel_decomposition,
    inject_drift,
    random_channels,
    sample_signature_channels,
    simulate_circuit,
)

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Class totals, p vs nu, X/Y symmetry
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ClassRow:
    error_class: str
    total: float
    dispersion: float
    count: int
    negative_total: float = 0.0   # sum of the negative estimates included in total


@dataclass(frozen=True)
class ClassReport:
    rows: tuple[ClassRow, ...]

    def row(self, cls: ErrorClass | str) -> ClassRow:
        name = cls.value if isinstance(cls, ErrorClass) else cls
        for r in self.rows:
            if r.error_class == name:
                return r
        raise KeyError(name)

    def total(self, cls: ErrorClass | str) -> float:
        return self.row(cls).total


def _entry_class(entry: ModelEntry, catalog: FaultCatalog) -> str:
    if entry.error_class:
        return entry.error_class
    sched = catalog.schedule
    return classify_signature(entry.signature, sched.layout, sched, catalog=catalog).value


def class_totals(model: InferredModel, catalog: FaultCatalog) -> ClassReport:
    """Per-class sum of p; dispersion is sqrt(sum (p - class mean)^2)."""
    groups: dict[str, list[float]] = {c.value: [] for c in ErrorClass}
    for e in model:
        if not e.ok or not np.isfinite(e.p):
            continue
        groups[_entry_class(e, catalog)].append(e.p)
    rows = []
    for cls in ErrorClass:
        ps = np.asarray(groups[cls.value], dtype=float)
        if ps.size:
            disp = float(np.sqrt(np.sum((ps - ps.mean()) ** 2)))
            rows.append(ClassRow(cls.value, float(ps.sum()), disp, int(ps.size), float(ps[ps < 0].sum())))
        else:
            rows.append(ClassRow(cls.value, 0.0, 0.0, 0))
    return ClassReport(tuple(rows))


def expected_class_totals(
    schedule: CircuitSchedule,
    noise: NoiseParams,
    catalog: Optional[FaultCatalog] = None,
) -> ClassReport:
    """Class totals of the injected noise, from its first-order channel decomposition."""
    cat = catalog if catalog is not None else catalog_for(schedule)
    model = cycle_average(model_from_channels(channel_decomposition(schedule, noise)), schedule)
    return class_totals(annotate_model(model, schedule, cat), cat)


@dataclass(frozen=True)
class NuPoint:
    detectors: DetectorKey
    nu: int
    p: float
    stderr: Optional[float]
    error_class: str


@dataclass(frozen=True)
class NuReport:
    points: tuple[NuPoint, ...]
    spearman: float
    pvalue: float


def _canonical_view(model: InferredModel) -> dict[DetectorKey, tuple[float, Optional[float]]]:
    """Canonical key -> (p, stderr); absolute-tick models are averaged over translates."""
    if model.cycle_averaged:
        return {k: (e.p, e.stderr) for k, e in model.entries.items() if e.ok and np.isfinite(e.p)}
    acc: dict[DetectorKey, list[float]] = {}
    for e in model.entries.values():
        if e.ok and np.isfinite(e.p):
            acc.setdefault(e.signature.canonical().detectors, []).append(e.p)
    return {k: (float(np.mean(v)), None) for k, v in acc.items()}


def p_vs_nu(model: InferredModel, catalog: FaultCatalog) -> NuReport:
    """Catalog signatures only, time-like class omitted."""
    pts: list[NuPoint] = []
    for e in model:
        if not e.ok or not np.isfinite(e.p):
            continue
        canon = e.signature.canonical().detectors
        nu = catalog.nu(canon)
        if nu <= 0:
            continue
        cls = _entry_class(e, catalog)
        if cls == ErrorClass.T.value:
            continue
        pts.append(NuPoint(e.signature.detectors, nu, float(e.p), e.stderr, cls))
    if len(pts) >= 2 and len({p.nu for p in pts}) > 1:
        res = spearmanr([p.nu for p in pts], [p.p for p in pts])
        rho, pval = float(res[0]), float(res[1])
    else:
        rho, pval = float("nan"), float("nan")
    logger.info("p vs nu: %d points, spearman %.3f", len(pts), rho)
    return NuReport(tuple(pts), rho, pval)


@dataclass(frozen=True)
class XYPoint:
    location: str
    qubit: str
    p_x: float
    p_y: float
    stderr_x: Optional[float]
    stderr_y: Optional[float]


def xy_symmetry(model: InferredModel, catalog: FaultCatalog) -> list[XYPoint]:
    """Single-qubit locations whose X and Y faults each own a unique signature."""
    unique: dict[int, dict[str, DetectorKey]] = {}
    for entry in catalog.entries.values():
        if entry.nu != 1:
            continue
        (fault,) = entry.faults
        loc = catalog.location(fault)
        if loc.slot not in (SLOT_GATE1, SLOT_IDLE) or fault.pauli not in ("X", "Y"):
            continue
        if len(catalog.lookup(entry.signature.detectors)) != 1:
            continue
        unique.setdefault(loc.id, {})[fault.pauli] = entry.signature.detectors

    view = _canonical_view(model)
    out: list[XYPoint] = []
    for loc_id in sorted(unique):
        pair = unique[loc_id]
        if "X" not in pair or "Y" not in pair or pair["X"] == pair["Y"]:
            continue
        if pair["X"] not in view or pair["Y"] not in view:
            continue
        (px, sx), (py, sy) = view[pair["X"]], view[pair["Y"]]
        loc = catalog.schedule.locations[loc_id]
        out.append(XYPoint(loc.label, loc.qubits[0], px, py, sx, sy))
    return out


# ---------------------------------------------------------------------------
# Time correlations and T'
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DecayFit:
    dms: tuple[int, ...]
    covariances: tuple[float, ...]
    base: Optional[float]
    c0: Optional[float]
    residuals: tuple[float, ...] = ()
    note: str = ""


def same_ancilla_covariance(dataset: SyndromeDataset, max_dm: Optional[int] = None) -> dict[int, float]:
    """Mean covariance of bulk detectors on one ancilla dm cycles apart, for dm = 1..max_dm."""
    cov = covariance_matrix(dataset)
    index = dataset.detector_index()
    bulk = sorted(bulk_detectors(dataset.detector_list))
    if not bulk:
        return {}
    span = (max(d.tick for d in bulk) - min(d.tick for d in bulk)) // 2
    top = span if max_dm is None else min(max_dm, span)
    bulk_set = set(bulk)
    out: dict[int, float] = {}
    for dm in range(1, top + 1):
        vals = [
            cov[index[d], index[e]]
            for d in bulk
            for e in (d.shifted(2 * dm),)
            if e in bulk_set
        ]
        if vals:
            out[dm] = float(np.mean(vals))
    return out


def time_decay_fit(dataset: SyndromeDataset, max_dm: Optional[int] = None, min_dm: int = 3) -> DecayFit:
    """Least-squares line through log C(dm) for dm >= min_dm; C ~ c0 * base**dm."""
    curve = same_ancilla_covariance(dataset, max_dm)
    dms = tuple(sorted(curve))
    covs = tuple(curve[d] for d in dms)
    fit_dm = [d for d in dms if d >= min_dm and curve[d] > 0]
    skipped = [d for d in dms if d >= min_dm and curve[d] <= 0]
    if len(fit_dm) < 2:
        note = f"fit skipped: {len(fit_dm)} positive covariances for dm >= {min_dm}"
        logger.info("time decay: %s", note)
        return DecayFit(dms, covs, None, None, (), note)
    x = np.asarray(fit_dm, dtype=float)
    y = np.log([curve[d] for d in fit_dm])
    slope, intercept = np.polyfit(x, y, 1)
    resid = tuple(float(r) for r in y - (slope * x + intercept))
    note = f"{len(skipped)} non-positive covariances excluded" if skipped else ""
    base = float(math.exp(slope))
    logger.info("time decay: base %.4f over dm %s", base, fit_dm)
    return DecayFit(dms, covs, base, float(math.exp(intercept)), resid, note)


def _is_tprime(sig: ErrorSignature) -> bool:
    d = sig.detectors
    return len(d) == 2 and d[0].ancilla == d[1].ancilla and d[1].tick - d[0].tick == 4


@dataclass(frozen=True)
class TPrimeRow:
    ancilla: str
    cycle: int
    p: float
    stderr: Optional[float]


@dataclass(frozen=True)
class TPrimeAncilla:
    ancilla: str
    p_mean: float
    p_mc: Optional[float]


@dataclass(frozen=True)
class TPrimeReport:
    with_c: bool
    per_cycle: tuple[TPrimeRow, ...]
    per_ancilla: tuple[TPrimeAncilla, ...]

    def mean(self) -> float:
        vals = [r.p_mean for r in self.per_ancilla]
        return float(np.mean(vals)) if vals else float("nan")


def tprime_support(
    schedule: CircuitSchedule,
    with_c: bool,
    *,
    catalog: Optional[FaultCatalog] = None,
    c_time_span: int = C_TIME_SPAN_DEFAULT,
    c_nbr_sep: int = C_NBR_SEP_DEFAULT,
) -> list[ErrorSignature]:
    sigs = schedule_signatures(schedule)
    if with_c:
        cat = catalog if catalog is not None else catalog_for(schedule)
        c_class = generate_c_class(schedule.layout, schedule, c_time_span, c_nbr_sep, catalog=cat)
        sigs = sigs + translate_signatures(c_class, schedule)
    return sigs


def tprime_from_model(model: InferredModel, with_c: bool, noise: Optional[NoiseParams] = None) -> TPrimeReport:
    rows = [
        TPrimeRow(e.signature.detectors[0].ancilla, e.signature.detectors[0].cycle, float(e.p), e.stderr)
        for e in model
        if e.ok and np.isfinite(e.p) and _is_tprime(e.signature)
    ]
    rows.sort(key=lambda r: (r.ancilla, r.cycle))
    per_anc: list[TPrimeAncilla] = []
    for anc in sorted({r.ancilla for r in rows}):
        ps = [r.p for r in rows if r.ancilla == anc]
        per_anc.append(TPrimeAncilla(anc, float(np.mean(ps)), noise.p_mc_for(anc) if noise is not None else None))
    return TPrimeReport(with_c, tuple(rows), tuple(per_anc))


def tprime_analysis(
    dataset: SyndromeDataset,
    schedule: CircuitSchedule,
    *,
    noise: Optional[NoiseParams] = None,
    supports: Sequence[bool] = (False, True),
    catalog: Optional[FaultCatalog] = None,
    n_boot: int = N_BOOT_DEFAULT,
    seed: int = 0,
    c_time_span: int = C_TIME_SPAN_DEFAULT,
    c_nbr_sep: int = C_NBR_SEP_DEFAULT,
) -> dict[bool, TPrimeReport]:
    """T' probabilities per cycle and per ancilla for supports without and with the C class."""
    out: dict[bool, TPrimeReport] = {}
    for with_c in supports:
        support = build_support(
            tprime_support(schedule, with_c, catalog=catalog, c_time_span=c_time_span, c_nbr_sep=c_nbr_sep)
        )
        moments = estimate_support_moments(dataset, support, n_boot=n_boot, seed=seed)
        out[with_c] = tprime_from_model(infer_probabilities(moments, support), with_c, noise)
        logger.info("T' (%s C): mean %.5f", "with" if with_c else "without", out[with_c].mean())
    return out


@dataclass(frozen=True)
class MeanSyndromeRow:
    ancilla: str
    tick: int
    mean: float


def mean_syndrome_vs_cycle(dataset: SyndromeDataset) -> list[MeanSyndromeRow]:
    means = dataset.shots.mean(axis=0) if dataset.n_shots else np.zeros(dataset.n_detectors)
    rows = [MeanSyndromeRow(d.ancilla, d.tick, float(m)) for d, m in zip(dataset.detector_list, means)]
    rows.sort(key=lambda r: (r.ancilla, r.tick))
    return rows


# ---------------------------------------------------------------------------
# Bias and drift demonstrations
# ---------------------------------------------------------------------------

BIAS_NODES = tuple(DetectorCoord(f"S{i}", 0) for i in (1, 2, 3))


def bias_channels(p1: float = 0.03, p12: float = 0.025, p123: float = 0.01) -> list[SignatureChannel]:
    """Three syndrome elements: a single, a pair and a triple process."""
    a, b, c = BIAS_NODES
    return [
        SignatureChannel(ErrorSignature((a,)), p1),
        SignatureChannel(ErrorSignature((a, b)), p12),
        SignatureChannel(ErrorSignature((a, b, c)), p123),
    ]


def _all_subsets(nodes: Sequence[DetectorCoord]) -> list[ErrorSignature]:
    n = len(nodes)
    return [
        ErrorSignature(tuple(nodes[i] for i in range(n) if mask >> i & 1))
        for mask in range(1, 1 << n)
    ]


@dataclass(frozen=True)
class BiasDemo:
    channels: tuple[SignatureChannel, ...]
    full: InferredModel
    pairwise: InferredModel


def bias_demo(p1: float = 0.03, p12: float = 0.025, p123: float = 0.01) -> BiasDemo:
    """
    Exact moments of the three-process example, inverted once with the full
    support and once with only weight-1 and weight-2 signatures.
    """
    channels = bias_channels(p1, p12, p123)
    full = build_support(_all_subsets(BIAS_NODES))
    pairs = build_support([s for s in full.signatures if s.weight <= 2])
    moments = analytic_moments(channels, subset_closure(full))
    return BiasDemo(tuple(channels), infer_probabilities(moments, full), infer_pairwise_spitz(moments, pairs))


@dataclass(frozen=True)
class DriftReport:
    p: float
    epsilon: float
    p1: float
    p2: float
    p12: float
    shots: int = 0
    sim_p1: Optional[float] = None
    sim_p2: Optional[float] = None
    sim_p12: Optional[float] = None
    sim_stderr: Optional[float] = None


def drift_closed_form(p: float, epsilon: float = 1.0) -> tuple[float, float, float]:
    """Apparent (p1, p2, p12) for two independent elements at p(1+eps) and p(1-eps) in equal halves."""
    a = (1.0 - 2.0 * p) ** 2
    b = a + 4.0 * (epsilon * p) ** 2
    p12 = 0.5 - 0.5 * math.sqrt(a / b)
    p1 = 0.5 - 0.5 * math.sqrt(b)
    return p1, p1, p12


def drift_demo(
    p: float,
    epsilon: float = 1.0,
    *,
    n_shots: int = 0,
    seed: int = 0,
    n_boot: int = 0,
    threads: int = 1,
) -> DriftReport:
    if not (0.0 < p < 0.25):
        raise ValueError(f"p must be in (0, 0.25), got {p}")
    if not (0.0 <= epsilon <= 1.0):
        raise ValueError(f"epsilon must be in [0, 1], got {epsilon}")
    p1, p2, p12 = drift_closed_form(p, epsilon)
    report = DriftReport(p, epsilon, p1, p2, p12)
    if n_shots <= 0:
        return report

    a, b = BIAS_NODES[:2]
    channels = [
        DriftChannel(ErrorSignature((a,)), p * (1 + epsilon), p * (1 - epsilon)),
        DriftChannel(ErrorSignature((b,)), p * (1 + epsilon), p * (1 - epsilon)),
    ]
    data = inject_drift(channels, (a, b), n_shots, 0.5, seed, threads=threads)
    support = build_support([ErrorSignature((a,)), ErrorSignature((b,)), ErrorSignature((a, b))])
    model = infer_pairwise_spitz(estimate_moments(data, subset_closure(support), n_boot=n_boot, seed=seed), support)
    pair = model.get((a, b))
    logger.info("drift p=%.4f eps=%.2f: closed p12=%.6f simulated %.6f", p, epsilon, p12, pair.p)
    return DriftReport(
        p, epsilon, p1, p2, p12, n_shots,
        model.p((a,)), model.p((b,)), pair.p, pair.stderr,
    )


# ---------------------------------------------------------------------------
# Random-channel validation and heterogeneity sweep
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ValidationRow:
    detectors: DetectorKey
    true_p: float
    inferred_p: float
    stderr: Optional[float]

    @property
    def z(self) -> float:
        if self.stderr is None or self.stderr <= 0 or not np.isfinite(self.inferred_p):
            return float("nan")
        return (self.inferred_p - self.true_p) / self.stderr


def validate_random_channels(
    n_channels: int,
    max_weight: int,
    n_shots: int,
    seed: int,
    *,
    n_nodes: int = 60,
    p_range: tuple[float, float] = (0.001, 0.2),
    n_boot: int = N_BOOT_DEFAULT,
    threads: int = 1,
) -> list[ValidationRow]:
    """Sample random independent channels, infer them back over their own support."""
    nodes, channels = random_channels(n_channels, max_weight, p_range, n_nodes, seed)
    data = sample_signature_channels(channels, nodes, n_shots, seed, threads=threads)
    support = build_support([c.signature for c in channels])
    model = infer_probabilities(estimate_support_moments(data, support, n_boot=n_boot, seed=seed), support)
    rows = []
    for c in channels:
        e = model.get(c.signature.detectors)
        rows.append(ValidationRow(c.signature.detectors, c.p, e.p, e.stderr))
    within2 = sum(1 for r in rows if abs(r.z) <= 2)
    logger.info("validation: %d channels, %d within 2 stderr", len(rows), within2)
    return rows


@dataclass(frozen=True)
class DeltaGammaRow:
    delta: float
    point: GammaPoint


def delta_gamma_sweep(
    distance: int,
    cycles: int,
    deltas: Sequence[float],
    gammas: Sequence[float],
    n_shots: int,
    seed: int,
    *,
    basis: str = KIND_Z,
    base_noise: Optional[NoiseParams] = None,
    threads: int = 1,
    workers: int = 1,
) -> list[DeltaGammaRow]:
    """gamma_scan on heterogeneous noise for each spread delta; weights from the injected channels."""
    base = base_noise if base_noise is not None else NoiseParams()
    layout = build_layout(distance)
    out: list[DeltaGammaRow] = []
    for i, delta in enumerate(deltas):
        noise = replace(base, mode=MODE_HETEROGENEOUS, delta=float(delta), seed=seed + i)
        schedule = build_schedule(layout, cycles, basis, idle_rot_us=noise.idle_rot_us, idle_cz_us=noise.idle_cz_us)
        data = simulate_circuit(schedule, noise, n_shots, [seed, i], threads=threads)
        model = model_from_channels(channel_decomposition(schedule, noise))
        for point in gamma_scan(data, model, schedule, gammas, workers=workers):
            out.append(DeltaGammaRow(float(delta), point))
    return out
