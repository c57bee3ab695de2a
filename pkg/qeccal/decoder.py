# qeccal:decoder.py

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
Minimum-weight perfect matching decoding.

Each detector kind is decoded on its own syndrome graph; the X graph yields
the X_L flip and the Z graph the Z_L flip. Correlated decoding decodes one
kind first and uses its single-edge matches to raise the probability of the
complementary edges of inferred Y signatures before decoding the other kind.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import networkx as nx
import numpy as np

from .catalog import FaultCatalog, catalog_for
from .code_model import (
    KIND_X,
    KIND_Z,
    KINDS,
    CircuitSchedule,
    DetectorCoord,
    build_layout,
    build_schedule,
    kind_of,
    other_kind,
)
from .config import DM_MAX_DEFAULT, GAMMA_DEFAULT
from .correlation_inference import InferredModel, model_from_channels
from .matching_graph import (
    AuxGraph,
    WeightMatrix,
    build_aux_graph,
    build_syndrome_graph,
    compute_weights,
    uniform_model,
)
from .noise_sim import NoiseParams, SyndromeDataset, channel_decomposition, simulate_circuit

logger = logging.getLogger(__name__)

_CACHE_LIMIT = 200_000
_WEIGHT_CACHE_LIMIT = 4096


@dataclass(frozen=True)
class Matching:
    pairs: tuple[tuple[int, int], ...]    # aux-graph node pairs, boundary-boundary pairs dropped
    weight: float
    parities: tuple[int, ...]

    @property
    def flip(self) -> bool:
        return bool(sum(self.parities) % 2)


EMPTY_MATCHING = Matching((), 0.0, ())


@dataclass(frozen=True)
class DecodeResult:
    x_flip: bool
    z_flip: bool
    matchings: dict[str, Matching]
    updated_edges: tuple[tuple[str, int, int, float], ...] = ()   # (kind, u, v, new p)

    @property
    def flips(self) -> tuple[bool, bool]:
        return self.x_flip, self.z_flip


@dataclass(frozen=True)
class CorrelatedConfig:
    gamma: float = GAMMA_DEFAULT
    first_kind: str = KIND_X
    max_iterations: int = 1

    def __post_init__(self) -> None:
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must be in [0, 1], got {self.gamma}")
        if self.first_kind not in KINDS:
            raise ValueError(f"first_kind must be 'X' or 'Z', got {self.first_kind!r}")
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations}")


# ---------------------------------------------------------------------------
# Matching
# ---------------------------------------------------------------------------

def mwpm(syndrome_graph: nx.Graph) -> Matching:
    """Exact blossom matching; boundary copies make every graph perfectly matchable."""
    n = syndrome_graph.number_of_nodes()
    if n == 0:
        return EMPTY_MATCHING
    if n % 2:
        raise ValueError(f"syndrome graph has an odd number of nodes ({n})")

    matched = nx.min_weight_matching(syndrome_graph, weight="weight")
    if 2 * len(matched) != n:
        raise ValueError(f"matching covers {2 * len(matched)} of {n} nodes")

    pairs: list[tuple[int, int]] = []
    parities: list[int] = []
    total = 0.0
    for a, b in sorted(tuple(sorted(e)) for e in matched):
        data = syndrome_graph.edges[a, b]
        total += data["weight"]
        if data["ends"] is None:
            continue
        u, v = data["ends"]
        pairs.append((min(u, v), max(u, v)))
        parities.append(int(data["parity"]))
    return Matching(tuple(pairs), total, tuple(parities))


# ---------------------------------------------------------------------------
# Standard decoder
# ---------------------------------------------------------------------------

class MatchingDecoder:
    """Per-kind graphs and weights over one schedule's detector list."""

    def __init__(self, graphs: dict[str, AuxGraph], weights: dict[str, WeightMatrix]) -> None:
        self.graphs = graphs
        self.weights = weights
        schedule = graphs[KIND_X].schedule
        self.detector_list = schedule.detector_list
        self.schedule = schedule
        self._kind_cols = {
            kind: np.array([i for i, d in enumerate(self.detector_list) if kind_of(d.ancilla) == kind], dtype=np.intp)
            for kind in KINDS
        }
        self._kind_dets = {kind: [self.detector_list[i] for i in cols] for kind, cols in self._kind_cols.items()}
        self._cache: dict[tuple[str, tuple[int, ...]], Matching] = {}
        self._index = {kind: g.detector_index() for kind, g in graphs.items()}

    @classmethod
    def from_model(
        cls,
        model: InferredModel,
        schedule: CircuitSchedule,
        dm_max: int = DM_MAX_DEFAULT,
        catalog: Optional[FaultCatalog] = None,
    ) -> "MatchingDecoder":
        cat = catalog if catalog is not None else catalog_for(schedule)
        graphs = {kind: build_aux_graph(model, kind, min(dm_max, schedule.cycles), cat, schedule) for kind in KINDS}
        weights = {kind: compute_weights(g) for kind, g in graphs.items()}
        return cls(graphs, weights)

    def __getstate__(self) -> dict:
        state = dict(self.__dict__)
        state["_cache"] = {}
        return state

    def defects(self, shot: np.ndarray, kind: str) -> list[DetectorCoord]:
        cols = self._kind_cols[kind]
        hits = np.flatnonzero(np.asarray(shot)[cols])
        return [self._kind_dets[kind][i] for i in hits]

    def match(self, kind: str, defects: Sequence[DetectorCoord], weights: Optional[WeightMatrix] = None) -> Matching:
        if not defects:
            return EMPTY_MATCHING
        if weights is not None:
            return mwpm(build_syndrome_graph(self.graphs[kind], weights, defects))
        key = (kind, tuple(sorted(self._index[kind][d] for d in defects)))
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        result = mwpm(build_syndrome_graph(self.graphs[kind], self.weights[kind], defects))
        if len(self._cache) < _CACHE_LIMIT:
            self._cache[key] = result
        return result

    def decode_shot(self, shot: np.ndarray) -> DecodeResult:
        if len(shot) != len(self.detector_list):
            raise ValueError(f"shot width {len(shot)} does not match {len(self.detector_list)} detectors")
        m = {kind: self.match(kind, self.defects(shot, kind)) for kind in KINDS}
        return DecodeResult(m[KIND_X].flip, m[KIND_Z].flip, m)


def decode_shot(graphs: dict[str, AuxGraph], weights: dict[str, WeightMatrix], shot: np.ndarray) -> DecodeResult:
    return MatchingDecoder(graphs, weights).decode_shot(shot)


# ---------------------------------------------------------------------------
# Correlated decoder
# ---------------------------------------------------------------------------

@dataclass
class _YIndex:
    # flagging edge on one kind -> [(complementary edge, p_Y)]
    by_edge: dict[tuple[str, tuple[int, int]], list[tuple[tuple[int, int], float]]] = field(default_factory=dict)

    def candidates(self, kind: str, edge: tuple[int, int]) -> list[tuple[tuple[int, int], float]]:
        return self.by_edge.get((kind, edge), [])


def _edge_key(graph: AuxGraph, index: dict[DetectorCoord, int], dets: Sequence[DetectorCoord]) -> Optional[tuple[int, int]]:
    if len(dets) == 2:
        u, v = index[dets[0]], index[dets[1]]
    elif len(dets) == 1:
        u = index[dets[0]]
        v = graph.boundary_index(graph.schedule.layout.boundary_of(dets[0].ancilla))
    else:
        return None
    return (min(u, v), max(u, v))


def build_y_index(model: InferredModel, graphs: dict[str, AuxGraph]) -> _YIndex:
    """Mixed signatures placed on the schedule, keyed by their projection on each kind."""
    schedule = graphs[KIND_X].schedule
    present = set(schedule.detector_list)
    indices = {kind: g.detector_index() for kind, g in graphs.items()}
    out = _YIndex()
    placed = 0
    for entry in model:
        if not entry.ok or not np.isfinite(entry.p) or entry.p <= 0:
            continue
        sig = entry.signature
        parts = {kind: sig.restrict(kind) for kind in KINDS}
        if not all(parts.values()) or any(len(p) > 2 for p in parts.values()):
            continue
        if model.cycle_averaged:
            t0 = 2 * (min(d.tick for d in sig.detectors) // 2)
            shifts = [s - t0 for s in range(0, schedule.final_tick + 1, 2)]
        else:
            shifts = [0]
        for shift in shifts:
            moved = {kind: tuple(d.shifted(shift) for d in p) for kind, p in parts.items()}
            if not all(d in present for p in moved.values() for d in p):
                continue
            keys = {kind: _edge_key(graphs[kind], indices[kind], p) for kind, p in moved.items()}
            for kind in KINDS:
                other = other_kind(kind)
                out.by_edge.setdefault((kind, keys[kind]), []).append((keys[other], float(entry.p)))
            placed += 1
    logger.info("correlated index: %d mixed placements over %d flagging edges", placed, len(out.by_edge))
    return out


def conditional_probability(p_y: float, degenerate_total: float, p_pure: float) -> float:
    den = degenerate_total + p_pure
    return p_y / den if den > 0 else 0.0


def interpolated_weight(p_std: float, p_cond: float, gamma: float) -> float:
    return -(1.0 - gamma) * math.log(p_std) - gamma * math.log(p_cond)


class CorrelatedDecoder:
    def __init__(self, base: MatchingDecoder, model: InferredModel, cfg: CorrelatedConfig) -> None:
        self.base = base
        self.cfg = cfg
        self.y_index = build_y_index(model, base.graphs)
        self._weights_cache: dict[tuple[str, tuple], Optional[WeightMatrix]] = {}
        self.skipped_updates: dict[str, int] = {kind: 0 for kind in KINDS}

    def __getstate__(self) -> dict:
        state = dict(self.__dict__)
        state["_weights_cache"] = {}
        return state

    @property
    def detector_list(self):
        return self.base.detector_list

    def updates_from(
        self, kind: str, matching: Matching, weights: Optional[WeightMatrix] = None
    ) -> dict[tuple[int, int], float]:
        """
        Complementary-edge conditional probabilities flagged by the single-edge
        matches of `kind`. Hops are counted on the weights the matching used.
        """
        graph = self.base.graphs[kind]
        hops = (weights if weights is not None else self.base.weights[kind]).path_length
        updates: dict[tuple[int, int], float] = {}
        for u, v in matching.pairs:
            if hops[u, v] != 1:
                continue
            cands = self.y_index.candidates(kind, (u, v))
            if not cands:
                continue
            edge = graph.edge(u, v)
            p_pure = edge.p_pure if edge is not None else 0.0
            total = sum(p for _, p in cands)
            for comp, p_y in cands:
                p_cond = conditional_probability(p_y, total, p_pure)
                if p_cond > updates.get(comp, 0.0):
                    updates[comp] = p_cond
        return updates

    def _updated_weights(self, kind: str, updates: dict[tuple[int, int], float]) -> Optional[WeightMatrix]:
        key = (kind, tuple(sorted(updates.items())))
        if key in self._weights_cache:
            return self._weights_cache[key]
        graph = self.base.graphs[kind]
        gamma = self.cfg.gamma
        edges = dict(graph.edges)
        for (u, v), p_cond in updates.items():
            e = edges.get((u, v))
            if e is None or e.p <= 0 or p_cond <= 0:
                # first skip per kind is a warning, the rest go to debug
                log = logger.debug if self.skipped_updates[kind] else logger.warning
                log("%s graph: flagged edge %s-%s absent, update skipped", kind, graph.node_label(u), graph.node_label(v))
                self.skipped_updates[kind] += 1
                continue
            p_new = math.exp(-interpolated_weight(e.p, p_cond, gamma))
            edges[(u, v)] = replace(e, p=min(p_new, 0.5 - 1e-12))
        try:
            weights = compute_weights(replace(graph, edges=edges))
        except ValueError as err:
            logger.warning("%s graph: updated weights rejected (%s), standard weights kept", kind, err)
            weights = None
        if len(self._weights_cache) < _WEIGHT_CACHE_LIMIT:
            self._weights_cache[key] = weights
        return weights

    def decode_shot(self, shot: np.ndarray) -> DecodeResult:
        std = self.base.decode_shot(shot)
        if self.cfg.gamma == 0.0:
            return std

        first = self.cfg.first_kind
        second = other_kind(first)
        defects = {kind: self.base.defects(shot, kind) for kind in KINDS}
        matchings = dict(std.matchings)
        updated: list[tuple[str, int, int, float]] = []
        used = dict(self.base.weights)

        source, target = first, second
        for _ in range(2 * self.cfg.max_iterations - 1):
            updates = self.updates_from(source, matchings[source], used[source])
            if updates and defects[target]:
                w = self._updated_weights(target, updates)
                if w is not None:
                    matchings[target] = self.base.match(target, defects[target], w)
                    used[target] = w
                    updated.extend((target, u, v, p) for (u, v), p in sorted(updates.items()))
            source, target = target, source
        return DecodeResult(matchings[KIND_X].flip, matchings[KIND_Z].flip, matchings, tuple(updated))


def correlated_decode(
    shot: np.ndarray,
    graphs: dict[str, AuxGraph],
    weights: dict[str, WeightMatrix],
    model: InferredModel,
    cfg: CorrelatedConfig,
) -> DecodeResult:
    return CorrelatedDecoder(MatchingDecoder(graphs, weights), model, cfg).decode_shot(shot)


# ---------------------------------------------------------------------------
# Datasets and fidelity
# ---------------------------------------------------------------------------

def _decode_rows(decoder, rows: np.ndarray) -> np.ndarray:
    out = np.zeros((rows.shape[0], 2), dtype=bool)
    for i, row in enumerate(rows):
        out[i] = decoder.decode_shot(row).flips
    return out


def decode_dataset(dataset: SyndromeDataset, decoder, workers: int = 1) -> np.ndarray:
    """Decoded (x_flip, z_flip) per shot, in shot order. Each distinct syndrome is decoded once."""
    if tuple(dataset.detector_list) != tuple(decoder.detector_list):
        raise ValueError("dataset detector list does not match the decoder's schedule")
    if dataset.n_shots == 0:
        return np.zeros((0, 2), dtype=bool)
    unique, inverse = np.unique(dataset.shots, axis=0, return_inverse=True)
    inverse = np.asarray(inverse).reshape(-1)

    if workers <= 1 or unique.shape[0] < 2 * workers:
        decoded = _decode_rows(decoder, unique)
    else:
        chunks = np.array_split(unique, workers)
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(_decode_rows, [decoder] * len(chunks), chunks))
        decoded = np.concatenate(parts, axis=0)
    logger.info("decoded %d shots (%d distinct syndromes)", dataset.n_shots, unique.shape[0])
    return decoded[inverse]


def _basis_column(dataset: SyndromeDataset) -> int:
    basis = dataset.provenance.get("basis", KIND_Z)
    return 0 if basis == KIND_X else 1


@dataclass(frozen=True)
class FidelityResult:
    fidelity: float
    stderr: float
    n_shots: int
    successes: np.ndarray = field(repr=False, compare=False, default=None)


def evaluate_fidelity(dataset: SyndromeDataset, decoder, workers: int = 1, basis: Optional[str] = None) -> FidelityResult:
    """Fraction of shots whose decoded flip of the measured logical equals the truth."""
    if dataset.truth is None:
        raise ValueError("dataset carries no truth labels")
    col = _basis_column(dataset) if basis is None else (0 if basis == KIND_X else 1)
    decoded = decode_dataset(dataset, decoder, workers)
    ok = decoded[:, col] == dataset.truth[:, col]
    n = dataset.n_shots
    f = float(ok.mean()) if n else float("nan")
    se = math.sqrt(f * (1 - f) / n) if n else float("nan")
    return FidelityResult(f, se, n, ok)


def relative_improvement(f_mod: float, f_std: float) -> float:
    mean = 0.5 * (f_mod + f_std)
    return (f_mod - f_std) / mean if mean > 0 else 0.0


@dataclass(frozen=True)
class FidelityComparison:
    standard: FidelityResult
    modified: FidelityResult
    relative_improvement: float
    stderr: float


def compare_fidelity(dataset: SyndromeDataset, std_decoder, mod_decoder, workers: int = 1) -> FidelityComparison:
    """Relative improvement of mod over std; stderr from the paired per-shot differences."""
    a = evaluate_fidelity(dataset, std_decoder, workers)
    b = evaluate_fidelity(dataset, mod_decoder, workers)
    diff = b.successes.astype(float) - a.successes.astype(float)
    mean = 0.5 * (a.fidelity + b.fidelity)
    n = len(diff)
    se_diff = float(diff.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    se = se_diff / mean if mean > 0 else 0.0
    return FidelityComparison(a, b, relative_improvement(b.fidelity, a.fidelity), se)


@dataclass(frozen=True)
class GammaPoint:
    gamma: float
    fidelity: float
    stderr: float
    relative_improvement: float
    relative_stderr: float


def gamma_scan(
    dataset: SyndromeDataset,
    model: InferredModel,
    schedule: CircuitSchedule,
    gammas: Sequence[float],
    *,
    dm_max: int = DM_MAX_DEFAULT,
    first_kind: str = KIND_X,
    catalog: Optional[FaultCatalog] = None,
    workers: int = 1,
) -> list[GammaPoint]:
    base = MatchingDecoder.from_model(model, schedule, dm_max, catalog)
    out: list[GammaPoint] = []
    for g in gammas:
        mod = CorrelatedDecoder(base, model, CorrelatedConfig(gamma=float(g), first_kind=first_kind))
        cmp = compare_fidelity(dataset, base, mod, workers)
        out.append(GammaPoint(float(g), cmp.modified.fidelity, cmp.modified.stderr, cmp.relative_improvement, cmp.stderr))
        logger.info("gamma=%.3f F=%.5f rel=%.5f +- %.5f", g, cmp.modified.fidelity, cmp.relative_improvement, cmp.stderr)
    return out


@dataclass(frozen=True)
class CyclePoint:
    cycles: int
    fidelity: float
    stderr: float
    uniform_fidelity: Optional[float] = None
    uniform_stderr: Optional[float] = None


def fidelity_vs_cycles(
    distance: int,
    cycles: Sequence[int],
    noise: NoiseParams,
    n_shots: int,
    seed: int,
    *,
    basis: str = KIND_Z,
    dm_max: int = DM_MAX_DEFAULT,
    uniform_p: Optional[float] = None,
    threads: int = 1,
    workers: int = 1,
) -> list[CyclePoint]:
    """
    Simulate and decode each N with weights from the first-order channel
    decomposition; with uniform_p, also decode with a uniform-weight graph.
    """
    layout = build_layout(distance)
    out: list[CyclePoint] = []
    for n in cycles:
        schedule = build_schedule(layout, n, basis, idle_rot_us=noise.idle_rot_us, idle_cz_us=noise.idle_cz_us)
        data = simulate_circuit(schedule, noise, n_shots, seed=[seed, n], threads=threads)
        model = model_from_channels(channel_decomposition(schedule, noise))
        dec = MatchingDecoder.from_model(model, schedule, dm_max)
        res = evaluate_fidelity(data, dec, workers)
        point = CyclePoint(n, res.fidelity, res.stderr)
        if uniform_p is not None:
            uni = MatchingDecoder.from_model(uniform_model(model, uniform_p), schedule, dm_max)
            ures = evaluate_fidelity(data, uni, workers)
            point = replace(point, uniform_fidelity=ures.fidelity, uniform_stderr=ures.stderr)
        logger.info("N=%d F=%.5f +- %.5f", n, res.fidelity, res.stderr)
        out.append(point)
    return out
