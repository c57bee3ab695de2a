# qeccal:matching_graph.py

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
Decoding graphs per detector kind.

Nodes are the schedule's detectors of one kind followed by the kind's two
boundary pseudo-nodes. Edge weights come from the full path sum
w = -ln((I - A)^-1 - I), where boundary rows of A are zero so paths end at a
boundary. Logical parity of a pair follows the most likely single path,
found by Dijkstra over (node, parity) states.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Optional

import networkx as nx
import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .catalog import FaultCatalog
from .code_model import (
    BOUNDARIES_BY_KIND,
    KIND_X,
    KINDS,
    NORTH,
    WEST,
    CircuitSchedule,
    DetectorCoord,
    DetectorKey,
    kind_of,
)
from .correlation_inference import InferredModel, ModelEntry

logger = logging.getLogger(__name__)

UNREACHABLE_WEIGHT = 1e6
_P_CAP = 0.5 - 1e-12


def combine_probabilities(p1: float, p2: float) -> float:
    """Probability that exactly one of two independent processes fires."""
    return p1 * (1.0 - p2) + p2 * (1.0 - p1)


@dataclass(frozen=True)
class GraphEdge:
    u: int
    v: int
    p: float
    parity: int = 0
    p_pure: float = 0.0                   # single-kind signatures only
    source: Optional[DetectorKey] = None  # canonical key of the largest contribution
    source_p: float = 0.0


@dataclass(frozen=True, eq=False)
class AuxGraph:
    kind: str
    schedule: CircuitSchedule
    detectors: tuple[DetectorCoord, ...]
    boundaries: tuple[str, str]
    edges: dict[tuple[int, int], GraphEdge]
    dm_max: int
    skipped: int = 0

    @property
    def n_nodes(self) -> int:
        return len(self.detectors) + 2

    @property
    def n_detectors(self) -> int:
        return len(self.detectors)

    def is_boundary(self, i: int) -> bool:
        return i >= len(self.detectors)

    def node_label(self, i: int) -> str:
        if self.is_boundary(i):
            return f"B{self.boundaries[i - len(self.detectors)]}"
        return str(self.detectors[i])

    def boundary_index(self, boundary: str) -> int:
        return len(self.detectors) + self.boundaries.index(boundary)

    def detector_index(self) -> dict[DetectorCoord, int]:
        return {d: i for i, d in enumerate(self.detectors)}

    def edge(self, u: int, v: int) -> Optional[GraphEdge]:
        return self.edges.get((min(u, v), max(u, v)))

    def adjacency(self) -> np.ndarray:
        """Symmetric edge-probability matrix over all nodes."""
        a = np.zeros((self.n_nodes, self.n_nodes))
        for (u, v), e in self.edges.items():
            a[u, v] = e.p
            a[v, u] = e.p
        return a


@dataclass(frozen=True, eq=False)
class WeightMatrix:
    graph: AuxGraph
    w: np.ndarray
    parity: np.ndarray          # logical parity of the most likely path
    path_length: np.ndarray     # edges on that path, 0 where unreachable
    boundary_choice: np.ndarray  # per detector: cheaper boundary column

    def boundary_weight(self, i: int) -> tuple[float, int, int]:
        """(weight, parity, boundary node) of the cheaper boundary for detector i."""
        b = int(self.boundary_choice[i])
        return float(self.w[i, b]), int(self.parity[i, b]), b


# ---------------------------------------------------------------------------
# Graph construction
# ---------------------------------------------------------------------------

def _model_projections(model: InferredModel, kind: str, schedule: CircuitSchedule):
    """Yield (entry, projected detectors, pure) over every placement of each entry."""
    present = set(schedule.detector_list)
    for entry in model:
        if not entry.ok or not np.isfinite(entry.p):
            continue
        sig = entry.signature
        proj = sig.restrict(kind)
        if not proj:
            continue
        pure = len(proj) == sig.weight
        if model.cycle_averaged:
            base = tuple(d.shifted(-2 * (min(x.tick for x in sig.detectors) // 2)) for d in proj)
            for shift in range(0, schedule.final_tick + 1, 2):
                moved = tuple(d.shifted(shift) for d in base)
                if all(d in present for d in moved):
                    yield entry, moved, pure
        elif all(d in present for d in proj):
            yield entry, proj, pure


def build_aux_graph(
    model: InferredModel,
    kind: str,
    dm_max: int,
    catalog: Optional[FaultCatalog],
    schedule: CircuitSchedule,
) -> AuxGraph:
    if kind not in KINDS:
        raise ValueError(f"kind must be 'X' or 'Z', got {kind!r}")
    if dm_max < 1 or dm_max > schedule.cycles:
        raise ValueError(f"dm_max must be in [1, {schedule.cycles}], got {dm_max}")
    if not model.cycle_averaged:
        logger.info("building %s graph from a model with absolute ticks", kind)

    detectors = schedule.detectors_of(kind)
    index = {d: i for i, d in enumerate(detectors)}
    boundaries = BOUNDARIES_BY_KIND[kind]
    layout = schedule.layout

    acc: dict[tuple[int, int], dict] = {}
    skipped = 0
    for entry, proj, pure in _model_projections(model, kind, schedule):
        p = min(max(entry.p, 0.0), _P_CAP)
        if len(proj) > 2:
            skipped += 1
            continue
        if len(proj) == 2:
            if proj[1].tick - proj[0].tick > 2 * dm_max:
                skipped += 1
                continue
            u, v = index[proj[0]], index[proj[1]]
        else:
            u = index[proj[0]]
            v = len(detectors) + boundaries.index(layout.boundary_of(proj[0].ancilla))
        key = (min(u, v), max(u, v))
        slot = acc.setdefault(key, {"p": 0.0, "pure": 0.0, "source": None, "source_p": -1.0})
        slot["p"] = combine_probabilities(slot["p"], p)
        if pure:
            slot["pure"] = combine_probabilities(slot["pure"], p)
        if p > slot["source_p"]:
            slot["source_p"] = p
            slot["source"] = entry.signature.canonical().detectors

    edges = {
        key: GraphEdge(key[0], key[1], min(s["p"], _P_CAP), 0, s["pure"], s["source"], max(s["source_p"], 0.0))
        for key, s in sorted(acc.items())
        if s["p"] > 0
    }
    if skipped:
        logger.warning("%s graph: %d projections skipped (weight > 2 or beyond dm_max)", kind, skipped)
    graph = AuxGraph(kind, schedule, detectors, boundaries, edges, dm_max, skipped)
    graph = assign_logical_parities(graph, layout, catalog)
    logger.info("%s graph: %d detectors, %d edges", kind, len(detectors), len(edges))
    return graph


def _heuristic_parity(graph: AuxGraph, edge: GraphEdge) -> int:
    """Boundary edges toward the side carrying the complementary logical flip it."""
    crossing = WEST if graph.kind == KIND_X else NORTH
    for n in (edge.u, edge.v):
        if graph.is_boundary(n) and graph.boundaries[n - graph.n_detectors] == crossing:
            return 1
    return 0


def assign_logical_parities(graph: AuxGraph, layout, catalog: Optional[FaultCatalog]) -> AuxGraph:
    """
    Parity of each edge = logical flip (of the logical this kind protects) of
    the catalog fault behind the edge's dominant source signature; edges with
    no catalog fault fall back to the boundary heuristic.
    """
    edges: dict[tuple[int, int], GraphEdge] = {}
    fallback = 0
    for key, e in graph.edges.items():
        parity: Optional[int] = None
        if catalog is not None and e.source is not None:
            dom = catalog.dominant(e.source)
            if dom is not None:
                flip = dom.signature.logical_flip_x if graph.kind == KIND_X else dom.signature.logical_flip_z
                parity = int(flip)
        if parity is None:
            fallback += 1
            parity = _heuristic_parity(graph, e)
        edges[key] = replace(e, parity=parity)
    if fallback:
        logger.info("%s graph: %d edges use the boundary parity heuristic", graph.kind, fallback)
    return replace(graph, edges=edges)


def uniform_model(model: InferredModel, p: float) -> InferredModel:
    """Same support, every probability set to p."""
    entries = {k: replace(e, p=float(p), stderr=None) for k, e in model.entries.items() if e.ok}
    return InferredModel(entries, model.support_hash, model.shots, model.cycle_averaged)


# ---------------------------------------------------------------------------
# Weights
# ---------------------------------------------------------------------------

def _path_adjacency(graph: AuxGraph) -> np.ndarray:
    a = graph.adjacency()
    a[graph.n_detectors:, :] = 0.0
    return a


def compute_weights(graph: AuxGraph) -> WeightMatrix:
    n = graph.n_nodes
    nd = graph.n_detectors
    a = _path_adjacency(graph)
    if n and a.any():
        rho = float(np.max(np.abs(np.linalg.eigvals(a))))
        if rho >= 1.0:
            raise ValueError(f"{graph.kind} graph: spectral radius {rho:.4f} >= 1, path sums diverge")
    try:
        m = np.linalg.solve(np.eye(n) - a, np.eye(n)) - np.eye(n)
    except np.linalg.LinAlgError as e:
        raise ValueError(f"{graph.kind} graph: I - A is singular") from e

    det = m[:nd, :nd]
    m[:nd, :nd] = 0.5 * (det + det.T)
    with np.errstate(divide="ignore"):
        w = np.where(m > 0, -np.log(np.where(m > 0, m, 1.0)), np.inf)
    w[nd:, :] = w[:, nd:].T
    np.fill_diagonal(w, np.inf)

    parity, hops = shortest_path_parity(graph)
    if nd:
        bw = w[:nd, nd:]
        choice = nd + np.argmin(bw, axis=1)
    else:
        choice = np.zeros(0, dtype=np.intp)
    return WeightMatrix(graph, w, parity, hops, choice)


def first_order_weights(graph: AuxGraph) -> np.ndarray:
    """
    Lowest-order path sum: for each pair, the sum of path products over the
    paths with the fewest edges. Agrees with compute_weights to O(p^2).
    """
    n = graph.n_nodes
    a = _path_adjacency(graph)
    out = np.zeros((n, n))
    found = np.zeros((n, n), dtype=bool)
    power = np.eye(n)
    for _ in range(n):
        power = power @ a
        new = (power > 0) & ~found
        out[new] = power[new]
        found |= new
        if found.all():
            break
    out[graph.n_detectors:, :] = out[:, graph.n_detectors:].T
    with np.errstate(divide="ignore"):
        w = np.where(out > 0, -np.log(np.where(out > 0, out, 1.0)), np.inf)
    np.fill_diagonal(w, np.inf)
    return w


def shortest_path_parity(graph: AuxGraph) -> tuple[np.ndarray, np.ndarray]:
    """
    Logical parity and edge count of the most likely path between every pair,
    from Dijkstra on the doubled (node, parity) graph with weights -ln p.
    Boundaries are sinks.
    """
    n = graph.n_nodes
    nd = graph.n_detectors
    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    for (u, v), e in graph.edges.items():
        if e.p <= 0:
            continue
        cost = -math.log(e.p)
        for a, b in ((u, v), (v, u)):
            if graph.is_boundary(a):
                continue
            for s in (0, 1):
                rows.append(a + s * n)
                cols.append(b + (s ^ e.parity) * n)
                vals.append(cost)
    parity = np.zeros((n, n), dtype=np.int8)
    hops = np.zeros((n, n), dtype=np.int64)
    if not vals or nd == 0:
        return parity, hops

    states = csr_matrix((vals, (rows, cols)), shape=(2 * n, 2 * n))
    dist, pred = dijkstra(states, directed=True, indices=np.arange(nd), return_predecessors=True)
    d0, d1 = dist[:, :n], dist[:, n:]
    odd = d1 < d0
    reachable = np.isfinite(np.minimum(d0, d1))
    reachable[np.arange(nd), np.arange(nd)] = False
    parity[:nd] = np.where(reachable & odd, 1, 0)

    # walk predecessors back to the source for every reachable pair at once
    src = np.repeat(np.arange(nd)[:, None], n, axis=1)
    cur = np.where(odd, np.arange(n)[None, :] + n, np.arange(n)[None, :])
    steps = np.zeros((nd, n), dtype=np.int64)
    active = reachable.copy()
    for _ in range(2 * n):
        if not active.any():
            break
        cur[active] = pred[src[active], cur[active]]
        steps[active] += 1
        active &= cur != src
    hops[:nd] = np.where(reachable, steps, 0)
    parity[nd:, :nd] = parity[:nd, nd:].T
    hops[nd:, :nd] = hops[:nd, nd:].T
    return parity, hops


# ---------------------------------------------------------------------------
# Syndrome graph
# ---------------------------------------------------------------------------

def _finite(w: float) -> float:
    return float(w) if np.isfinite(w) else UNREACHABLE_WEIGHT


def build_syndrome_graph(graph: AuxGraph, weights: WeightMatrix, defects) -> nx.Graph:
    """
    Complete graph over the defects plus one boundary copy per defect.
    Edges carry weight, logical parity and the aux-graph node pair they stand for.
    """
    index = graph.detector_index()
    idx = []
    for d in defects:
        if d not in index:
            raise ValueError(f"defect {d} is not a {graph.kind} detector of this graph")
        idx.append(index[d])
    idx = sorted(set(idx))

    g = nx.Graph()
    for i in idx:
        g.add_node(("d", i))
    for i in idx:
        g.add_node(("b", i))

    for a_pos, i in enumerate(idx):
        for j in idx[a_pos + 1:]:
            g.add_edge(("d", i), ("d", j), weight=_finite(weights.w[i, j]), parity=int(weights.parity[i, j]), ends=(i, j))
        bw, bp, b = weights.boundary_weight(i)
        g.add_edge(("d", i), ("b", i), weight=_finite(bw), parity=bp if np.isfinite(bw) else 0, ends=(i, b))
    for a_pos, i in enumerate(idx):
        for j in idx[a_pos + 1:]:
            g.add_edge(("b", i), ("b", j), weight=0.0, parity=0, ends=None)
    return g
