# qeccal:noise_sim.py

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
Syndrome data generation.

Two sources: a Pauli-frame run of the full schedule under circuit-level
depolarizing noise, and direct sampling of independent signature channels.
Shots are produced in fixed-size blocks, each with its own Philox stream
keyed by (seed, block index), so the output does not depend on the number
of worker threads.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Iterable, Optional, Sequence, Union

import numpy as np

from .catalog import location_faults, propagate_faults
from .code_model import (
    LAYER_CZ,
    LAYER_ROT,
    SINGLE_PAULIS,
    SLOT_CZ,
    SLOT_GATE1,
    SLOT_IDLE,
    SLOT_PRE_MEASURE,
    SLOT_RECORD,
    TWO_QUBIT_PAULIS,
    CircuitSchedule,
    DetectorCoord,
    ErrorSignature,
    FaultLocation,
    PauliFault,
)
from .config import (
    HET_MU_1Q,
    HET_MU_2Q,
    HET_SIGMA_1Q,
    HET_SIGMA_2Q,
    IDLE_CZ_US,
    IDLE_ROT_US,
    P_1Q_DEFAULT,
    P_2Q_DEFAULT,
    P_RO_DEFAULT,
    SHOT_BLOCK,
    T_BAR_US_DEFAULT,
)
from .frames import ColumnFaultInjector, FrameSimulator, FrameState

logger = logging.getLogger(__name__)

Seed = Union[int, Sequence[int]]

MODE_UNIFORM = "uniform"
MODE_HETEROGENEOUS = "heterogeneous"
_P_MAX = 0.5 - 1e-9


@dataclass(frozen=True)
class NoiseParams:
    mode: str = MODE_UNIFORM
    p_1q: float = P_1Q_DEFAULT
    p_2q: float = P_2Q_DEFAULT
    p_ro: float = P_RO_DEFAULT
    p_mc: float = 0.0
    p_mc_per_ancilla: tuple[tuple[str, float], ...] = ()
    t_bar_us: float = T_BAR_US_DEFAULT
    idle_rot_us: float = IDLE_ROT_US
    idle_cz_us: float = IDLE_CZ_US
    delta: float = 0.0
    mu_2q: float = HET_MU_2Q
    sigma_2q: float = HET_SIGMA_2Q
    mu_1q: float = HET_MU_1Q
    sigma_1q: float = HET_SIGMA_1Q
    seed: int = 0

    def __post_init__(self) -> None:
        if self.mode not in (MODE_UNIFORM, MODE_HETEROGENEOUS):
            raise ValueError(f"noise mode must be uniform or heterogeneous, got {self.mode!r}")
        for name in ("p_1q", "p_2q", "p_ro", "p_mc"):
            v = getattr(self, name)
            if not (0.0 <= v < 1.0):
                raise ValueError(f"{name} must be in [0, 1), got {v}")
        for anc, v in self.p_mc_per_ancilla:
            if not (0.0 <= v < 1.0):
                raise ValueError(f"p_mc for {anc} must be in [0, 1), got {v}")
        if self.t_bar_us <= 0:
            raise ValueError(f"t_bar_us must be > 0, got {self.t_bar_us}")
        if self.delta < 0:
            raise ValueError(f"delta must be >= 0, got {self.delta}")

    def p_idle(self, duration_us: float) -> float:
        if duration_us <= 0:
            return 0.0
        return (1.0 - math.exp(-duration_us / self.t_bar_us)) / 4.0

    def p_mc_for(self, ancilla: str) -> float:
        return dict(self.p_mc_per_ancilla).get(ancilla, self.p_mc)

    @classmethod
    def noiseless(cls) -> "NoiseParams":
        return cls(p_1q=0.0, p_2q=0.0, p_ro=0.0, p_mc=0.0, idle_rot_us=0.0, idle_cz_us=0.0)

    def snapshot(self) -> dict[str, Any]:
        out = asdict(self)
        out["p_mc_per_ancilla"] = {a: v for a, v in self.p_mc_per_ancilla}
        return out


@dataclass(frozen=True)
class LocationChannel:
    location: int
    p: float
    paulis: tuple[str, ...]


@dataclass(frozen=True)
class SignatureChannel:
    signature: ErrorSignature
    p: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.p < 0.5):
            raise ValueError(f"channel probability must be in [0, 0.5), got {self.p}")


@dataclass(frozen=True)
class DriftChannel:
    signature: ErrorSignature
    p_a: float
    p_b: float


@dataclass(frozen=True, eq=False)
class SyndromeDataset:
    detector_list: tuple[DetectorCoord, ...]
    shots: np.ndarray                      # (n_shots, n_detectors) uint8
    truth: Optional[np.ndarray] = None     # (n_shots, 2) bool: (x_flip, z_flip)
    provenance: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.shots.ndim != 2 or self.shots.shape[1] != len(self.detector_list):
            raise ValueError(
                f"shot matrix shape {self.shots.shape} does not match {len(self.detector_list)} detectors"
            )
        if self.truth is not None and self.truth.shape != (self.shots.shape[0], 2):
            raise ValueError(f"truth shape {self.truth.shape} does not match {self.shots.shape[0]} shots")

    @property
    def n_shots(self) -> int:
        return int(self.shots.shape[0])

    @property
    def n_detectors(self) -> int:
        return len(self.detector_list)

    def detector_index(self) -> dict[DetectorCoord, int]:
        return {d: i for i, d in enumerate(self.detector_list)}

    def column(self, det: DetectorCoord) -> np.ndarray:
        return self.shots[:, self.detector_index()[det]]


# ---------------------------------------------------------------------------
# Circuit-level noise
# ---------------------------------------------------------------------------

def _clamp(p: float) -> float:
    return min(max(p, 0.0), _P_MAX)


def _heterogeneous_rates(schedule: CircuitSchedule, noise: NoiseParams) -> tuple[dict, dict]:
    """Per physical gate rates, drawn once from the noise seed in a fixed gate order."""
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([noise.seed, 0x4E45])))
    pairs = sorted({loc.qubits for loc in schedule.locations if loc.slot == SLOT_CZ})
    singles = sorted({loc.qubits[0] for loc in schedule.locations if loc.slot == SLOT_GATE1})
    r2 = rng.normal(noise.mu_2q, noise.delta * noise.sigma_2q, size=len(pairs))
    r1 = rng.normal(noise.mu_1q, noise.delta * noise.sigma_1q, size=len(singles))
    return (
        {q: _clamp(float(v)) for q, v in zip(pairs, r2)},
        {q: _clamp(float(v)) for q, v in zip(singles, r1)},
    )


def location_channels(schedule: CircuitSchedule, noise: NoiseParams) -> list[LocationChannel]:
    """Depolarizing / flip channel attached to each location with non-zero probability."""
    rates_2q: dict = {}
    rates_1q: dict = {}
    if noise.mode == MODE_HETEROGENEOUS:
        rates_2q, rates_1q = _heterogeneous_rates(schedule, noise)

    out: list[LocationChannel] = []
    for loc in schedule.locations:
        if loc.slot == SLOT_GATE1:
            p = rates_1q.get(loc.qubits[0], noise.p_1q)
            paulis = SINGLE_PAULIS
        elif loc.slot == SLOT_CZ:
            p = rates_2q.get(loc.qubits, noise.p_2q)
            paulis = TWO_QUBIT_PAULIS
        elif loc.slot == SLOT_IDLE:
            p = noise.p_idle(_idle_duration(schedule, loc, noise))
            paulis = SINGLE_PAULIS
        elif loc.slot == SLOT_PRE_MEASURE:
            p = noise.p_ro
            paulis = ("X",)
        elif loc.slot == SLOT_RECORD:
            p = noise.p_mc_for(loc.qubits[0])
            paulis = ("X",)
        else:
            raise ValueError(f"unknown location slot: {loc.slot}")
        if p > 0:
            out.append(LocationChannel(loc.id, p, paulis))
    return out


def _idle_duration(schedule: CircuitSchedule, loc: FaultLocation, noise: NoiseParams) -> float:
    layer = schedule.layers[loc.layer]
    if layer.kind == LAYER_ROT:
        return noise.idle_rot_us
    if layer.kind == LAYER_CZ:
        return noise.idle_cz_us
    # wait layers stand in for a whole parity map
    return 2 * noise.idle_rot_us + 4 * noise.idle_cz_us


class _NoiseInjector:
    def __init__(self, channels: dict[int, LocationChannel], rng: np.random.Generator, n_cols: int) -> None:
        self.channels = channels
        self.rng = rng
        self.n_cols = n_cols

    @staticmethod
    def _tables(paulis: tuple[str, ...]) -> tuple[np.ndarray, np.ndarray]:
        letters = np.array([list(p) for p in paulis])        # (k, n_qubits)
        return (letters == "X") | (letters == "Y"), (letters == "Z") | (letters == "Y")

    def apply(self, location: FaultLocation, state: FrameState) -> None:
        ch = self.channels.get(location.id)
        if ch is None:
            return
        hits = np.flatnonzero(self.rng.random(self.n_cols) < ch.p)
        if hits.size == 0:
            return
        if location.slot == SLOT_RECORD:
            state.records[location.measurement, hits] ^= True
            return
        choice = self.rng.integers(0, len(ch.paulis), size=hits.size)
        xt, zt = _PAULI_TABLES[ch.paulis]
        for k, qubit in enumerate(location.qubits):
            q = state.qubit_index[qubit]
            state.x[q, hits] ^= xt[choice, k]
            state.z[q, hits] ^= zt[choice, k]


_PAULI_TABLES = {p: _NoiseInjector._tables(p) for p in (SINGLE_PAULIS, TWO_QUBIT_PAULIS, ("X",))}


def _blocks(n_shots: int, block: int) -> list[tuple[int, int]]:
    n_blocks = (n_shots + block - 1) // block
    return [(b, min(block, n_shots - b * block)) for b in range(n_blocks)]


def _seed_value(seed: Seed):
    return int(seed) if isinstance(seed, (int, np.integer)) else [int(s) for s in seed]


def _block_rng(seed: Seed, block: int) -> np.random.Generator:
    entropy = _seed_value(seed)
    if isinstance(entropy, int):
        entropy = [entropy]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([*entropy, block])))


def simulate_circuit(
    schedule: CircuitSchedule,
    noise: NoiseParams,
    n_shots: int,
    seed: Seed,
    *,
    threads: int = 1,
    block: int = SHOT_BLOCK,
) -> SyndromeDataset:
    if n_shots < 1:
        raise ValueError(f"n_shots must be >= 1, got {n_shots}")
    channels = {ch.location: ch for ch in location_channels(schedule, noise)}
    sim = FrameSimulator(schedule)

    def _run(job: tuple[int, int]):
        b, size = job
        return sim.run(size, _NoiseInjector(channels, _block_rng(seed, b), size))

    jobs = _blocks(n_shots, block)
    with ThreadPoolExecutor(max_workers=max(1, threads)) as ex:
        results = list(ex.map(_run, jobs))

    shots = np.concatenate([r.detectors for r in results], axis=0).astype(np.uint8)
    truth = np.concatenate([r.logical for r in results], axis=0)
    logger.info(
        "simulated %d shots: d=%d cycles=%d basis=%s detectors=%d channels=%d mean=%.4f",
        n_shots, schedule.layout.distance, schedule.cycles, schedule.prepared_basis,
        shots.shape[1], len(channels), float(shots.mean()) if shots.size else 0.0,
    )
    return SyndromeDataset(
        detector_list=schedule.detector_list,
        shots=shots,
        truth=truth,
        provenance={
            "source": "simulate_circuit",
            "seed": _seed_value(seed),
            "block": int(block),
            "distance": schedule.layout.distance,
            "cycles": schedule.cycles,
            "basis": schedule.prepared_basis,
            "noise": noise.snapshot(),
        },
    )


def inject_faults(schedule: CircuitSchedule, faults: Sequence[PauliFault], n_shots: int = 1) -> SyndromeDataset:
    """Every shot carries exactly the given faults and nothing else."""
    if n_shots < 1:
        raise ValueError(f"n_shots must be >= 1, got {n_shots}")
    by_loc: dict[int, list[tuple[int, str]]] = {}
    for f in faults:
        by_loc.setdefault(f.location, []).extend((col, f.pauli) for col in range(n_shots))
    res = FrameSimulator(schedule).run(n_shots, ColumnFaultInjector(by_loc))
    return SyndromeDataset(
        detector_list=schedule.detector_list,
        shots=res.detectors.astype(np.uint8),
        truth=res.logical,
        provenance={"source": "inject_faults", "faults": [[f.location, f.pauli] for f in faults]},
    )


def channel_decomposition(schedule: CircuitSchedule, noise: NoiseParams) -> list[SignatureChannel]:
    """
    First-order signature channels of the circuit noise: each (location, Pauli)
    carries p/k of its location's channel; equal signatures combine as
    p1(1-p2) + p2(1-p1).
    """
    loc_ch = {ch.location: ch for ch in location_channels(schedule, noise)}
    faults = [f for f in location_faults(schedule.locations) if f.location in loc_ch]
    sigs = propagate_faults(schedule, faults)

    combined: dict[ErrorSignature, float] = {}
    for f, s in zip(faults, sigs):
        if not s.detectors:
            continue
        ch = loc_ch[f.location]
        p = ch.p / len(ch.paulis)
        q = combined.get(s, 0.0)
        combined[s] = q * (1 - p) + p * (1 - q)

    out = [SignatureChannel(s, min(p, _P_MAX)) for s, p in combined.items()]
    out.sort(key=lambda c: (c.signature.detectors, c.signature.logical_flip_x, c.signature.logical_flip_z))
    return out


# ---------------------------------------------------------------------------
# Independent signature channels
# ---------------------------------------------------------------------------

def _channel_columns(channels: Iterable[ErrorSignature], detector_list: Sequence[DetectorCoord]) -> list[np.ndarray]:
    index = {d: i for i, d in enumerate(detector_list)}
    cols = []
    for sig in channels:
        missing = [d for d in sig.detectors if d not in index]
        if missing:
            raise ValueError(f"unknown detector in channel: {missing[0]}")
        cols.append(np.array([index[d] for d in sig.detectors], dtype=np.intp))
    return cols


def _sample(
    signatures: list[ErrorSignature],
    probs: np.ndarray,
    detector_list: Sequence[DetectorCoord],
    n_shots: int,
    seed: Seed,
    block: int,
    threads: int,
) -> np.ndarray:
    cols = _channel_columns(signatures, detector_list)

    def _run(job: tuple[int, int]) -> np.ndarray:
        b, size = job
        rng = _block_rng(seed, b)
        out = np.zeros((size, len(detector_list)), dtype=bool)
        for c, p in zip(cols, probs):
            fired = rng.random(size) < p
            if c.size and fired.any():
                out[np.ix_(fired, c)] ^= True
        return out

    if n_shots == 0:
        return np.zeros((0, len(detector_list)), dtype=np.uint8)
    with ThreadPoolExecutor(max_workers=max(1, threads)) as ex:
        parts = list(ex.map(_run, _blocks(n_shots, block)))
    return np.concatenate(parts, axis=0).astype(np.uint8)


def sample_signature_channels(
    channels: Sequence[SignatureChannel],
    detector_list: Sequence[DetectorCoord],
    n_shots: int,
    seed: Seed,
    *,
    threads: int = 1,
    block: int = SHOT_BLOCK,
) -> SyndromeDataset:
    if n_shots < 1:
        raise ValueError(f"n_shots must be >= 1, got {n_shots}")
    sigs = [c.signature for c in channels]
    if len(set(s.detectors for s in sigs)) != len(sigs):
        logger.warning("channel list repeats a detector set; channels are still drawn independently")
    shots = _sample(sigs, np.array([c.p for c in channels]), detector_list, n_shots, seed, block, threads)
    return SyndromeDataset(
        detector_list=tuple(detector_list),
        shots=shots,
        truth=None,
        provenance={"source": "sample_signature_channels", "seed": _seed_value(seed), "channels": len(channels)},
    )


def inject_drift(
    channels: Sequence[DriftChannel],
    detector_list: Sequence[DetectorCoord],
    n_shots: int,
    regime_split: float,
    seed: int,
    *,
    threads: int = 1,
    block: int = SHOT_BLOCK,
) -> SyndromeDataset:
    """Channels run at p_a for the first regime_split of the shots and at p_b after."""
    if not (0.0 < regime_split < 1.0):
        raise ValueError(f"regime_split must be in (0, 1), got {regime_split}")
    if n_shots < 2:
        raise ValueError(f"n_shots must be >= 2, got {n_shots}")
    for c in channels:
        for p in (c.p_a, c.p_b):
            if not (0.0 <= p < 0.5):
                raise ValueError(f"drift channel probability must be in [0, 0.5), got {p}")

    n_a = min(max(int(round(regime_split * n_shots)), 1), n_shots - 1)
    sigs = [c.signature for c in channels]
    first = _sample(sigs, np.array([c.p_a for c in channels]), detector_list, n_a, [seed, 0], block, threads)
    second = _sample(sigs, np.array([c.p_b for c in channels]), detector_list, n_shots - n_a, [seed, 1], block, threads)
    return SyndromeDataset(
        detector_list=tuple(detector_list),
        shots=np.concatenate([first, second], axis=0),
        truth=None,
        provenance={"source": "inject_drift", "seed": int(seed), "regime_split": regime_split, "channels": len(channels)},
    )


def random_channels(
    n_channels: int,
    max_weight: int,
    p_range: tuple[float, float] = (0.001, 0.2),
    n_nodes: int = 60,
    seed: int = 0,
) -> tuple[tuple[DetectorCoord, ...], list[SignatureChannel]]:
    """
    Random independent channels on abstract nodes: weights uniform in
    [1, max_weight], probabilities log-uniform in p_range, distinct supports.
    """
    if n_channels < 1 or max_weight < 1:
        raise ValueError(f"need n_channels >= 1 and max_weight >= 1, got {n_channels}, {max_weight}")
    if n_nodes < max_weight:
        raise ValueError(f"n_nodes ({n_nodes}) must be >= max_weight ({max_weight})")
    lo, hi = p_range
    if not (0.0 < lo <= hi < 0.5):
        raise ValueError(f"p_range must satisfy 0 < lo <= hi < 0.5, got {p_range}")

    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, 0x5A11])))
    nodes = tuple(DetectorCoord(f"N{i:03d}", 0) for i in range(n_nodes))
    seen: set[tuple[DetectorCoord, ...]] = set()
    out: list[SignatureChannel] = []
    while len(out) < n_channels:
        w = int(rng.integers(1, max_weight + 1))
        picked = tuple(sorted(nodes[i] for i in rng.choice(n_nodes, size=w, replace=False)))
        if picked in seen:
            continue
        seen.add(picked)
        p = float(np.exp(rng.uniform(np.log(lo), np.log(hi))))
        out.append(SignatureChannel(ErrorSignature(picked), p))
    return nodes, out
