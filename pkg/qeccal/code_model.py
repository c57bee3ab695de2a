# qeccal:code_model.py

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
Rotated surface-code layout, the pipelined stabilizer-measurement schedule
and the detector / signature value types everything else is keyed on.

Coordinates are doubled: data qubit (r, c) sits at (2r+1, 2c+1) and every
plaquette centre sits on even coordinates, so neighbours are the diagonal
offsets (+-1, +-1).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterable, Mapping, Optional

KIND_X = "X"
KIND_Z = "Z"
KINDS = (KIND_X, KIND_Z)

EAST = "East"
WEST = "West"
NORTH = "North"
SOUTH = "South"

# (first, second) boundary per ancilla kind; indices 0/1 are the boundary columns of a graph
BOUNDARIES_BY_KIND: dict[str, tuple[str, str]] = {
    KIND_X: (EAST, WEST),
    KIND_Z: (NORTH, SOUTH),
}

# CZ slot order per plaquette type (layout data, not schedule code)
SLOT_ORDER: dict[str, tuple[str, str, str, str]] = {
    KIND_X: ("NW", "NE", "SW", "SE"),
    KIND_Z: ("NW", "SW", "NE", "SE"),
}
_OFFSETS = {"NW": (-1, -1), "NE": (-1, 1), "SW": (1, -1), "SE": (1, 1)}

# Layer kinds
LAYER_ROT = "rot"
LAYER_CZ = "cz"
LAYER_MEASURE = "measure"
LAYER_WAIT = "wait"

# Fault-location slots
SLOT_GATE1 = "gate1"
SLOT_CZ = "cz"
SLOT_IDLE = "idle"
SLOT_PRE_MEASURE = "pre_measure"
SLOT_RECORD = "record"


def kind_of(ancilla_id: str) -> Optional[str]:
    """Ancilla kind from its id ("X3" -> "X"); None for ids outside the code layout."""
    head = ancilla_id[:1]
    return head if head in KINDS else None


def other_kind(kind: str) -> str:
    return KIND_Z if kind == KIND_X else KIND_X


# ---------------------------------------------------------------------------
# Detectors and signatures
# ---------------------------------------------------------------------------

@dataclass(frozen=True, order=True)
class DetectorCoord:
    ancilla: str
    tick: int          # 2m; half-integer cycles land on odd ticks

    @property
    def cycle(self) -> int:
        return self.tick // 2

    def shifted(self, dt: int) -> "DetectorCoord":
        return DetectorCoord(self.ancilla, self.tick + dt)

    def __str__(self) -> str:
        return f"{self.ancilla}@{self.tick}"


DetectorKey = tuple[DetectorCoord, ...]


@dataclass(frozen=True)
class ErrorSignature:
    detectors: DetectorKey
    logical_flip_x: bool = False
    logical_flip_z: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "detectors", tuple(sorted(set(self.detectors))))
        object.__setattr__(self, "logical_flip_x", bool(self.logical_flip_x))
        object.__setattr__(self, "logical_flip_z", bool(self.logical_flip_z))

    @property
    def weight(self) -> int:
        return len(self.detectors)

    @property
    def ancillas(self) -> tuple[str, ...]:
        return tuple(sorted({d.ancilla for d in self.detectors}))

    def restrict(self, kind: str) -> DetectorKey:
        return tuple(d for d in self.detectors if kind_of(d.ancilla) == kind)

    def shifted(self, dt: int) -> "ErrorSignature":
        return ErrorSignature(
            tuple(d.shifted(dt) for d in self.detectors),
            self.logical_flip_x,
            self.logical_flip_z,
        )

    def canonical(self) -> "ErrorSignature":
        """Translate by whole cycles so the earliest tick is 0 or 1 (parity kept)."""
        if not self.detectors:
            return self
        t0 = min(d.tick for d in self.detectors)
        return self.shifted(-2 * (t0 // 2))

    def combine(self, other: "ErrorSignature") -> "ErrorSignature":
        """Signature of two faults acting together: symmetric difference, XOR of flips."""
        return ErrorSignature(
            tuple(set(self.detectors) ^ set(other.detectors)),
            self.logical_flip_x ^ other.logical_flip_x,
            self.logical_flip_z ^ other.logical_flip_z,
        )

    def tick_span(self) -> int:
        if not self.detectors:
            return 0
        ticks = [d.tick for d in self.detectors]
        return max(ticks) - min(ticks)


class ErrorClass(str, Enum):
    B = "B"
    T = "T"
    TPRIME = "Tprime"
    S_XZ = "S_XZ"
    S_Y = "S_Y"
    ST_X = "ST_X"
    ST_Y = "ST_Y"
    H_X = "H_X"
    H_Y = "H_Y"
    M_ZZ = "M_ZZ"
    M_XY = "M_XY"
    C = "C"
    UNCLASSIFIED = "Unclassified"


SINGLE_PAULIS = ("X", "Y", "Z")
TWO_QUBIT_PAULIS = tuple(a + b for a in "IXYZ" for b in "IXYZ" if a + b != "II")


@dataclass(frozen=True)
class PauliFault:
    location: int
    pauli: str             # one character per qubit of the location, "I" allowed


# ---------------------------------------------------------------------------
# Layout
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DataQubit:
    id: str
    row: int
    col: int


@dataclass(frozen=True)
class Ancilla:
    id: str
    kind: str
    position: tuple[int, int]   # doubled coordinates of the plaquette centre


@dataclass(frozen=True, eq=False)
class SurfaceCodeLayout:
    distance: int
    data_qubits: tuple[DataQubit, ...]
    ancillas: tuple[Ancilla, ...]
    neighbors: Mapping[str, tuple[Optional[str], ...]]
    logical_x_support: frozenset[str]
    logical_z_support: frozenset[str]
    boundary_assignment: Mapping[tuple[str, str], str]

    @property
    def data_ids(self) -> tuple[str, ...]:
        return tuple(q.id for q in self.data_qubits)

    @property
    def ancilla_ids(self) -> tuple[str, ...]:
        return tuple(a.id for a in self.ancillas)

    @property
    def qubit_ids(self) -> tuple[str, ...]:
        return self.data_ids + self.ancilla_ids

    def ancillas_of(self, kind: str) -> tuple[str, ...]:
        return tuple(a.id for a in self.ancillas if a.kind == kind)

    def ancilla(self, ancilla_id: str) -> Ancilla:
        for a in self.ancillas:
            if a.id == ancilla_id:
                return a
        raise KeyError(f"unknown ancilla: {ancilla_id}")

    def plaquette(self, ancilla_id: str) -> frozenset[str]:
        return frozenset(q for q in self.neighbors[ancilla_id] if q is not None)

    def logical_support(self, kind: str) -> frozenset[str]:
        return self.logical_x_support if kind == KIND_X else self.logical_z_support

    def boundary_of(self, ancilla_id: str) -> str:
        """Assigned boundary, or the nearer boundary of the ancilla's kind for bulk ancillas."""
        a = self.ancilla(ancilla_id)
        assigned = self.boundary_assignment.get((a.kind, a.id))
        if assigned is not None:
            return assigned
        r, c = a.position
        span = 2 * self.distance
        if a.kind == KIND_X:
            return WEST if c < span - c else EAST
        return NORTH if r < span - r else SOUTH

    def share_data(self, a: str, b: str) -> bool:
        return bool(self.plaquette(a) & self.plaquette(b))

    def to_dict(self) -> dict[str, Any]:
        return {
            "distance": self.distance,
            "data_qubits": [{"id": q.id, "row": q.row, "col": q.col} for q in self.data_qubits],
            "ancillas": [
                {
                    "id": a.id,
                    "kind": a.kind,
                    "position": list(a.position),
                    "neighbors": list(self.neighbors[a.id]),
                    "boundary": self.boundary_assignment.get((a.kind, a.id)),
                }
                for a in self.ancillas
            ],
            "logical_x_support": sorted(self.logical_x_support),
            "logical_z_support": sorted(self.logical_z_support),
        }


def build_layout(distance: int) -> SurfaceCodeLayout:
    if isinstance(distance, bool) or not isinstance(distance, int):
        raise ValueError(f"distance must be an integer, got {distance!r}")
    if distance < 3 or distance % 2 == 0:
        raise ValueError(f"distance must be odd and >= 3, got {distance}")

    d = distance
    span = 2 * d
    data = tuple(DataQubit(f"D{r * d + c + 1}", r, c) for r in range(d) for c in range(d))
    at = {(2 * q.row + 1, 2 * q.col + 1): q.id for q in data}

    plaquettes: dict[str, list[tuple[int, int]]] = {KIND_X: [], KIND_Z: []}
    for R in range(0, span + 1, 2):
        for C in range(0, span + 1, 2):
            around = [at.get((R + dr, C + dc)) for dr, dc in _OFFSETS.values()]
            n = sum(q is not None for q in around)
            kind = KIND_X if ((R + C) // 2) % 2 == 0 else KIND_Z
            if n == 4:
                plaquettes[kind].append((R, C))
            elif n == 2:
                on_ns_edge = R in (0, span)
                # weight-2: X on North/South edges, Z on West/East edges
                if (on_ns_edge and kind == KIND_X) or (not on_ns_edge and kind == KIND_Z):
                    plaquettes[kind].append((R, C))

    ancillas: list[Ancilla] = []
    neighbors: dict[str, tuple[Optional[str], ...]] = {}
    for kind in KINDS:
        for i, pos in enumerate(sorted(plaquettes[kind]), start=1):
            aid = f"{kind}{i}"
            ancillas.append(Ancilla(aid, kind, pos))
            R, C = pos
            neighbors[aid] = tuple(
                at.get((R + _OFFSETS[s][0], C + _OFFSETS[s][1])) for s in SLOT_ORDER[kind]
            )

    logical_z = frozenset(q.id for q in data if q.row == 0)
    logical_x = frozenset(q.id for q in data if q.col == 0)

    # Boundary edges: a data qubit on an edge covered by a single plaquette of that kind
    boundary: dict[tuple[str, str], str] = {}
    edges = {
        KIND_X: ((lambda q: q.col == d - 1, EAST), (lambda q: q.col == 0, WEST)),
        KIND_Z: ((lambda q: q.row == 0, NORTH), (lambda q: q.row == d - 1, SOUTH)),
    }
    for kind in KINDS:
        for on_edge, label in edges[kind]:
            for q in data:
                if not on_edge(q):
                    continue
                owners = [a.id for a in ancillas if a.kind == kind and q.id in neighbors[a.id]]
                if len(owners) == 1:
                    boundary.setdefault((kind, owners[0]), label)

    return SurfaceCodeLayout(
        distance=d,
        data_qubits=data,
        ancillas=tuple(ancillas),
        neighbors=neighbors,
        logical_x_support=logical_x,
        logical_z_support=logical_z,
        boundary_assignment=boundary,
    )


# ---------------------------------------------------------------------------
# Schedule
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Operation:
    gate: str                  # "H" | "CZ" | "M"
    qubits: tuple[str, ...]


@dataclass(frozen=True)
class FaultLocation:
    id: int
    slot: str
    qubits: tuple[str, ...]
    layer: int
    cycle: int
    phase: str                 # position inside a cycle, stable across cycles
    measurement: Optional[int] = None

    @property
    def label(self) -> str:
        return f"{'-'.join(self.qubits)}@{self.phase}"


@dataclass(frozen=True)
class Layer:
    index: int
    kind: str
    cycle: int
    phase: str
    ops: tuple[Operation, ...]
    duration_us: float
    locations: tuple[int, ...]


@dataclass(frozen=True)
class Measurement:
    index: int
    qubit: str
    round: int                 # 0 for the final data readout
    tick: int


@dataclass(frozen=True)
class DetectorRule:
    detector: DetectorCoord
    measurements: tuple[int, ...]


@dataclass(frozen=True, eq=False)
class CircuitSchedule:
    layout: SurfaceCodeLayout
    cycles: int
    prepared_basis: str
    layers: tuple[Layer, ...]
    locations: tuple[FaultLocation, ...]
    measurements: tuple[Measurement, ...]
    detector_list: tuple[DetectorCoord, ...]
    detector_rules: tuple[DetectorRule, ...]
    readout_layer: int                     # first layer of the final data readout
    data_records: Mapping[str, int] = field(default_factory=dict)

    @property
    def other_basis(self) -> str:
        return other_kind(self.prepared_basis)

    def tick_parity(self, kind: str) -> int:
        return 0 if kind == self.prepared_basis else 1

    @property
    def final_tick(self) -> int:
        return 2 * (self.cycles + 1)

    def detector_index(self) -> dict[DetectorCoord, int]:
        return {d: i for i, d in enumerate(self.detector_list)}

    def detectors_of(self, kind: str) -> tuple[DetectorCoord, ...]:
        return tuple(d for d in self.detector_list if kind_of(d.ancilla) == kind)

    def is_bulk(self, det: DetectorCoord) -> bool:
        """True unless the detector belongs to the first or last cycle (or the final readout)."""
        return 2 <= det.cycle <= self.cycles - 1

    def cz_locations_in_cycle(self, cycle: int) -> list[FaultLocation]:
        return [loc for loc in self.locations if loc.slot == SLOT_CZ and loc.cycle == cycle]

    def to_dict(self) -> dict[str, Any]:
        return {
            "cycles": self.cycles,
            "prepared_basis": self.prepared_basis,
            "layers": [
                {
                    "index": L.index,
                    "kind": L.kind,
                    "cycle": L.cycle,
                    "phase": L.phase,
                    "duration_us": L.duration_us,
                    "ops": [[op.gate, *op.qubits] for op in L.ops],
                    "locations": list(L.locations),
                }
                for L in self.layers
            ],
            "locations": [
                {"id": loc.id, "slot": loc.slot, "qubits": list(loc.qubits), "cycle": loc.cycle, "phase": loc.phase}
                for loc in self.locations
            ],
            "detectors": [
                {"ancilla": r.detector.ancilla, "tick": r.detector.tick, "measurements": list(r.measurements)}
                for r in self.detector_rules
            ],
        }


class _ScheduleBuilder:
    def __init__(self, layout: SurfaceCodeLayout, idle_rot_us: float, idle_cz_us: float) -> None:
        self.layout = layout
        self.idle_rot_us = idle_rot_us
        self.idle_cz_us = idle_cz_us
        self.layers: list[Layer] = []
        self.locations: list[FaultLocation] = []
        self.measurements: list[Measurement] = []
        self.rounds: dict[str, list[int]] = {a: [] for a in layout.ancilla_ids}
        self.busy: frozenset[str] = frozenset()

    def _loc(self, slot: str, qubits: tuple[str, ...], cycle: int, phase: str, measurement: Optional[int] = None) -> int:
        loc_id = len(self.locations)
        self.locations.append(
            FaultLocation(
                id=loc_id,
                slot=slot,
                qubits=qubits,
                layer=len(self.layers),
                cycle=cycle,
                phase=f"{phase}:{slot}:{'-'.join(qubits)}",
                measurement=measurement,
            )
        )
        return loc_id

    def _gate_layer(self, kind: str, cycle: int, phase: str, ops: list[Operation], duration: float) -> None:
        touched = {q for op in ops for q in op.qubits}
        locs: list[int] = []
        for op in ops:
            if op.gate == "CZ":
                locs.append(self._loc(SLOT_CZ, op.qubits, cycle, phase))
            else:
                locs.append(self._loc(SLOT_GATE1, op.qubits, cycle, phase))
        for q in self.layout.qubit_ids:
            if q not in touched and q not in self.busy:
                locs.append(self._loc(SLOT_IDLE, (q,), cycle, phase))
        self.layers.append(Layer(len(self.layers), kind, cycle, phase, tuple(ops), duration, tuple(locs)))

    def _measure_layer(self, cycle: int, phase: str, qubits: tuple[str, ...], tick: int, record_faults: bool) -> None:
        locs: list[int] = []
        ops: list[Operation] = []
        for q in qubits:
            m = len(self.measurements)
            rnd = 0
            if q in self.rounds:
                self.rounds[q].append(m)
                rnd = len(self.rounds[q])
            self.measurements.append(Measurement(m, q, rnd, tick))
            ops.append(Operation("M", (q,)))
            locs.append(self._loc(SLOT_PRE_MEASURE, (q,), cycle, phase, measurement=m))
            if record_faults:
                locs.append(self._loc(SLOT_RECORD, (q,), cycle, phase, measurement=m))
        self.layers.append(Layer(len(self.layers), LAYER_MEASURE, cycle, phase, tuple(ops), 0.0, tuple(locs)))

    def parity_map(self, kind: str, cycle: int, role: str, tick: int) -> None:
        ancillas = self.layout.ancillas_of(kind)
        rotated = list(ancillas) + (list(self.layout.data_ids) if kind == KIND_X else [])
        base = f"{role}.{kind}"

        self._gate_layer(LAYER_ROT, cycle, f"{base}.rot1", [Operation("H", (q,)) for q in rotated], self.idle_rot_us)
        for slot in range(4):
            ops = [
                Operation("CZ", (a, self.layout.neighbors[a][slot]))
                for a in ancillas
                if self.layout.neighbors[a][slot] is not None
            ]
            self._gate_layer(LAYER_CZ, cycle, f"{base}.cz{slot + 1}", ops, self.idle_cz_us)
        self._gate_layer(LAYER_ROT, cycle, f"{base}.rot2", [Operation("H", (q,)) for q in rotated], self.idle_rot_us)

        self._measure_layer(cycle, f"{base}.meas", ancillas, tick, record_faults=True)
        self.busy = frozenset(ancillas)

    def wait(self, cycle: int, role: str) -> None:
        self._gate_layer(LAYER_WAIT, cycle, f"{role}.wait", [], 2 * self.idle_rot_us + 4 * self.idle_cz_us)
        self.busy = frozenset()


def build_schedule(
    layout: SurfaceCodeLayout,
    cycles: int,
    prepared_basis: str = KIND_Z,
    *,
    idle_rot_us: float = 0.05,
    idle_cz_us: float = 0.1,
) -> CircuitSchedule:
    """
    Pipelined memory experiment: cycle m runs the prepared-type parity map (read
    out at tick 2m) and then the other type (read out at tick 2m+1); the other
    type is skipped in cycle 1. A data readout in the prepared basis ends the run.
    """
    if isinstance(cycles, bool) or not isinstance(cycles, int) or cycles < 1:
        raise ValueError(f"cycles must be an integer >= 1, got {cycles!r}")
    if prepared_basis not in KINDS:
        raise ValueError(f"prepared_basis must be 'X' or 'Z', got {prepared_basis!r}")

    prep = prepared_basis
    other = other_kind(prep)
    b = _ScheduleBuilder(layout, idle_rot_us, idle_cz_us)

    for m in range(1, cycles + 1):
        b.parity_map(prep, m, "P", 2 * m)
        if m == 1:
            if cycles > 1:
                b.wait(m, "O")
        else:
            b.parity_map(other, m, "O", 2 * m + 1)

    readout_layer = len(b.layers)
    final = cycles + 1
    if prep == KIND_X:
        b.busy = frozenset(layout.ancilla_ids)
        b._gate_layer(LAYER_ROT, final, "F.rot", [Operation("H", (q,)) for q in layout.data_ids], idle_rot_us)
    b._measure_layer(final, "F.meas", layout.data_ids, 2 * final, record_faults=False)
    data_records = {m.qubit: m.index for m in b.measurements if m.round == 0}

    rules: list[DetectorRule] = []
    for a in layout.ancillas_of(prep):
        r = b.rounds[a]
        # a single round only feeds the data-readout detector
        for k in range(1, len(r) + 1 if cycles > 1 else 1):
            ms = [r[k - 1]] + ([r[k - 3]] if k >= 3 else [])
            rules.append(DetectorRule(DetectorCoord(a, 2 * k), tuple(ms)))
        last = [r[-1]] + ([r[-2]] if len(r) >= 2 else [])
        parity = [data_records[q] for q in sorted(layout.plaquette(a))]
        rules.append(DetectorRule(DetectorCoord(a, 2 * final), tuple(parity + last)))
    for a in layout.ancillas_of(other):
        r = b.rounds[a]
        # round k is read in cycle k+1; the first round has no reference
        for k in range(2, len(r) + 1):
            ms = [r[k - 1]] + ([r[k - 3]] if k >= 3 else [])
            rules.append(DetectorRule(DetectorCoord(a, 2 * (k + 1) + 1), tuple(ms)))

    rules.sort(key=lambda rule: (rule.detector.tick, rule.detector.ancilla))

    return CircuitSchedule(
        layout=layout,
        cycles=cycles,
        prepared_basis=prep,
        layers=tuple(b.layers),
        locations=tuple(b.locations),
        measurements=tuple(b.measurements),
        detector_list=tuple(rule.detector for rule in rules),
        detector_rules=tuple(rules),
        readout_layer=readout_layer,
        data_records=data_records,
    )


def expected_detector_count(distance: int, cycles: int) -> int:
    """(d^2-1)(2N-1)/2; N = 1 leaves one data-readout detector per prepared-type ancilla."""
    return (distance * distance - 1) * (2 * cycles - 1) // 2


def signature_from_pairs(pairs: Iterable[tuple[str, int]], flip_x: bool = False, flip_z: bool = False) -> ErrorSignature:
    return ErrorSignature(tuple(DetectorCoord(a, int(t)) for a, t in pairs), flip_x, flip_z)
