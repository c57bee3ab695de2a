# qeccal:catalog.py

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

import logging
from dataclasses import dataclass
from functools import cached_property, lru_cache
from itertools import combinations
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .code_model import (
    SINGLE_PAULIS,
    SLOT_CZ,
    SLOT_GATE1,
    SLOT_IDLE,
    SLOT_PRE_MEASURE,
    SLOT_RECORD,
    TWO_QUBIT_PAULIS,
    CircuitSchedule,
    DetectorCoord,
    DetectorKey,
    ErrorClass,
    ErrorSignature,
    FaultLocation,
    PauliFault,
    SurfaceCodeLayout,
    build_schedule,
    kind_of,
)
from .config import C_NBR_SEP_DEFAULT, C_SUBSET_BUDGET, C_TIME_SPAN_DEFAULT
from .frames import ColumnFaultInjector, FrameSimulator

logger = logging.getLogger(__name__)

REFERENCE_CYCLES = 7
REFERENCE_BULK_CYCLE = 3

# Paulis enumerated per location slot
SLOT_PAULIS: dict[str, tuple[str, ...]] = {
    SLOT_GATE1: SINGLE_PAULIS,
    SLOT_IDLE: SINGLE_PAULIS,
    SLOT_CZ: TWO_QUBIT_PAULIS,
    SLOT_PRE_MEASURE: ("X",),
    SLOT_RECORD: ("X",),
}

_BITFLIP_PAIRS = frozenset({"XX", "XY", "YX", "YY"})


@lru_cache(maxsize=16)
def _simulator(schedule: CircuitSchedule) -> FrameSimulator:
    return FrameSimulator(schedule)


def _check_fault(schedule: CircuitSchedule, fault: PauliFault) -> FaultLocation:
    if not (0 <= fault.location < len(schedule.locations)):
        raise ValueError(f"invalid fault location: {fault.location}")
    loc = schedule.locations[fault.location]
    if len(fault.pauli) != len(loc.qubits) or any(p not in "IXYZ" for p in fault.pauli):
        raise ValueError(f"pauli {fault.pauli!r} does not fit location {loc.label} ({loc.slot})")
    if loc.slot == SLOT_RECORD and fault.pauli not in ("I", "X"):
        raise ValueError(f"record location {loc.label} only takes a flip (X), got {fault.pauli!r}")
    return loc


def propagate_faults(schedule: CircuitSchedule, faults: Sequence[PauliFault]) -> list[ErrorSignature]:
    """Exact signatures of independent faults, one frame column per fault."""
    if not faults:
        return []
    by_loc: dict[int, list[tuple[int, str]]] = {}
    for col, f in enumerate(faults):
        _check_fault(schedule, f)
        by_loc.setdefault(f.location, []).append((col, f.pauli))

    res = _simulator(schedule).run(len(faults), ColumnFaultInjector(by_loc))
    dets = schedule.detector_list
    out: list[ErrorSignature] = []
    for col in range(len(faults)):
        idx = np.flatnonzero(res.detectors[col])
        out.append(
            ErrorSignature(
                tuple(dets[i] for i in idx),
                bool(res.logical[col, 0]),
                bool(res.logical[col, 1]),
            )
        )
    return out


def propagate_fault(schedule: CircuitSchedule, fault: PauliFault) -> ErrorSignature:
    return propagate_faults(schedule, [fault])[0]


def location_faults(locations: Iterable[FaultLocation]) -> list[PauliFault]:
    return [PauliFault(loc.id, p) for loc in locations for p in SLOT_PAULIS[loc.slot]]


# ---------------------------------------------------------------------------
# Catalog
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CatalogEntry:
    signature: ErrorSignature
    faults: tuple[PauliFault, ...]

    @property
    def nu(self) -> int:
        return len(self.faults)


@dataclass(frozen=True, eq=False)
class FaultCatalog:
    schedule: CircuitSchedule          # reference schedule the faults live in
    bulk_cycle: int
    entries: Mapping[ErrorSignature, CatalogEntry]
    cz_combinations: int
    undetectable: int

    def __len__(self) -> int:
        return len(self.entries)

    @cached_property
    def by_detectors(self) -> dict[DetectorKey, list[CatalogEntry]]:
        out: dict[DetectorKey, list[CatalogEntry]] = {}
        for sig, entry in self.entries.items():
            out.setdefault(sig.detectors, []).append(entry)
        return out

    def lookup(self, detectors: DetectorKey) -> list[CatalogEntry]:
        return self.by_detectors.get(detectors, [])

    def dominant(self, detectors: DetectorKey) -> Optional[CatalogEntry]:
        """Entry with the most generating faults for a canonical detector set."""
        entries = self.lookup(detectors)
        if not entries:
            return None
        return max(entries, key=lambda e: (e.nu, not e.signature.logical_flip_x, not e.signature.logical_flip_z))

    def nu(self, detectors: DetectorKey) -> int:
        return sum(e.nu for e in self.lookup(detectors))

    def location(self, fault: PauliFault) -> FaultLocation:
        return self.schedule.locations[fault.location]

    def signatures(self) -> list[ErrorSignature]:
        return sorted(self.entries, key=lambda s: (s.detectors, s.logical_flip_x, s.logical_flip_z))


def _reference_schedule(schedule: CircuitSchedule) -> CircuitSchedule:
    if schedule.cycles >= REFERENCE_CYCLES:
        return schedule
    return build_schedule(schedule.layout, REFERENCE_CYCLES, schedule.prepared_basis)


def enumerate_fault_catalog(schedule: CircuitSchedule) -> FaultCatalog:
    """
    All single-qubit faults at the locations of one bulk cycle plus the 15
    two-qubit Paulis at each of its CZs, keyed by canonical signature.
    """
    ref = _reference_schedule(schedule)
    bulk = REFERENCE_BULK_CYCLE
    locs = [loc for loc in ref.locations if loc.cycle == bulk]
    faults = location_faults(locs)
    sigs = propagate_faults(ref, faults)

    grouped: dict[ErrorSignature, list[PauliFault]] = {}
    undetectable = 0
    for f, s in zip(faults, sigs):
        if not s.detectors:
            if s.logical_flip_x or s.logical_flip_z:
                logger.warning("undetectable logical fault %s at %s", f.pauli, ref.locations[f.location].label)
            undetectable += 1
            continue
        grouped.setdefault(s.canonical(), []).append(f)

    entries = {sig: CatalogEntry(sig, tuple(fs)) for sig, fs in grouped.items()}
    cz = sum(1 for f in faults if ref.locations[f.location].slot == SLOT_CZ)
    logger.info(
        "fault catalog: %d faults, %d signatures, %d cz combinations, %d undetectable",
        len(faults), len(entries), cz, undetectable,
    )
    return FaultCatalog(schedule=ref, bulk_cycle=bulk, entries=entries, cz_combinations=cz, undetectable=undetectable)


@lru_cache(maxsize=8)
def catalog_for(schedule: CircuitSchedule) -> FaultCatalog:
    return enumerate_fault_catalog(schedule)


def schedule_signatures(schedule: CircuitSchedule) -> list[ErrorSignature]:
    """Distinct signatures of every fault at every location of the schedule, absolute ticks."""
    faults = location_faults(schedule.locations)
    seen: set[ErrorSignature] = set()
    for s in propagate_faults(schedule, faults):
        if s.detectors:
            seen.add(s)
    return sorted(seen, key=lambda s: (s.detectors, s.logical_flip_x, s.logical_flip_z))


def translate_signatures(signatures: Iterable[ErrorSignature], schedule: CircuitSchedule) -> list[ErrorSignature]:
    """Every whole-cycle translate of each canonical signature that fits the detector list."""
    present = set(schedule.detector_list)
    out: list[ErrorSignature] = []
    seen: set[ErrorSignature] = set()
    for sig in signatures:
        base = sig.canonical()
        for shift in range(0, schedule.final_tick + 1, 2):
            moved = base.shifted(shift)
            if moved in seen:
                continue
            if all(d in present for d in moved.detectors):
                seen.add(moved)
                out.append(moved)
    return out


# ---------------------------------------------------------------------------
# Classification
# ---------------------------------------------------------------------------

def _part_shape(part: DetectorKey, layout: SurfaceCodeLayout) -> Optional[str]:
    if len(part) == 1:
        return "point"
    if len(part) != 2:
        return None
    a, b = part
    if a.ancilla == b.ancilla:
        return "time"
    if layout.share_data(a.ancilla, b.ancilla):
        return "space" if a.tick == b.tick else "spacetime"
    return "hook"


def _geometric_class(dets: DetectorKey, layout: SurfaceCodeLayout) -> Optional[ErrorClass]:
    parts = [p for p in (tuple(d for d in dets if kind_of(d.ancilla) == k) for k in ("X", "Z")) if p]
    shapes = [_part_shape(p, layout) for p in parts]
    if any(s is None for s in shapes):
        return None

    if len(parts) == 2:
        if "hook" in shapes:
            return ErrorClass.H_Y
        ticks = [d.tick for d in dets]
        if set(shapes) <= {"point", "space"} and max(ticks) - min(ticks) <= 1:
            return ErrorClass.S_Y
        return ErrorClass.ST_Y

    shape = shapes[0]
    if shape == "space":
        return ErrorClass.S_XZ
    if shape == "hook":
        return ErrorClass.H_X
    if shape == "point":
        return ErrorClass.B
    return ErrorClass.ST_X


def _is_single_qubit(pauli: str) -> bool:
    return sum(p != "I" for p in pauli) == 1


def matches_c_template(
    signature: ErrorSignature,
    layout: SurfaceCodeLayout,
    *,
    max_time_span: int = C_TIME_SPAN_DEFAULT,
    max_nbr_sep: int = C_NBR_SEP_DEFAULT,
) -> bool:
    if signature.weight < 2:
        return False
    span = signature.tick_span()
    ancillas = signature.ancillas
    if len(ancillas) == 1 and span <= 2 * (max_time_span - 1):
        return True
    if span >= 2 * max_nbr_sep:
        return False
    anc = set(ancillas)
    for q in layout.data_ids:
        if anc <= {a for a in layout.ancilla_ids if q in layout.plaquette(a)}:
            return True
    return False


def classify_signature(
    signature: ErrorSignature,
    layout: SurfaceCodeLayout,
    schedule: CircuitSchedule,
    *,
    catalog: Optional[FaultCatalog] = None,
    max_time_span: int = C_TIME_SPAN_DEFAULT,
    max_nbr_sep: int = C_NBR_SEP_DEFAULT,
) -> ErrorClass:
    sig = signature.canonical()
    dets = sig.detectors
    if not dets:
        return ErrorClass.UNCLASSIFIED
    if len(dets) == 1:
        return ErrorClass.B
    if len(dets) == 2 and dets[0].ancilla == dets[1].ancilla:
        dt = dets[1].tick - dets[0].tick
        if dt == 2:
            return ErrorClass.T
        if dt == 4:
            return ErrorClass.TPRIME

    cat = catalog if catalog is not None else catalog_for(schedule)
    entries = cat.lookup(dets)
    if entries:
        paulis = [f.pauli for e in entries for f in e.faults]
        if any(_is_single_qubit(p) for p in paulis):
            cls = _geometric_class(dets, layout)
            if cls is not None:
                return cls
            mixed = len({kind_of(d.ancilla) for d in dets}) == 2
            return ErrorClass.ST_Y if mixed else ErrorClass.ST_X
        if "ZZ" in paulis:
            return ErrorClass.M_ZZ
        if any(p in _BITFLIP_PAIRS for p in paulis):
            return ErrorClass.M_XY
        return _geometric_class(dets, layout) or ErrorClass.M_XY

    if matches_c_template(sig, layout, max_time_span=max_time_span, max_nbr_sep=max_nbr_sep):
        return ErrorClass.C
    return ErrorClass.UNCLASSIFIED


# ---------------------------------------------------------------------------
# Highly-correlated templates
# ---------------------------------------------------------------------------

def _check_budget(n: int, budget: int, what: str) -> None:
    if (1 << n) > budget:
        raise ValueError(f"{what}: 2^{n} subsets exceed the subset budget of {budget}")


def generate_c_class(
    layout: SurfaceCodeLayout,
    schedule: CircuitSchedule,
    max_time_span: int = C_TIME_SPAN_DEFAULT,
    max_nbr_sep: int = C_NBR_SEP_DEFAULT,
    *,
    catalog: Optional[FaultCatalog] = None,
    budget: int = C_SUBSET_BUDGET,
) -> list[ErrorSignature]:
    """
    Canonical detector subsets of weight >= 2 that are (a) on one ancilla within
    max_time_span consecutive cycles or (b) on the ancillas around one data qubit
    within max_nbr_sep cycles, minus the detector sets the Pauli catalog explains.
    """
    if max_time_span < 1 or max_nbr_sep < 1:
        raise ValueError(f"spans must be >= 1, got time={max_time_span} nbr={max_nbr_sep}")
    _check_budget(max_time_span, budget, "single-ancilla window")

    cat = catalog if catalog is not None else catalog_for(schedule)
    known = set(cat.by_detectors)
    found: set[DetectorKey] = set()

    for anc in layout.ancilla_ids:
        p = schedule.tick_parity(kind_of(anc))
        window = [DetectorCoord(anc, p + 2 * i) for i in range(max_time_span)]
        first, rest = window[0], window[1:]
        for k in range(1, len(rest) + 1):
            for combo in combinations(rest, k):
                found.add((first, *combo))

    for q in layout.data_ids:
        ancs = [a for a in layout.ancilla_ids if q in layout.plaquette(a)]
        for t0 in (0, 1):
            window = [
                DetectorCoord(a, t)
                for a in ancs
                for t in range(t0, t0 + 2 * max_nbr_sep)
                if t % 2 == schedule.tick_parity(kind_of(a))
            ]
            _check_budget(len(window), budget, f"neighbourhood window of {q}")
            for k in range(2, len(window) + 1):
                for combo in combinations(window, k):
                    found.add(ErrorSignature(combo).canonical().detectors)

    out = [ErrorSignature(dets) for dets in found if len(dets) >= 2 and dets not in known]
    out.sort(key=lambda s: (s.weight, s.detectors))
    logger.info(
        "C class: %d signatures (time span %d, neighbour separation %d)",
        len(out), max_time_span, max_nbr_sep,
    )
    return out
