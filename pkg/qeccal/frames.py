# qeccal:frames.py

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
Bit-pair Pauli-frame engine.

The frame is two bool arrays x, z of shape (n_qubits, n_cols); each column is
an independent frame (a shot, or one propagated fault). H swaps x/z, CZ adds
the partner's x into z, M copies x into the record and clears z. Ancillas
are never reset, so an ancilla's x survives into its next round. Faults are injected by an
Injector at the locations a layer carries.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Protocol

import numpy as np

from .code_model import (
    KIND_X,
    LAYER_CZ,
    LAYER_MEASURE,
    LAYER_ROT,
    SLOT_PRE_MEASURE,
    SLOT_RECORD,
    CircuitSchedule,
    FaultLocation,
)


@dataclass
class FrameState:
    x: np.ndarray
    z: np.ndarray
    records: np.ndarray
    qubit_index: dict[str, int]

    @property
    def n_cols(self) -> int:
        return self.x.shape[1]

    def apply_pauli(self, qubit: str, pauli: str, cols) -> None:
        q = self.qubit_index[qubit]
        if pauli in ("X", "Y"):
            self.x[q, cols] ^= True
        if pauli in ("Z", "Y"):
            self.z[q, cols] ^= True


class Injector(Protocol):
    def apply(self, location: FaultLocation, state: FrameState) -> None: ...


@dataclass
class FrameResult:
    detectors: np.ndarray      # (n_cols, n_detectors) bool
    logical: np.ndarray        # (n_cols, 2) bool: (x_flip, z_flip)


class ColumnFaultInjector:
    """Deterministic faults: location id -> list of (column, pauli string)."""

    def __init__(self, faults_by_location: dict[int, list[tuple[int, str]]]) -> None:
        self.faults_by_location = faults_by_location

    def apply(self, location: FaultLocation, state: FrameState) -> None:
        for col, pauli in self.faults_by_location.get(location.id, ()):
            if location.slot == SLOT_RECORD:
                if pauli == "X":
                    state.records[location.measurement, col] ^= True
                continue
            for qubit, p in zip(location.qubits, pauli):
                if p != "I":
                    state.apply_pauli(qubit, p, col)


class FrameSimulator:
    def __init__(self, schedule: CircuitSchedule) -> None:
        self.schedule = schedule
        layout = schedule.layout
        self.qubit_index = {q: i for i, q in enumerate(layout.qubit_ids)}
        self._locations = schedule.locations

        self._programs: list[tuple[str, np.ndarray, np.ndarray]] = []
        for layer in schedule.layers:
            if layer.kind == LAYER_ROT:
                idx = np.array([self.qubit_index[op.qubits[0]] for op in layer.ops], dtype=np.intp)
                self._programs.append((LAYER_ROT, idx, idx))
            elif layer.kind == LAYER_CZ:
                a = np.array([self.qubit_index[op.qubits[0]] for op in layer.ops], dtype=np.intp)
                b = np.array([self.qubit_index[op.qubits[1]] for op in layer.ops], dtype=np.intp)
                self._programs.append((LAYER_CZ, a, b))
            elif layer.kind == LAYER_MEASURE:
                q = np.array([self.qubit_index[op.qubits[0]] for op in layer.ops], dtype=np.intp)
                m = np.array(
                    [schedule.locations[i].measurement for i in layer.locations if schedule.locations[i].slot == SLOT_PRE_MEASURE],
                    dtype=np.intp,
                )
                self._programs.append((LAYER_MEASURE, q, m))
            else:
                empty = np.zeros(0, dtype=np.intp)
                self._programs.append((layer.kind, empty, empty))

        def _support(qubits) -> np.ndarray:
            return np.array(sorted(self.qubit_index[q] for q in qubits), dtype=np.intp)

        self._lx = _support(layout.logical_x_support)
        self._lz = _support(layout.logical_z_support)
        self._rules = [np.array(r.measurements, dtype=np.intp) for r in schedule.detector_rules]
        measured = layout.logical_support(schedule.prepared_basis)
        self._measured_records = np.array(sorted(schedule.data_records[q] for q in measured), dtype=np.intp)

    def run(self, n_cols: int, injector: Optional[Injector] = None) -> FrameResult:
        sched = self.schedule
        nq = len(self.qubit_index)
        state = FrameState(
            x=np.zeros((nq, n_cols), dtype=bool),
            z=np.zeros((nq, n_cols), dtype=bool),
            records=np.zeros((len(sched.measurements), n_cols), dtype=bool),
            qubit_index=self.qubit_index,
        )
        x, z = state.x, state.z
        frame_flip: Optional[np.ndarray] = None

        for layer, (kind, a, b) in zip(sched.layers, self._programs):
            if layer.index == sched.readout_layer:
                frame_flip = self._complementary_flip(state)

            if kind == LAYER_ROT:
                tmp = x[a].copy()
                x[a] = z[a]
                z[a] = tmp
            elif kind == LAYER_CZ:
                z[a] ^= x[b]
                z[b] ^= x[a]
            elif kind == LAYER_MEASURE:
                if injector is not None:
                    for loc_id in layer.locations:
                        loc = self._locations[loc_id]
                        if loc.slot == SLOT_PRE_MEASURE:
                            injector.apply(loc, state)
                state.records[b] = x[a]
                # phase errors on a Z eigenstate are global phases
                z[a] = False
                if injector is not None:
                    for loc_id in layer.locations:
                        loc = self._locations[loc_id]
                        if loc.slot == SLOT_RECORD:
                            injector.apply(loc, state)
                continue

            if injector is not None:
                for loc_id in layer.locations:
                    injector.apply(self._locations[loc_id], state)

        if frame_flip is None:
            frame_flip = self._complementary_flip(state)

        rec = state.records
        detectors = np.zeros((len(self._rules), n_cols), dtype=bool)
        for i, ms in enumerate(self._rules):
            detectors[i] = np.bitwise_xor.reduce(rec[ms], axis=0)

        measured_flip = np.bitwise_xor.reduce(rec[self._measured_records], axis=0)
        logical = np.zeros((n_cols, 2), dtype=bool)
        if sched.prepared_basis == KIND_X:
            logical[:, 0] = measured_flip
            logical[:, 1] = frame_flip
        else:
            logical[:, 0] = frame_flip
            logical[:, 1] = measured_flip
        return FrameResult(detectors=detectors.T.copy(), logical=logical)

    def _complementary_flip(self, state: FrameState) -> np.ndarray:
        """Flip of the logical not read out by the final data measurement."""
        if self.schedule.prepared_basis == KIND_X:
            # Z_L anticommutes with X errors on its support
            return np.bitwise_xor.reduce(state.x[self._lz], axis=0)
        return np.bitwise_xor.reduce(state.z[self._lx], axis=0)
