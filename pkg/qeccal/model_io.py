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

# qeccal:model_io.py

from __future__ import annotations

import json
import logging
import math
from pathlib import Path
from typing import Any, Optional

import numpy as np

from .catalog import FaultCatalog
from .code_model import CircuitSchedule, DetectorCoord, ErrorSignature
from .correlation_inference import STATUS_OK, InferredModel, ModelEntry
from .dataset_io import FormatError
from .matching_graph import AuxGraph, WeightMatrix

logger = logging.getLogger(__name__)

MODEL_FORMAT = "qeccal-model"
MODEL_VERSION = 1


def _dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False, allow_nan=False) + "\n"


def _num(x: Optional[float]) -> Optional[float]:
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


# ---------------------------------------------------------------------------
# Model file
# ---------------------------------------------------------------------------

def model_to_dict(model: InferredModel) -> dict[str, Any]:
    entries = []
    for e in model:
        entries.append(
            {
                "detectors": [[d.ancilla, d.tick] for d in e.signature.detectors],
                "p": _num(e.p),
                "stderr": _num(e.stderr),
                "class": e.error_class,
                "logical_flip_x": e.signature.logical_flip_x,
                "logical_flip_z": e.signature.logical_flip_z,
                "status": e.status,
                "nu": int(e.nu),
            }
        )
    return {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "metadata": {
            "support_hash": model.support_hash,
            "shots": int(model.shots),
            "cycle_averaged": bool(model.cycle_averaged),
        },
        "entries": entries,
    }


def format_model(model: InferredModel) -> str:
    return _dumps(model_to_dict(model))


def write_model(path: Path, model: InferredModel) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_model(model), encoding="utf-8", newline="\n")
    logger.info("wrote model %s (%d entries)", path, len(model))


def _entry_from_dict(raw: Any, i: int, path: Optional[str]) -> ModelEntry:
    def _bad(msg: str) -> FormatError:
        return FormatError(f"entry {i}: {msg}", 0, 0, path)

    if not isinstance(raw, dict):
        raise _bad("not an object")
    dets = raw.get("detectors")
    if not isinstance(dets, list) or not dets:
        raise _bad("detectors must be a non-empty list")
    coords = []
    for d in dets:
        if not (isinstance(d, list) and len(d) == 2 and isinstance(d[0], str) and isinstance(d[1], int)):
            raise _bad(f"bad detector {d!r}")
        coords.append(DetectorCoord(d[0], d[1]))
    if [[c.ancilla, c.tick] for c in sorted(set(coords))] != dets:
        raise _bad("detectors must be sorted and distinct")

    status = raw.get("status", STATUS_OK)
    p = raw.get("p")
    if p is None:
        if status == STATUS_OK:
            raise _bad("p is null for an ok entry")
        p = float("nan")
    elif not isinstance(p, (int, float)) or isinstance(p, bool):
        raise _bad(f"bad p {p!r}")
    se = raw.get("stderr")
    if se is not None and (not isinstance(se, (int, float)) or isinstance(se, bool)):
        raise _bad(f"bad stderr {se!r}")

    sig = ErrorSignature(tuple(coords), bool(raw.get("logical_flip_x", False)), bool(raw.get("logical_flip_z", False)))
    return ModelEntry(
        signature=sig,
        p=float(p),
        stderr=None if se is None else float(se),
        error_class=raw.get("class"),
        status=str(status),
        nu=int(raw.get("nu", 0)),
    )


def parse_model(text: str, path: Optional[str] = None) -> InferredModel:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError(e.msg, e.lineno, e.colno, path) from None
    if not isinstance(data, dict) or data.get("format") != MODEL_FORMAT:
        raise FormatError(f"not a {MODEL_FORMAT} file", 1, 1, path)
    if data.get("version") != MODEL_VERSION:
        raise FormatError(f"unsupported model version {data.get('version')!r}", 1, 1, path)
    meta = data.get("metadata") or {}
    raw_entries = data.get("entries")
    if not isinstance(raw_entries, list):
        raise FormatError("entries must be a list", 1, 1, path)

    entries: dict = {}
    for i, raw in enumerate(raw_entries):
        e = _entry_from_dict(raw, i, path)
        if e.signature.detectors in entries:
            raise FormatError(f"entry {i}: duplicate detectors", 0, 0, path)
        entries[e.signature.detectors] = e
    return InferredModel(
        entries,
        str(meta.get("support_hash", "")),
        int(meta.get("shots", 0)),
        bool(meta.get("cycle_averaged", False)),
    )


def read_model(path: Path) -> InferredModel:
    path = Path(path)
    model = parse_model(path.read_text(encoding="utf-8"), str(path))
    logger.info("read model %s (%d entries)", path, len(model))
    return model


# ---------------------------------------------------------------------------
# Layout, schedule, catalog and graph exports
# ---------------------------------------------------------------------------

def write_json(path: Path, obj: Any) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(_dumps(obj), encoding="utf-8", newline="\n")


def schedule_to_dict(schedule: CircuitSchedule) -> dict[str, Any]:
    out = schedule.to_dict()
    out["layout"] = schedule.layout.to_dict()
    return out


def catalog_to_dict(catalog: FaultCatalog) -> dict[str, Any]:
    locs = catalog.schedule.locations
    return {
        "bulk_cycle": catalog.bulk_cycle,
        "cz_combinations": catalog.cz_combinations,
        "undetectable": catalog.undetectable,
        "signatures": [
            {
                "detectors": [[d.ancilla, d.tick] for d in sig.detectors],
                "logical_flip_x": sig.logical_flip_x,
                "logical_flip_z": sig.logical_flip_z,
                "faults": [[locs[f.location].label, f.pauli] for f in catalog.entries[sig].faults],
            }
            for sig in catalog.signatures()
        ],
    }


def graph_to_dict(graph: AuxGraph, weights: Optional[WeightMatrix] = None) -> dict[str, Any]:
    edges = []
    for (u, v), e in sorted(graph.edges.items()):
        row: dict[str, Any] = {
            "u": graph.node_label(u),
            "v": graph.node_label(v),
            "p": e.p,
            "p_pure": e.p_pure,
            "parity": e.parity,
        }
        if weights is not None:
            row["w"] = _num(weights.w[u, v])
        edges.append(row)
    return {
        "kind": graph.kind,
        "dm_max": graph.dm_max,
        "nodes": [graph.node_label(i) for i in range(graph.n_nodes)],
        "edges": edges,
    }


def graph_to_dot(graph: AuxGraph, weights: Optional[WeightMatrix] = None) -> str:
    lines = [f"graph {graph.kind}_graph {{"]
    for i in range(graph.n_nodes):
        shape = "box" if graph.is_boundary(i) else "ellipse"
        lines.append(f'  "{graph.node_label(i)}" [shape={shape}];')
    for (u, v), e in sorted(graph.edges.items()):
        label = f"p={e.p:.4g}"
        if weights is not None and np.isfinite(weights.w[u, v]):
            label += f" w={weights.w[u, v]:.3f}"
        style = ", style=bold" if e.parity else ""
        lines.append(f'  "{graph.node_label(u)}" -- "{graph.node_label(v)}" [label="{label}"{style}];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def write_graph(out_dir: Path, graph: AuxGraph, weights: Optional[WeightMatrix] = None) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    js = out_dir / f"graph_{graph.kind}.json"
    dot = out_dir / f"graph_{graph.kind}.dot"
    write_json(js, graph_to_dict(graph, weights))
    dot.write_text(graph_to_dot(graph, weights), encoding="utf-8", newline="\n")
    return [js, dot]
