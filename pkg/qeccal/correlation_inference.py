# qeccal:correlation_inference.py

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
Syndrome moments and their inversion into per-signature error probabilities.

With s_i = 1 - 2 sigma_i and independent signature channels, every moment
<prod_{i in U} s_i> is the product of (1 - 2 p_c) over channels c hitting U an
odd number of times. Inverting that system gives, for a signature S of weight n,

    1 - 2 p_S = prod_{U subset S} <s_U>^((-1)^(|U|-1) / 2^(n-1))
                / prod_{T strict superset of S in support} (1 - 2 p_T)

which is evaluated heaviest signature first. Moments come from bit-packed
shot columns; uncertainties from a block bootstrap over shots.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field, replace
from itertools import combinations
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from .catalog import FaultCatalog, catalog_for, classify_signature
from .code_model import CircuitSchedule, DetectorCoord, DetectorKey, ErrorSignature
from .config import N_BOOT_BLOCKS
from .noise_sim import SignatureChannel, SyndromeDataset

logger = logging.getLogger(__name__)

STATUS_OK = "ok"
STATUS_NONPOSITIVE = "nonpositive_moment"
STATUS_DENOMINATOR = "denominator"
STATUS_MISSING = "missing_moment"

_COV_CHUNK = 8192


def _key(detectors: Iterable[DetectorCoord]) -> DetectorKey:
    return tuple(sorted(set(detectors)))


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------

class MomentCache:
    """
    Subset -> <prod s_i>. Each row holds the estimate followed by its
    bootstrap replicates (n_boot of them, possibly zero).
    """

    def __init__(self, shots: int, n_boot: int = 0) -> None:
        self.shots = int(shots)
        self.n_boot = int(n_boot)
        self._index: dict[DetectorKey, int] = {}
        self._rows: list[np.ndarray] = []
        self._table: Optional[np.ndarray] = None

    @property
    def width(self) -> int:
        return 1 + self.n_boot

    def __len__(self) -> int:
        return len(self._index)

    def __contains__(self, key: DetectorKey) -> bool:
        return key in self._index

    def keys(self) -> list[DetectorKey]:
        return list(self._index)

    def put(self, key: DetectorKey, row) -> None:
        row = np.atleast_1d(np.asarray(row, dtype=np.float64))
        if row.shape != (self.width,):
            raise ValueError(f"moment row for {key} has shape {row.shape}, expected ({self.width},)")
        if not (-1.0 - 1e-12 <= row[0] <= 1.0 + 1e-12):
            raise ValueError(f"moment for {key} outside [-1, 1]: {row[0]}")
        if key in self._index:
            self._rows[self._index[key]] = row
        else:
            self._index[key] = len(self._rows)
            self._rows.append(row)
        self._table = None

    def value(self, key: DetectorKey) -> float:
        return float(self._rows[self._index[key]][0])

    def get(self, key: DetectorKey) -> tuple[float, int]:
        return self.value(key), self.shots

    def row(self, key: DetectorKey) -> np.ndarray:
        return self._rows[self._index[key]]

    def table(self) -> tuple[dict[DetectorKey, int], np.ndarray]:
        if self._table is None:
            self._table = np.vstack(self._rows) if self._rows else np.zeros((0, self.width))
        return self._index, self._table


@dataclass(frozen=True)
class ModelSupport:
    signatures: tuple[ErrorSignature, ...]

    def __len__(self) -> int:
        return len(self.signatures)

    @property
    def max_weight(self) -> int:
        return max((s.weight for s in self.signatures), default=0)

    def hash(self) -> str:
        return support_hash(self.signatures)


@dataclass(frozen=True)
class ModelEntry:
    signature: ErrorSignature
    p: float
    stderr: Optional[float] = None
    error_class: Optional[str] = None
    status: str = STATUS_OK
    nu: int = 0

    @property
    def ok(self) -> bool:
        return self.status == STATUS_OK


@dataclass
class InferredModel:
    entries: dict[DetectorKey, ModelEntry] = field(default_factory=dict)
    support_hash: str = ""
    shots: int = 0
    cycle_averaged: bool = False

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[ModelEntry]:
        for key in sorted(self.entries, key=lambda k: (-len(k), k)):
            yield self.entries[key]

    def p(self, detectors: Iterable[DetectorCoord]) -> float:
        return self.entries[_key(detectors)].p

    def get(self, detectors: Iterable[DetectorCoord]) -> Optional[ModelEntry]:
        return self.entries.get(_key(detectors))

    def failures(self) -> list[ModelEntry]:
        return [e for e in self if not e.ok]


def support_hash(signatures: Iterable[ErrorSignature]) -> str:
    slim = sorted([[d.ancilla, d.tick] for d in s.detectors] for s in signatures)
    blob = json.dumps(slim, separators=(",", ":"), ensure_ascii=False).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


def build_support(signatures: Iterable[ErrorSignature]) -> ModelSupport:
    """Distinct detector sets, heaviest first, canonical order within a weight."""
    seen: dict[DetectorKey, ErrorSignature] = {}
    for s in signatures:
        if s.detectors and s.detectors not in seen:
            seen[s.detectors] = s
    ordered = sorted(seen.values(), key=lambda s: (-s.weight, s.detectors))
    return ModelSupport(tuple(ordered))


def _subsets(key: DetectorKey) -> Iterator[DetectorKey]:
    for k in range(1, len(key) + 1):
        yield from combinations(key, k)


def subset_closure(support: ModelSupport) -> set[DetectorKey]:
    out: set[DetectorKey] = set()
    for s in support.signatures:
        out.update(_subsets(s.detectors))
    return out


def bulk_detectors(detector_list: Sequence[DetectorCoord]) -> set[DetectorCoord]:
    """Detectors outside the first and last cycle (the final readout counts as the last)."""
    if not detector_list:
        return set()
    last = max(d.cycle for d in detector_list)
    return {d for d in detector_list if 2 <= d.cycle <= last - 2}


# ---------------------------------------------------------------------------
# Moments
# ---------------------------------------------------------------------------

class _PackedShots:
    """Detector columns packed into uint64 words, grouped into bootstrap blocks."""

    def __init__(self, shots: np.ndarray, n_blocks: int) -> None:
        n, d = shots.shape
        bits = np.packbits(shots.astype(bool).T, axis=1, bitorder="little")
        n_words = max(1, -(-bits.shape[1] // 8))
        wpb = -(-n_words // max(1, min(n_blocks, n_words)))
        self.n_blocks = -(-n_words // wpb)
        self.words_per_block = wpb

        padded = np.zeros((d, self.n_blocks * wpb * 8), dtype=np.uint8)
        padded[:, : bits.shape[1]] = bits
        self.words = np.ascontiguousarray(padded).view(np.uint64)
        starts = np.arange(self.n_blocks) * wpb * 64
        self.block_sizes = np.clip(n - starts, 0, wpb * 64).astype(np.int64)
        self.n_shots = n

    def block_ones(self, row: np.ndarray) -> np.ndarray:
        counts = np.bitwise_count(row).reshape(self.n_blocks, self.words_per_block)
        return counts.sum(axis=1, dtype=np.int64)


def _bootstrap_weights(n_blocks: int, n_boot: int, seed: int) -> np.ndarray:
    if n_boot <= 0:
        return np.zeros((0, n_blocks), dtype=np.int64)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), 0xB007])))
    return rng.multinomial(n_blocks, np.full(n_blocks, 1.0 / n_blocks), size=n_boot)


def estimate_moments(
    dataset: SyndromeDataset,
    subsets: Iterable[Iterable[DetectorCoord]],
    *,
    n_boot: int = 0,
    seed: int = 0,
    exclude_boundary_cycles: bool = False,
    n_blocks: int = N_BOOT_BLOCKS,
) -> MomentCache:
    """
    <prod s_i> for every requested subset. Subsets are visited as a prefix
    trie so each moment costs one XOR of packed columns.
    """
    if dataset.n_shots == 0:
        raise ValueError("cannot estimate moments from an empty dataset")
    index = dataset.detector_index()
    keys: set[DetectorKey] = set()
    for s in subsets:
        k = _key(s)
        if not k:
            continue
        for d in k:
            if d not in index:
                raise ValueError(f"subset detector not in dataset: {d}")
        keys.add(k)

    if exclude_boundary_cycles:
        bulk = bulk_detectors(dataset.detector_list)
        keys = {k for k in keys if all(d in bulk for d in k)}

    children: dict[DetectorKey, set[DetectorCoord]] = {}
    for k in keys:
        for i in range(len(k)):
            children.setdefault(k[:i], set()).add(k[i])

    packed = _PackedShots(dataset.shots, n_blocks)
    weights = _bootstrap_weights(packed.n_blocks, n_boot, seed)
    resampled_sizes = weights @ packed.block_sizes if n_boot > 0 else None
    n = float(packed.n_shots)
    cache = MomentCache(dataset.n_shots, n_boot)

    def _visit(prefix: DetectorKey, acc: np.ndarray) -> None:
        for d in sorted(children.get(prefix, ())):
            key = prefix + (d,)
            cur = acc ^ packed.words[index[d]]
            ones = packed.block_ones(cur)
            row = np.empty(cache.width)
            row[0] = 1.0 - 2.0 * float(ones.sum()) / n
            if n_boot > 0:
                row[1:] = 1.0 - 2.0 * (weights @ ones) / resampled_sizes
            cache.put(key, row)
            _visit(key, cur)

    _visit((), np.zeros(packed.words.shape[1], dtype=np.uint64))
    logger.info("moments: %d subsets over %d shots (%d bootstrap replicates)", len(cache), dataset.n_shots, n_boot)
    return cache


def estimate_support_moments(
    dataset: SyndromeDataset,
    support: ModelSupport,
    *,
    n_boot: int = 0,
    seed: int = 0,
    exclude_boundary_cycles: bool = False,
) -> MomentCache:
    return estimate_moments(
        dataset,
        subset_closure(support),
        n_boot=n_boot,
        seed=seed,
        exclude_boundary_cycles=exclude_boundary_cycles,
    )


def analytic_moments(channels: Sequence[SignatureChannel], subsets: Iterable[Iterable[DetectorCoord]]) -> MomentCache:
    """Exact moments of independent channels: product of (1 - 2p) over odd overlaps."""
    sets = [(set(c.signature.detectors), 1.0 - 2.0 * c.p) for c in channels]
    cache = MomentCache(shots=0, n_boot=0)
    for s in subsets:
        k = _key(s)
        if not k:
            continue
        u = set(k)
        value = 1.0
        for dets, factor in sets:
            if len(dets & u) % 2 == 1:
                value *= factor
        cache.put(k, value)
    return cache


def covariance(dataset: SyndromeDataset, i: DetectorCoord, j: DetectorCoord) -> float:
    index = dataset.detector_index()
    for d in (i, j):
        if d not in index:
            raise ValueError(f"detector not in dataset: {d}")
    a = dataset.shots[:, index[i]].astype(np.float64)
    b = dataset.shots[:, index[j]].astype(np.float64)
    return float(np.mean(a * b) - a.mean() * b.mean())


def second_moments(shots: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(mean vector, E[s_i s_j] matrix) accumulated over fixed shot chunks."""
    n, d = shots.shape
    acc = np.zeros((d, d), dtype=np.float64)
    for start in range(0, n, _COV_CHUNK):
        chunk = shots[start:start + _COV_CHUNK].astype(np.float32)
        acc += (chunk.T @ chunk).astype(np.float64)
    mean = shots.mean(axis=0, dtype=np.float64)
    return mean, acc / max(n, 1)


def covariance_matrix(dataset: SyndromeDataset) -> np.ndarray:
    mean, e2 = second_moments(dataset.shots)
    return e2 - np.outer(mean, mean)


def covariance_panel(
    dataset: SyndromeDataset,
    dm: float,
    *,
    cov: Optional[np.ndarray] = None,
) -> tuple[list[str], np.ndarray]:
    """
    C[a, b] = cov(sigma_a at tick t, sigma_b at tick t + 2 dm), averaged over t
    with both detectors in the bulk. Entries with no valid t are NaN.
    """
    dt = int(round(2 * dm))
    if abs(2 * dm - dt) > 1e-9:
        raise ValueError(f"dm must be a multiple of 1/2, got {dm}")
    c = covariance_matrix(dataset) if cov is None else cov
    index = dataset.detector_index()
    bulk = bulk_detectors(dataset.detector_list)
    ancillas = sorted({d.ancilla for d in dataset.detector_list})
    out = np.full((len(ancillas), len(ancillas)), np.nan)
    for ia, a in enumerate(ancillas):
        mine = [d for d in dataset.detector_list if d.ancilla == a and d in bulk]
        for ib, b in enumerate(ancillas):
            vals = []
            for da in mine:
                db = DetectorCoord(b, da.tick + dt)
                if db in bulk and db in index:
                    vals.append(c[index[da], index[db]])
            if vals:
                out[ia, ib] = float(np.mean(vals))
    return ancillas, out


# ---------------------------------------------------------------------------
# Inversion
# ---------------------------------------------------------------------------

def _supersets(keys: list[DetectorKey]) -> list[np.ndarray]:
    """For each key, indices of strictly heavier keys containing it (keys sorted heaviest first)."""
    dets = sorted({d for k in keys for d in k})
    pos = {d: i for i, d in enumerate(dets)}
    n_words = max(1, -(-len(dets) // 64))
    masks = np.zeros((len(keys), n_words), dtype=np.uint64)
    postings: dict[int, list[int]] = {}
    for i, k in enumerate(keys):
        for d in k:
            p = pos[d]
            masks[i, p // 64] |= np.uint64(1) << np.uint64(p % 64)
            postings.setdefault(p, []).append(i)
    post_arr = {p: np.array(v, dtype=np.intp) for p, v in postings.items()}
    weights = np.array([len(k) for k in keys])

    out: list[np.ndarray] = []
    for i, k in enumerate(keys):
        rarest = min((pos[d] for d in k), key=lambda p: post_arr[p].size)
        cand = post_arr[rarest]
        cand = cand[weights[cand] > len(k)]
        if cand.size:
            hit = np.all((masks[cand] & masks[i]) == masks[i], axis=1)
            cand = cand[hit]
        out.append(cand)
    return out


def infer_probabilities(moments: MomentCache, support: ModelSupport) -> InferredModel:
    sigs = sorted(support.signatures, key=lambda s: (-s.weight, s.detectors))
    keys = [s.detectors for s in sigs]
    index, table = moments.table()
    width = moments.width
    with np.errstate(divide="ignore", invalid="ignore"):
        logtab = np.log(table)

    factors = np.full((len(sigs), width), np.nan)       # 1 - 2p per signature and replicate
    status: list[str] = [STATUS_OK] * len(sigs)
    supersets = _supersets(keys)

    for i, key in enumerate(keys):
        rows: list[int] = []
        signs: list[float] = []
        missing = False
        for u in _subsets(key):
            r = index.get(u)
            if r is None:
                missing = True
                break
            rows.append(r)
            signs.append(1.0 if len(u) % 2 == 1 else -1.0)
        if missing:
            status[i] = STATUS_MISSING
            continue
        if np.any(table[rows, 0] <= 0):
            status[i] = STATUS_NONPOSITIVE
            continue
        with np.errstate(invalid="ignore"):
            log_num = np.asarray(signs) @ logtab[rows]
            numerator = np.exp(log_num / 2.0 ** (len(key) - 1))

        sup = factors[supersets[i]]
        if sup.size:
            usable = sup[np.isfinite(sup[:, 0])]
            if usable.size and np.any(usable[:, 0] <= 0):
                status[i] = STATUS_DENOMINATOR
                continue
            denominator = np.prod(np.where(np.isfinite(usable), usable, 1.0), axis=0)
        else:
            denominator = np.ones(width)
        factors[i] = numerator / denominator

    entries: dict[DetectorKey, ModelEntry] = {}
    failed = 0
    for i, sig in enumerate(sigs):
        if status[i] != STATUS_OK:
            failed += 1
            logger.warning("inference failed for %s: %s", ",".join(map(str, sig.detectors)), status[i])
            entries[sig.detectors] = ModelEntry(sig, float("nan"), None, status=status[i])
            continue
        p = 0.5 - 0.5 * factors[i]
        entries[sig.detectors] = ModelEntry(sig, float(p[0]), _stderr(p[1:]))

    logger.info("inferred %d signatures (%d failed) from %d shots", len(entries), failed, moments.shots)
    return InferredModel(entries, support.hash(), moments.shots, cycle_averaged=False)


def _stderr(replicates: np.ndarray) -> Optional[float]:
    finite = replicates[np.isfinite(replicates)]
    if finite.size < 2:
        return None
    return float(np.std(finite, ddof=1))


def infer_pairwise_spitz(moments: MomentCache, pair_support: ModelSupport) -> InferredModel:
    """Closed form for supports of weight-1 and weight-2 signatures only."""
    if pair_support.max_weight > 2:
        raise ValueError(f"pairwise inversion needs signatures of weight <= 2, got {pair_support.max_weight}")
    width = moments.width
    entries: dict[DetectorKey, ModelEntry] = {}
    pair_factor: dict[DetectorKey, np.ndarray] = {}

    def _row(k: DetectorKey) -> Optional[np.ndarray]:
        return moments.row(k) if k in moments else None

    for sig in pair_support.signatures:
        if sig.weight != 2:
            continue
        i, j = sig.detectors
        mi, mj, mij = _row((i,)), _row((j,)), _row(sig.detectors)
        if mi is None or mj is None or mij is None:
            entries[sig.detectors] = ModelEntry(sig, float("nan"), None, status=STATUS_MISSING)
            continue
        if min(mi[0], mj[0], mij[0]) <= 0:
            entries[sig.detectors] = ModelEntry(sig, float("nan"), None, status=STATUS_NONPOSITIVE)
            continue
        with np.errstate(invalid="ignore", divide="ignore"):
            f = np.sqrt(mi * mj / mij)
        pair_factor[sig.detectors] = f
        p = 0.5 - 0.5 * f
        entries[sig.detectors] = ModelEntry(sig, float(p[0]), _stderr(p[1:]))

    for sig in pair_support.signatures:
        if sig.weight != 1:
            continue
        (i,) = sig.detectors
        mi = _row(sig.detectors)
        if mi is None:
            entries[sig.detectors] = ModelEntry(sig, float("nan"), None, status=STATUS_MISSING)
            continue
        den = np.ones(width)
        for key, f in sorted(pair_factor.items()):
            if i in key:
                den = den * f
        if den[0] <= 0:
            entries[sig.detectors] = ModelEntry(sig, float("nan"), None, status=STATUS_DENOMINATOR)
            continue
        p = 0.5 - mi / (2.0 * den)
        entries[sig.detectors] = ModelEntry(sig, float(p[0]), _stderr(p[1:]))

    return InferredModel(entries, pair_support.hash(), moments.shots, cycle_averaged=False)


# ---------------------------------------------------------------------------
# Cycle averaging and helpers
# ---------------------------------------------------------------------------

def cycle_average(model: InferredModel, schedule: CircuitSchedule) -> InferredModel:
    """
    Mean over time translates of each signature, first and last cycle excluded.
    Stderr of the mean assumes independent per-cycle estimates.
    """
    groups: dict[DetectorKey, list[ModelEntry]] = {}
    reps: dict[DetectorKey, ErrorSignature] = {}
    for e in model.entries.values():
        if not e.ok or not np.isfinite(e.p):
            continue
        if not all(schedule.is_bulk(d) for d in e.signature.detectors):
            continue
        canon = e.signature.canonical()
        groups.setdefault(canon.detectors, []).append(e)
        reps.setdefault(canon.detectors, canon)

    entries: dict[DetectorKey, ModelEntry] = {}
    for key, members in groups.items():
        ps = np.array([m.p for m in members])
        ses = [m.stderr for m in members]
        se = None
        if all(s is not None for s in ses):
            se = float(np.sqrt(np.sum(np.square(ses))) / len(ses))
        first = members[0]
        entries[key] = ModelEntry(reps[key], float(ps.mean()), se, first.error_class, STATUS_OK, first.nu)
    logger.info("cycle average: %d signatures -> %d classes", len(model), len(entries))
    return InferredModel(entries, model.support_hash, model.shots, cycle_averaged=True)


def model_from_channels(channels: Sequence[SignatureChannel], shots: int = 0) -> InferredModel:
    """Injected probabilities as a model; channels sharing detectors combine, flips follow the larger one."""
    entries: dict[DetectorKey, ModelEntry] = {}
    for c in sorted(channels, key=lambda c: -c.p):
        key = c.signature.detectors
        prev = entries.get(key)
        if prev is None:
            entries[key] = ModelEntry(c.signature, float(c.p))
        else:
            entries[key] = replace(prev, p=prev.p * (1 - c.p) + c.p * (1 - prev.p))
    return InferredModel(entries, support_hash(c.signature for c in channels), shots, cycle_averaged=False)


def annotate_model(
    model: InferredModel,
    schedule: CircuitSchedule,
    catalog: Optional[FaultCatalog] = None,
) -> InferredModel:
    """Attach error class, catalog multiplicity and logical flips to every entry."""
    cat = catalog if catalog is not None else catalog_for(schedule)
    entries: dict[DetectorKey, ModelEntry] = {}
    for key, e in model.entries.items():
        canon = e.signature.canonical()
        cls = classify_signature(canon, schedule.layout, schedule, catalog=cat)
        dom = cat.dominant(canon.detectors)
        sig = e.signature
        if dom is not None:
            sig = ErrorSignature(sig.detectors, dom.signature.logical_flip_x, dom.signature.logical_flip_z)
        entries[key] = replace(e, signature=sig, error_class=cls.value, nu=cat.nu(canon.detectors))
    return InferredModel(entries, model.support_hash, model.shots, model.cycle_averaged)
