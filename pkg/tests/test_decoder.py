import logging
import math
from dataclasses import replace
from itertools import combinations

import networkx as nx
import numpy as np
import pytest

from conftest import idle_location
from qeccal.code_model import PauliFault, build_schedule
from qeccal.correlation_inference import model_from_channels
from qeccal.decoder import (
    CorrelatedConfig,
    CorrelatedDecoder,
    MatchingDecoder,
    compare_fidelity,
    conditional_probability,
    correlated_decode,
    decode_dataset,
    evaluate_fidelity,
    fidelity_vs_cycles,
    gamma_scan,
    interpolated_weight,
    mwpm,
    relative_improvement,
)
from qeccal.noise_sim import NoiseParams, SyndromeDataset, channel_decomposition, inject_faults, simulate_circuit


@pytest.fixture(scope="module")
def decoder_d3n4(schedule_d3n4, catalog_d3):
    model = model_from_channels(channel_decomposition(schedule_d3n4, NoiseParams()))
    return model, MatchingDecoder.from_model(model, schedule_d3n4, 2, catalog_d3)


@pytest.fixture(scope="module")
def decoder_d3n6(layout3, catalog_d3):
    schedule = build_schedule(layout3, 6, "Z")
    model = model_from_channels(channel_decomposition(schedule, NoiseParams()))
    return schedule, model, MatchingDecoder.from_model(model, schedule, 2, catalog_d3)


def _brute_force(nodes, w):
    if not nodes:
        return 0.0
    first, rest = nodes[0], nodes[1:]
    best = math.inf
    for k, other in enumerate(rest):
        best = min(best, w[first][other] + _brute_force(rest[:k] + rest[k + 1:], w))
    return best


def test_mwpm_matches_exhaustive_search():
    rng = np.random.default_rng(17)
    for _ in range(1000):
        n = 2 * int(rng.integers(1, 5))
        g = nx.complete_graph(n)
        w = {i: {} for i in range(n)}
        for i, j in combinations(range(n), 2):
            x = float(rng.uniform(0.0, 10.0))
            w[i][j] = w[j][i] = x
            g.edges[i, j].update(weight=x, parity=int(rng.integers(0, 2)), ends=(i, j))
        m = mwpm(g)
        assert m.weight == pytest.approx(_brute_force(list(range(n)), w), abs=1e-9)
        assert len(m.pairs) == n // 2


def test_mwpm_rejects_odd_graphs():
    with pytest.raises(ValueError):
        mwpm(nx.complete_graph(3))


def test_single_data_flip_is_corrected(schedule_d3n4, decoder_d3n4):
    _, dec = decoder_d3n4
    loc = idle_location(schedule_d3n4, "D1", 2)
    ds = inject_faults(schedule_d3n4, [PauliFault(loc, "X")])
    res = dec.decode_shot(ds.shots[0])
    assert ds.truth[0, 1]
    assert res.z_flip
    assert not res.x_flip


def test_two_flips_across_the_patch_fool_a_distance_three_code(schedule_d3n4, decoder_d3n4):
    _, dec = decoder_d3n4
    faults = [PauliFault(idle_location(schedule_d3n4, q, 2), "X") for q in ("D1", "D4")]
    ds = inject_faults(schedule_d3n4, faults)
    assert int(ds.shots[0].sum()) == 1
    res = dec.decode_shot(ds.shots[0])
    assert ds.truth[0, 1]
    assert res.z_flip != bool(ds.truth[0, 1])


def test_quiet_shot_decodes_to_no_flip(schedule_d3n4, decoder_d3n4):
    _, dec = decoder_d3n4
    res = dec.decode_shot(np.zeros(len(schedule_d3n4.detector_list), dtype=np.uint8))
    assert res.flips == (False, False)
    with pytest.raises(ValueError):
        dec.decode_shot(np.zeros(3, dtype=np.uint8))


def test_zero_gamma_reproduces_standard_decoding(schedule_d3n4, decoder_d3n4):
    model, dec = decoder_d3n4
    ds = simulate_circuit(schedule_d3n4, NoiseParams(), 300, seed=21)
    corr = CorrelatedDecoder(dec, model, CorrelatedConfig(gamma=0.0))
    assert np.array_equal(decode_dataset(ds, dec), decode_dataset(ds, corr))


def test_correlated_decoding_runs_on_circuit_data(schedule_d3n4, decoder_d3n4):
    model, dec = decoder_d3n4
    ds = simulate_circuit(schedule_d3n4, NoiseParams(), 400, seed=22)
    corr = CorrelatedDecoder(dec, model, CorrelatedConfig(gamma=0.5))
    cmp = compare_fidelity(ds, dec, corr)
    assert 0.5 < cmp.standard.fidelity <= 1.0
    assert 0.5 < cmp.modified.fidelity <= 1.0
    assert math.isfinite(cmp.relative_improvement)
    assert cmp.stderr >= 0


def test_correlated_decode_fixes_a_y_chain_standard_matching_misreads(decoder_d3n6):
    schedule, model, dec = decoder_d3n6
    # X parts cancel on Z3 and leave one Z2 defect; the Z parts flag X2-X3 and X3-X4
    faults = [
        PauliFault(idle_location(schedule, "D5", 3, "P.Z.rot2"), "Y"),
        PauliFault(idle_location(schedule, "D8", 4), "Y"),
    ]
    ds = inject_faults(schedule, faults)
    shot = ds.shots[0]
    assert [str(d) for d in dec.defects(shot, "Z")] == ["Z2@8"]
    assert sorted(str(d) for d in dec.defects(shot, "X")) == ["X2@7", "X3@7", "X3@9", "X4@9"]
    assert not ds.truth[0, 1]

    # one edge to the north boundary beats the two-edge chain to the south
    assert dec.decode_shot(shot).z_flip

    res = correlated_decode(shot, dec.graphs, dec.weights, model, CorrelatedConfig(gamma=1.0))
    assert res.updated_edges
    assert {kind for kind, *_ in res.updated_edges} == {"Z"}
    assert res.z_flip == bool(ds.truth[0, 1])


def test_flagging_counts_hops_on_the_weights_the_matching_used(decoder_d3n6):
    schedule, model, dec = decoder_d3n6
    ds = inject_faults(schedule, [PauliFault(idle_location(schedule, "D5", 3, "P.Z.rot2"), "Y")])
    corr = CorrelatedDecoder(dec, model, CorrelatedConfig(gamma=1.0))
    matching = dec.match("X", dec.defects(ds.shots[0], "X"))
    assert corr.updates_from("X", matching)
    no_hops = replace(dec.weights["X"], path_length=np.zeros_like(dec.weights["X"].path_length))
    assert corr.updates_from("X", matching, no_hops) == {}


class _Records(logging.Handler):
    def __init__(self) -> None:
        super().__init__(logging.DEBUG)
        self.records: list[logging.LogRecord] = []

    def emit(self, record: logging.LogRecord) -> None:
        self.records.append(record)


def test_absent_flagged_edges_warn_once_per_kind(decoder_d3n4):
    model, dec = decoder_d3n4
    corr = CorrelatedDecoder(dec, model, CorrelatedConfig(gamma=1.0))
    log = logging.getLogger("qeccal.decoder")
    handler, level = _Records(), log.level
    log.addHandler(handler)
    log.setLevel(logging.DEBUG)
    try:
        corr._updated_weights("Z", {(0, 0): 0.3})
        corr._updated_weights("Z", {(1, 1): 0.3})
    finally:
        log.removeHandler(handler)
        log.setLevel(level)
    absent = [r for r in handler.records if "absent" in r.getMessage()]
    assert [r.levelno for r in absent] == [logging.WARNING, logging.DEBUG]
    assert corr.skipped_updates == {"X": 0, "Z": 2}


def test_decode_dataset_checks_detector_list(schedule_d3n4, decoder_d3n4):
    _, dec = decoder_d3n4
    ds = SyndromeDataset(schedule_d3n4.detector_list[:-1], np.zeros((2, len(schedule_d3n4.detector_list) - 1), dtype=np.uint8))
    with pytest.raises(ValueError):
        decode_dataset(ds, dec)
    no_truth = SyndromeDataset(schedule_d3n4.detector_list, np.zeros((2, len(schedule_d3n4.detector_list)), dtype=np.uint8))
    with pytest.raises(ValueError, match="truth"):
        evaluate_fidelity(no_truth, dec)


def test_weight_interpolation():
    assert conditional_probability(0.02, 0.03, 0.01) == pytest.approx(0.5)
    assert conditional_probability(0.02, 0.0, 0.0) == 0.0
    assert interpolated_weight(0.01, 0.5, 0.0) == pytest.approx(-math.log(0.01))
    assert interpolated_weight(0.01, 0.5, 1.0) == pytest.approx(-math.log(0.5))
    assert interpolated_weight(0.01, 0.5, 0.5) == pytest.approx(-0.5 * (math.log(0.01) + math.log(0.5)))
    assert relative_improvement(0.9, 0.8) == pytest.approx(0.1 / 0.85)


@pytest.mark.parametrize("kwargs", [dict(gamma=1.5), dict(gamma=-0.1), dict(first_kind="Y"), dict(max_iterations=0)])
def test_correlated_config_validation(kwargs):
    with pytest.raises(ValueError):
        CorrelatedConfig(**kwargs)


@pytest.mark.slow
def test_fidelity_decays_with_cycles_and_inferred_weights_beat_uniform():
    points = fidelity_vs_cycles(3, [2, 4, 8], NoiseParams(), 20_000, seed=3, uniform_p=0.01)
    for a, b in zip(points, points[1:]):
        assert b.fidelity <= a.fidelity + 2 * math.hypot(a.stderr, b.stderr)
    for p in points:
        assert p.fidelity >= p.uniform_fidelity - 2 * math.hypot(p.stderr, p.uniform_stderr)


@pytest.mark.slow
def test_gamma_scan_does_not_degrade_fidelity(layout3):
    schedule = build_schedule(layout3, 3, "Z")
    noise = NoiseParams()
    ds = simulate_circuit(schedule, noise, 200_000, seed=5, threads=4)
    model = model_from_channels(channel_decomposition(schedule, noise))
    points = {p.gamma: p for p in gamma_scan(ds, model, schedule, [0.0, 0.5, 0.95])}
    assert points[0.0].relative_improvement == 0.0
    assert points[0.5].relative_improvement >= -2 * points[0.5].relative_stderr
    assert points[0.95].fidelity <= points[0.5].fidelity + 2 * math.hypot(points[0.5].stderr, points[0.95].stderr)
