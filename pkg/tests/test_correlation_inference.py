import numpy as np
import pytest

from qeccal.code_model import DetectorCoord, ErrorSignature, signature_from_pairs
from qeccal.correlation_inference import (
    STATUS_MISSING,
    InferredModel,
    ModelEntry,
    analytic_moments,
    build_support,
    covariance,
    covariance_panel,
    cycle_average,
    estimate_moments,
    estimate_support_moments,
    infer_pairwise_spitz,
    infer_probabilities,
    model_from_channels,
    subset_closure,
)
from qeccal.diagnostics import BIAS_NODES, bias_demo
from qeccal.noise_sim import SignatureChannel, SyndromeDataset, random_channels, sample_signature_channels

S1, S2, S3 = BIAS_NODES


def _sig(*nodes):
    return ErrorSignature(tuple(nodes))


def test_full_inversion_recovers_three_process_example():
    demo = bias_demo(0.03, 0.025, 0.01)
    full = demo.full
    assert full.p((S1,)) == pytest.approx(0.03, abs=1e-12)
    assert full.p((S1, S2)) == pytest.approx(0.025, abs=1e-12)
    assert full.p((S1, S2, S3)) == pytest.approx(0.01, abs=1e-12)
    for key in [(S2,), (S3,), (S1, S3), (S2, S3)]:
        assert full.p(key) == pytest.approx(0.0, abs=1e-12)
    assert not full.failures()


def test_pairwise_inversion_is_biased_by_the_triple():
    pw = bias_demo(0.03, 0.025, 0.01).pairwise
    assert pw.p((S1,)) == pytest.approx(0.020408, abs=1e-6)
    assert pw.p((S2,)) == pytest.approx(-0.010204, abs=1e-6)
    assert pw.p((S3,)) == pytest.approx(-0.010204, abs=1e-6)
    assert pw.p((S1, S2)) == pytest.approx(0.0345, abs=1e-12)
    # the triple leaks into every pair it covers
    assert pw.p((S1, S3)) == pytest.approx(0.01, abs=1e-12)
    assert pw.p((S2, S3)) == pytest.approx(0.01, abs=1e-12)


def test_pairwise_rejects_heavy_support():
    support = build_support([_sig(S1, S2, S3)])
    moments = analytic_moments([], subset_closure(support))
    with pytest.raises(ValueError):
        infer_pairwise_spitz(moments, support)


def test_analytic_round_trip_on_random_channels():
    _, channels = random_channels(30, 5, n_nodes=12, seed=3)
    support = build_support([c.signature for c in channels])
    model = infer_probabilities(analytic_moments(channels, subset_closure(support)), support)
    for c in channels:
        assert model.p(c.signature.detectors) == pytest.approx(c.p, abs=1e-9)


def test_missing_moment_is_reported_not_raised():
    support = build_support([_sig(S1, S2), _sig(S1)])
    moments = analytic_moments([SignatureChannel(_sig(S1), 0.1)], [(S1,), (S2,)])
    model = infer_probabilities(moments, support)
    assert model.get((S1, S2)).status == STATUS_MISSING
    assert np.isnan(model.p((S1, S2)))
    assert len(model.failures()) == 1


def test_moments_match_direct_parity_counts():
    rng = np.random.default_rng(0)
    nodes = tuple(DetectorCoord(f"N{i}", 0) for i in range(4))
    shots = (rng.random((1000, 4)) < 0.3).astype(np.uint8)
    ds = SyndromeDataset(nodes, shots)
    cache = estimate_moments(ds, [(nodes[0],), (nodes[0], nodes[2]), (nodes[1], nodes[2], nodes[3])])
    assert cache.value((nodes[0],)) == pytest.approx(1 - 2 * shots[:, 0].mean())
    par = shots[:, 0] ^ shots[:, 2]
    assert cache.value((nodes[0], nodes[2])) == pytest.approx(1 - 2 * par.mean())
    par3 = shots[:, 1] ^ shots[:, 2] ^ shots[:, 3]
    assert cache.value((nodes[1], nodes[2], nodes[3])) == pytest.approx(1 - 2 * par3.mean())


def test_estimate_moments_rejects_unknown_detectors():
    nodes = (DetectorCoord("N0", 0),)
    ds = SyndromeDataset(nodes, np.zeros((4, 1), dtype=np.uint8))
    with pytest.raises(ValueError):
        estimate_moments(ds, [(DetectorCoord("N1", 0),)])


def test_sampled_inversion_recovers_channels_with_bootstrap():
    nodes = tuple(DetectorCoord(f"N{i}", 0) for i in range(4))
    a, b, c, d = nodes
    channels = [
        SignatureChannel(_sig(a), 0.05),
        SignatureChannel(_sig(b), 0.02),
        SignatureChannel(_sig(a, b), 0.03),
        SignatureChannel(_sig(b, c), 0.04),
        SignatureChannel(_sig(a, c, d), 0.02),
        SignatureChannel(_sig(d), 0.06),
    ]
    ds = sample_signature_channels(channels, nodes, 200_000, seed=8)
    support = build_support([ch.signature for ch in channels])
    model = infer_probabilities(estimate_support_moments(ds, support, n_boot=20, seed=8), support)
    for ch in channels:
        e = model.get(ch.signature.detectors)
        assert e.p == pytest.approx(ch.p, abs=0.004)
        assert e.stderr is not None and 0 < e.stderr < 0.004


def test_covariance_of_shared_channel_is_positive():
    nodes = tuple(DetectorCoord(f"N{i}", 0) for i in range(3))
    channels = [SignatureChannel(_sig(nodes[0], nodes[1]), 0.1), SignatureChannel(_sig(nodes[2]), 0.1)]
    ds = sample_signature_channels(channels, nodes, 20_000, seed=1)
    assert covariance(ds, nodes[0], nodes[1]) == pytest.approx(0.09, abs=0.01)
    assert covariance(ds, nodes[0], nodes[2]) == pytest.approx(0.0, abs=0.01)


def test_covariance_panel_requires_half_cycle_steps(schedule_d3n4):
    ds = SyndromeDataset(schedule_d3n4.detector_list, np.zeros((8, len(schedule_d3n4.detector_list)), dtype=np.uint8))
    ancillas, panel = covariance_panel(ds, 0.5)
    assert len(ancillas) == 8
    assert panel.shape == (8, 8)
    with pytest.raises(ValueError):
        covariance_panel(ds, 0.3)


def test_cycle_average_uses_bulk_translates_only(schedule_d3n4):
    entries = {}
    for tick, p in [(2, 0.9), (4, 0.1), (6, 0.2)]:
        sig = signature_from_pairs([("Z1", tick)])
        entries[sig.detectors] = ModelEntry(sig, p, 0.01)
    avg = cycle_average(InferredModel(entries, "", 100), schedule_d3n4)
    assert avg.cycle_averaged
    e = avg.get([DetectorCoord("Z1", 0)])
    assert e.p == pytest.approx(0.15)
    assert e.stderr == pytest.approx(np.sqrt(2) * 0.01 / 2)


def test_model_from_channels_combines_equal_supports():
    a = DetectorCoord("N0", 0)
    model = model_from_channels([SignatureChannel(_sig(a), 0.1), SignatureChannel(_sig(a), 0.2)])
    assert model.p((a,)) == pytest.approx(0.1 * 0.8 + 0.2 * 0.9)


def test_pairwise_and_full_inversion_agree_on_pair_support():
    rng = np.random.default_rng(12)
    nodes = tuple(DetectorCoord(f"N{i}", 0) for i in range(6))
    channels = [SignatureChannel(_sig(n), float(rng.uniform(0.005, 0.05))) for n in nodes]
    for i in range(len(nodes)):
        for j in range(i + 1, len(nodes)):
            if rng.random() < 0.5:
                channels.append(SignatureChannel(_sig(nodes[i], nodes[j]), float(rng.uniform(0.005, 0.05))))
    support = build_support([c.signature for c in channels])
    moments = analytic_moments(channels, subset_closure(support))
    full = infer_probabilities(moments, support)
    pairwise = infer_pairwise_spitz(moments, support)
    for c in channels:
        key = c.signature.detectors
        assert pairwise.p(key) == pytest.approx(full.p(key), abs=1e-9)
        assert pairwise.p(key) == pytest.approx(c.p, abs=1e-9)
