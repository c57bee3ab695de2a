import numpy as np
import pytest

from conftest import idle_location
from qeccal.code_model import DetectorCoord, ErrorSignature, PauliFault, signature_from_pairs
from qeccal.noise_sim import (
    MODE_HETEROGENEOUS,
    DriftChannel,
    NoiseParams,
    SignatureChannel,
    SyndromeDataset,
    channel_decomposition,
    inject_drift,
    inject_faults,
    location_channels,
    random_channels,
    sample_signature_channels,
    simulate_circuit,
)


def _expected_means(channels, detector_list):
    index = {d: i for i, d in enumerate(detector_list)}
    prod = np.ones(len(detector_list))
    for ch in channels:
        for d in ch.signature.detectors:
            prod[index[d]] *= 1 - 2 * ch.p
    return (1 - prod) / 2


def test_simulation_is_deterministic(schedule_d3n4):
    noise = NoiseParams()
    a = simulate_circuit(schedule_d3n4, noise, 700, seed=11, block=256)
    b = simulate_circuit(schedule_d3n4, noise, 700, seed=11, block=256)
    c = simulate_circuit(schedule_d3n4, noise, 700, seed=11, block=256, threads=3)
    assert np.array_equal(a.shots, b.shots)
    assert np.array_equal(a.shots, c.shots)
    assert np.array_equal(a.truth, c.truth)
    d = simulate_circuit(schedule_d3n4, noise, 700, seed=12, block=256)
    assert not np.array_equal(a.shots, d.shots)


def test_noiseless_circuit_has_quiet_syndromes(schedule_d3n4):
    ds = simulate_circuit(schedule_d3n4, NoiseParams.noiseless(), 64, seed=1)
    assert ds.shots.shape == (64, len(schedule_d3n4.detector_list))
    assert not ds.shots.any()
    assert not ds.truth.any()
    assert location_channels(schedule_d3n4, NoiseParams.noiseless()) == []


def test_detector_means_follow_channel_decomposition(schedule_d3n4):
    noise = NoiseParams()
    n = 20_000
    ds = simulate_circuit(schedule_d3n4, noise, n, seed=5)
    expected = _expected_means(channel_decomposition(schedule_d3n4, noise), schedule_d3n4.detector_list)
    observed = ds.shots.mean(axis=0)
    sigma = np.sqrt(expected * (1 - expected) / n)
    assert np.all(np.abs(observed - expected) <= 5 * sigma + 1e-3)


def test_injected_fault_repeats_in_every_shot(schedule_d3n4):
    loc = idle_location(schedule_d3n4, "D1", 2)
    ds = inject_faults(schedule_d3n4, [PauliFault(loc, "X")], n_shots=3)
    col = ds.detector_index()[DetectorCoord("Z1", 4)]
    assert ds.shots.sum(axis=1).tolist() == [1, 1, 1]
    assert ds.shots[:, col].tolist() == [1, 1, 1]
    assert ds.truth[:, 1].all()


def test_heterogeneous_rates_are_reproducible(schedule_d3n4):
    noise = NoiseParams(mode=MODE_HETEROGENEOUS, delta=0.5, seed=3)
    a = location_channels(schedule_d3n4, noise)
    b = location_channels(schedule_d3n4, noise)
    assert a == b
    cz = {ch.p for ch in a if len(ch.paulis) == 15}
    assert len(cz) > 1


def test_signature_channel_sampling_matches_rates():
    nodes = tuple(DetectorCoord(f"N{i}", 0) for i in range(3))
    channels = [
        SignatureChannel(ErrorSignature((nodes[0],)), 0.1),
        SignatureChannel(ErrorSignature((nodes[0], nodes[1])), 0.05),
        SignatureChannel(ErrorSignature((nodes[2],)), 0.2),
    ]
    n = 50_000
    ds = sample_signature_channels(channels, nodes, n, seed=2)
    expected = _expected_means(channels, nodes)
    sigma = np.sqrt(expected * (1 - expected) / n)
    assert np.all(np.abs(ds.shots.mean(axis=0) - expected) <= 5 * sigma)
    assert ds.truth is None


def test_sampling_rejects_unknown_detectors():
    nodes = (DetectorCoord("N0", 0),)
    ch = [SignatureChannel(signature_from_pairs([("N1", 0)]), 0.1)]
    with pytest.raises(ValueError, match="unknown detector"):
        sample_signature_channels(ch, nodes, 10, seed=0)


def test_drift_switches_rate_at_split():
    node = DetectorCoord("N0", 0)
    ch = [DriftChannel(ErrorSignature((node,)), 0.0, 0.3)]
    ds = inject_drift(ch, (node,), 10_000, 0.5, seed=4)
    assert ds.shots[:5000].sum() == 0
    assert abs(ds.shots[5000:].mean() - 0.3) < 0.03


@pytest.mark.parametrize(
    "kwargs",
    [dict(p_1q=1.0), dict(p_ro=-0.1), dict(mode="bursty"), dict(t_bar_us=0.0), dict(delta=-1.0)],
)
def test_noise_params_validation(kwargs):
    with pytest.raises(ValueError):
        NoiseParams(**kwargs)


def test_input_validation():
    node = DetectorCoord("N0", 0)
    with pytest.raises(ValueError):
        SignatureChannel(ErrorSignature((node,)), 0.5)
    with pytest.raises(ValueError):
        inject_drift([], (node,), 100, 1.0, seed=0)
    with pytest.raises(ValueError):
        random_channels(10, 5, n_nodes=4)
    with pytest.raises(ValueError):
        random_channels(10, 3, p_range=(0.0, 0.1))
    with pytest.raises(ValueError):
        SyndromeDataset((node,), np.zeros((3, 2), dtype=np.uint8))


def test_random_channels_have_distinct_supports():
    nodes, channels = random_channels(83, 12, seed=9)
    assert len(nodes) == 60
    supports = [c.signature.detectors for c in channels]
    assert len(set(supports)) == 83
    assert all(1 <= len(s) <= 12 for s in supports)
    assert all(0.001 <= c.p <= 0.2 for c in channels)
