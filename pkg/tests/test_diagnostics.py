import math

import numpy as np
import pytest

from qeccal.code_model import DetectorCoord, ErrorClass, ErrorSignature, build_schedule
from qeccal.correlation_inference import annotate_model, cycle_average, model_from_channels
from qeccal.diagnostics import (
    class_totals,
    delta_gamma_sweep,
    drift_closed_form,
    drift_demo,
    expected_class_totals,
    mean_syndrome_vs_cycle,
    p_vs_nu,
    time_decay_fit,
    tprime_analysis,
    validate_random_channels,
    xy_symmetry,
)
from qeccal.noise_sim import (
    NoiseParams,
    SignatureChannel,
    SyndromeDataset,
    channel_decomposition,
    sample_signature_channels,
    simulate_circuit,
)


@pytest.fixture(scope="module")
def exact_model(schedule_d3n4, catalog_d3):
    model = cycle_average(model_from_channels(channel_decomposition(schedule_d3n4, NoiseParams())), schedule_d3n4)
    return annotate_model(model, schedule_d3n4, catalog_d3)


def test_drift_closed_form_values():
    p1, p2, p12 = drift_closed_form(0.05)
    assert p12 == pytest.approx(0.003058, abs=1e-6)
    assert p1 == p2 == pytest.approx(0.5 - 0.5 * math.sqrt(0.82))
    _, _, small = drift_closed_form(0.005)
    assert 1.0 < small / 0.005**2 < 1.05
    assert drift_closed_form(0.05, 0.0)[2] == pytest.approx(0.0, abs=1e-15)


def test_drift_demo_without_shots_is_closed_form_only():
    r = drift_demo(0.02, 0.5)
    assert r.shots == 0 and r.sim_p12 is None
    assert r.p12 == pytest.approx(drift_closed_form(0.02, 0.5)[2])


@pytest.mark.parametrize("p,eps", [(0.0, 1.0), (0.3, 1.0), (0.05, 1.5), (0.05, -0.1)])
def test_drift_demo_validation(p, eps):
    with pytest.raises(ValueError):
        drift_demo(p, eps)


@pytest.mark.slow
def test_simulated_drift_reproduces_apparent_correlation():
    r = drift_demo(0.05, 1.0, n_shots=1_000_000, seed=6, n_boot=20)
    assert r.sim_p12 == pytest.approx(0.003058, abs=1e-3)
    assert r.sim_p12 > 0.0015
    assert r.sim_stderr is not None and r.sim_stderr < 1e-3


def test_class_totals_cover_injected_noise(exact_model, catalog_d3):
    report = class_totals(exact_model, catalog_d3)
    assert report.total(ErrorClass.B) > 0
    assert report.total(ErrorClass.T) > 0
    total = sum(r.total for r in report.rows)
    assert total == pytest.approx(sum(e.p for e in exact_model), rel=1e-9)
    with pytest.raises(KeyError):
        report.row("nope")


def test_expected_class_totals_matches_annotated_model(schedule_d3n4, catalog_d3, exact_model):
    a = expected_class_totals(schedule_d3n4, NoiseParams(), catalog_d3)
    b = class_totals(exact_model, catalog_d3)
    assert [r.total for r in a.rows] == pytest.approx([r.total for r in b.rows])


def test_p_vs_nu_skips_time_like_class(exact_model, catalog_d3):
    report = p_vs_nu(exact_model, catalog_d3)
    assert report.points
    assert all(pt.error_class != ErrorClass.T.value for pt in report.points)
    assert all(pt.nu >= 1 for pt in report.points)


def test_xy_pairs_of_exact_model_are_symmetric(exact_model, catalog_d3):
    for pt in xy_symmetry(exact_model, catalog_d3):
        assert pt.p_x == pytest.approx(pt.p_y)


def test_time_decay_on_quiet_data_skips_fit(layout3):
    sched = build_schedule(layout3, 8, "Z")
    ds = SyndromeDataset(sched.detector_list, np.zeros((50, len(sched.detector_list)), dtype=np.uint8))
    fit = time_decay_fit(ds)
    assert fit.dms[0] == 1
    assert fit.base is None
    assert "fit skipped" in fit.note


def test_mean_syndrome_rows(schedule_d3n4):
    ds = simulate_circuit(schedule_d3n4, NoiseParams(), 500, seed=2)
    rows = mean_syndrome_vs_cycle(ds)
    assert len(rows) == len(schedule_d3n4.detector_list)
    assert all(0.0 <= r.mean <= 1.0 for r in rows)
    assert rows == sorted(rows, key=lambda r: (r.ancilla, r.tick))


def test_tprime_analysis_reports_every_ancilla(schedule_d3n4):
    noise = NoiseParams(p_mc=0.01)
    ds = simulate_circuit(schedule_d3n4, noise, 5000, seed=9)
    reports = tprime_analysis(ds, schedule_d3n4, noise=noise, supports=(False,), n_boot=0)
    rep = reports[False]
    assert not rep.with_c
    assert {a.ancilla for a in rep.per_ancilla} <= set(schedule_d3n4.layout.ancilla_ids)
    assert rep.per_ancilla
    assert all(a.p_mc == 0.01 for a in rep.per_ancilla)


def test_small_validation_recovers_channels():
    rows = validate_random_channels(10, 3, 50_000, seed=2, n_nodes=12, n_boot=20)
    assert len(rows) == 10
    z = np.array([r.z for r in rows])
    assert np.all(np.isfinite(z))
    assert np.all(np.abs(z) <= 5)


def test_delta_gamma_sweep_rows():
    rows = delta_gamma_sweep(3, 3, [0.0, 0.5], [0.0, 0.5], 300, seed=1)
    assert [(r.delta, r.point.gamma) for r in rows] == [(0.0, 0.0), (0.0, 0.5), (0.5, 0.0), (0.5, 0.5)]
    assert all(0.0 <= r.point.fidelity <= 1.0 for r in rows)


@pytest.mark.slow
def test_random_channel_validation_at_scale():
    rows = validate_random_channels(83, 12, 100_000, seed=1)
    z = np.abs([r.z for r in rows])
    assert np.all(z <= 5)
    assert np.mean(z <= 2) >= 0.85


def test_time_decay_fit_sees_long_range_same_ancilla_correlations(layout3):
    sched = build_schedule(layout3, 12, "Z")
    dets = sched.detector_list
    present = set(dets)
    channels = [SignatureChannel(ErrorSignature((d,)), 0.02) for d in dets]
    for d in dets:
        for dm in (3, 4, 5):
            e = d.shifted(2 * dm)
            if e in present:
                channels.append(SignatureChannel(ErrorSignature((d, e)), 0.04 * 0.5 ** (dm - 3)))
    ds = sample_signature_channels(channels, dets, 40_000, seed=6)
    fit = time_decay_fit(ds, max_dm=5)
    assert fit.base is not None
    assert 0.0 < fit.base < 1.0


def test_weight_four_ancillas_fire_more_often(schedule_d3n4):
    ds = simulate_circuit(schedule_d3n4, NoiseParams(), 5000, seed=4)
    rows = [r for r in mean_syndrome_vs_cycle(ds) if schedule_d3n4.is_bulk(DetectorCoord(r.ancilla, r.tick))]
    heavy = [r.mean for r in rows if r.ancilla[1:] in ("2", "3")]
    light = [r.mean for r in rows if r.ancilla[1:] in ("1", "4")]
    assert heavy and light
    assert np.mean(heavy) > np.mean(light)
