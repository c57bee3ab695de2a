import math

import pytest

from qeccal.catalog import catalog_for, schedule_signatures
from qeccal.code_model import build_layout, build_schedule
from qeccal.correlation_inference import (
    annotate_model,
    build_support,
    cycle_average,
    estimate_support_moments,
    infer_probabilities,
    model_from_channels,
)
from qeccal.diagnostics import p_vs_nu, xy_symmetry
from qeccal.noise_sim import NoiseParams, channel_decomposition, simulate_circuit

pytestmark = pytest.mark.slow


@pytest.fixture(scope="module")
def calibration():
    schedule = build_schedule(build_layout(3), 16, "Z")
    catalog = catalog_for(schedule)
    noise = NoiseParams()
    data = simulate_circuit(schedule, noise, 200_000, seed=11, threads=4)
    support = build_support(schedule_signatures(schedule))
    moments = estimate_support_moments(data, support, n_boot=50, seed=11)
    inferred = annotate_model(cycle_average(infer_probabilities(moments, support), schedule), schedule, catalog)
    exact = annotate_model(
        cycle_average(model_from_channels(channel_decomposition(schedule, noise)), schedule), schedule, catalog
    )
    return schedule, catalog, inferred, exact


def test_inferred_rates_agree_with_first_order_channels(calibration):
    _, _, inferred, exact = calibration
    checked = within = 0
    for key, e in inferred.entries.items():
        ref = exact.entries.get(key)
        if ref is None or not e.ok or not e.stderr or not math.isfinite(e.p):
            continue
        checked += 1
        if abs(e.p - ref.p) <= 5 * e.stderr + 1e-4:
            within += 1
    assert checked > 50
    assert within / checked >= 0.9


def test_x_and_y_faults_sit_on_the_diagonal(calibration):
    _, catalog, inferred, _ = calibration
    points = xy_symmetry(inferred, catalog)
    assert points
    close = 0
    for pt in points:
        sigma = math.hypot(pt.stderr_x or 0.0, pt.stderr_y or 0.0)
        if abs(pt.p_x - pt.p_y) <= 3 * sigma + 1e-4:
            close += 1
    assert close / len(points) >= 0.9


def test_probability_grows_with_fault_multiplicity(calibration):
    _, catalog, inferred, _ = calibration
    report = p_vs_nu(inferred, catalog)
    assert report.spearman > 0.5
