import pytest

from qeccal.code_model import (
    EAST,
    KIND_X,
    KIND_Z,
    NORTH,
    SOUTH,
    WEST,
    DetectorCoord,
    ErrorSignature,
    build_layout,
    build_schedule,
    expected_detector_count,
    signature_from_pairs,
)


def test_layout_d3_qubits_and_plaquettes(layout3):
    assert len(layout3.data_qubits) == 9
    assert layout3.ancillas_of(KIND_X) == ("X1", "X2", "X3", "X4")
    assert layout3.ancillas_of(KIND_Z) == ("Z1", "Z2", "Z3", "Z4")
    sizes = {a: len(layout3.plaquette(a)) for a in layout3.ancilla_ids}
    assert sorted(sizes.values()) == [2, 2, 2, 2, 4, 4, 4, 4]
    assert layout3.plaquette("Z1") == frozenset({"D1", "D4"})
    assert layout3.plaquette("X1") == frozenset({"D2", "D3"})


def test_layout_d3_boundaries(layout3):
    assert [layout3.boundary_of(a) for a in ("X1", "X2", "X3", "X4")] == [EAST, WEST, EAST, WEST]
    assert [layout3.boundary_of(a) for a in ("Z1", "Z2", "Z3", "Z4")] == [NORTH, NORTH, SOUTH, SOUTH]


def test_layout_logicals(layout3):
    assert layout3.logical_support(KIND_Z) == frozenset({"D1", "D2", "D3"})
    assert layout3.logical_support(KIND_X) == frozenset({"D1", "D4", "D7"})


def test_every_data_qubit_is_covered_by_both_kinds():
    layout = build_layout(5)
    for q in layout.data_ids:
        kinds = {a[0] for a in layout.ancilla_ids if q in layout.plaquette(a)}
        assert kinds == {"X", "Z"}


@pytest.mark.parametrize("d", [1, 2, 4, 0])
def test_layout_rejects_bad_distance(d):
    with pytest.raises(ValueError):
        build_layout(d)


def test_schedule_detector_count_d3_n16(layout3):
    sched = build_schedule(layout3, 16, "Z")
    assert len(sched.detector_list) == 124
    assert expected_detector_count(3, 16) == 124


@pytest.mark.parametrize("d,n", [(3, 1), (3, 2), (3, 5), (5, 3)])
def test_schedule_detector_count_matches_formula(d, n):
    sched = build_schedule(build_layout(d), n, "Z")
    assert len(sched.detector_list) == expected_detector_count(d, n)


def test_single_cycle_keeps_only_data_readout_detectors(layout3):
    sched = build_schedule(layout3, 1, "Z")
    assert expected_detector_count(3, 1) == 4
    assert [str(d) for d in sched.detector_list] == ["Z1@4", "Z2@4", "Z3@4", "Z4@4"]
    assert not sched.detectors_of(KIND_X)


def test_schedule_detector_ticks(layout3):
    sched = build_schedule(layout3, 16, "Z")
    z_ticks = sorted({d.tick for d in sched.detectors_of(KIND_Z)})
    x_ticks = sorted({d.tick for d in sched.detectors_of(KIND_X)})
    assert z_ticks == list(range(2, 35, 2))
    assert x_ticks == list(range(7, 34, 2))
    assert sched.final_tick == 34


def test_schedule_x_basis_swaps_roles(layout3):
    sched = build_schedule(layout3, 4, "X")
    assert all(d.tick % 2 == 0 for d in sched.detectors_of(KIND_X))
    assert all(d.tick % 2 == 1 for d in sched.detectors_of(KIND_Z))
    assert len(sched.detector_list) == expected_detector_count(3, 4)


def test_schedule_rejects_bad_arguments(layout3):
    with pytest.raises(ValueError):
        build_schedule(layout3, 0)
    with pytest.raises(ValueError):
        build_schedule(layout3, 3, "Y")


def test_cz_count_per_cycle(schedule_d3n4):
    # both parity maps run in a bulk cycle: 12 CZs each
    assert len(schedule_d3n4.cz_locations_in_cycle(2)) == 24
    assert len(schedule_d3n4.cz_locations_in_cycle(1)) == 12


def test_signature_normalises_detectors():
    a, b = DetectorCoord("Z1", 6), DetectorCoord("Z1", 4)
    sig = ErrorSignature((a, b, a))
    assert sig.detectors == (b, a)
    assert sig.weight == 2
    assert sig.tick_span() == 2


def test_signature_canonical_keeps_tick_parity():
    sig = signature_from_pairs([("X2", 7), ("Z1", 8)])
    canon = sig.canonical()
    assert [d.tick for d in canon.detectors] == [1, 2]
    assert canon.shifted(6) == sig


def test_signature_combine_is_symmetric_difference():
    s1 = signature_from_pairs([("Z1", 4), ("Z3", 4)], flip_z=True)
    s2 = signature_from_pairs([("Z3", 4)], flip_z=True)
    both = s1.combine(s2)
    assert both.detectors == (DetectorCoord("Z1", 4),)
    assert not both.logical_flip_z


def test_restrict_by_kind():
    sig = signature_from_pairs([("X2", 5), ("Z1", 4), ("Z1", 6)])
    assert sig.restrict(KIND_Z) == (DetectorCoord("Z1", 4), DetectorCoord("Z1", 6))
    assert sig.restrict(KIND_X) == (DetectorCoord("X2", 5),)


def test_detector_coord_str_and_cycle():
    d = DetectorCoord("X3", 7)
    assert str(d) == "X3@7"
    assert d.cycle == 3
