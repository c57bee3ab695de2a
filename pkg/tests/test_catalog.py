import pytest

from conftest import cz_location, idle_location
from qeccal.catalog import (
    classify_signature,
    generate_c_class,
    matches_c_template,
    propagate_fault,
    propagate_faults,
    translate_signatures,
)
from qeccal.code_model import SLOT_RECORD, ErrorClass, PauliFault, signature_from_pairs


def test_catalog_counts_cz_combinations(catalog_d3):
    assert catalog_d3.cz_combinations == 360
    assert len(catalog_d3) > 0
    assert all(sig.canonical() == sig for sig in catalog_d3.entries)


def test_data_flip_before_z_map_hits_one_boundary_plaquette(schedule_d3n4):
    loc = idle_location(schedule_d3n4, "D1", 2)
    sig = propagate_fault(schedule_d3n4, PauliFault(loc, "X"))
    assert sig == signature_from_pairs([("Z1", 4)], flip_z=True)


def test_data_flip_on_shared_qubit_hits_two_plaquettes(schedule_d3n4):
    loc = idle_location(schedule_d3n4, "D4", 2)
    sig = propagate_fault(schedule_d3n4, PauliFault(loc, "X"))
    assert sig == signature_from_pairs([("Z1", 4), ("Z3", 4)])


def test_propagate_faults_is_columnwise(schedule_d3n4):
    a = PauliFault(idle_location(schedule_d3n4, "D1", 2), "X")
    b = PauliFault(idle_location(schedule_d3n4, "D4", 2), "X")
    sa, sb = propagate_faults(schedule_d3n4, [a, b])
    assert sa == propagate_fault(schedule_d3n4, a)
    assert sb == propagate_fault(schedule_d3n4, b)
    assert sa.combine(sb) == signature_from_pairs([("Z3", 4)], flip_z=True)


def test_propagate_rejects_bad_faults(schedule_d3n4):
    loc = idle_location(schedule_d3n4, "D1", 2)
    with pytest.raises(ValueError):
        propagate_fault(schedule_d3n4, PauliFault(loc, "XX"))
    with pytest.raises(ValueError):
        propagate_fault(schedule_d3n4, PauliFault(len(schedule_d3n4.locations), "X"))


def test_catalog_contains_single_data_flip(catalog_d3):
    entries = catalog_d3.lookup(signature_from_pairs([("Z1", 0)]).detectors)
    assert entries
    assert catalog_d3.nu(signature_from_pairs([("Z1", 0)]).detectors) >= 1


def test_classify_boundary_and_time_classes(layout3, schedule_d3n4, catalog_d3):
    def cls(pairs):
        return classify_signature(signature_from_pairs(pairs), layout3, schedule_d3n4, catalog=catalog_d3)

    assert cls([("Z1", 4)]) == ErrorClass.B
    assert cls([("Z1", 4), ("Z1", 6)]) == ErrorClass.T
    assert cls([("Z1", 4), ("Z1", 8)]) == ErrorClass.TPRIME
    assert cls([]) == ErrorClass.UNCLASSIFIED


def test_translate_signatures_covers_every_cycle(schedule_d3n4):
    out = translate_signatures([signature_from_pairs([("Z1", 2)])], schedule_d3n4)
    assert [s.detectors[0].tick for s in out] == [2, 4, 6, 8, 10]
    # translates that would leave the detector list are dropped
    x_out = translate_signatures([signature_from_pairs([("X2", 7)])], schedule_d3n4)
    assert [s.detectors[0].tick for s in x_out] == [7, 9]


def test_c_class_excludes_catalog_signatures(layout3, schedule_d3n4, catalog_d3):
    out = generate_c_class(layout3, schedule_d3n4, catalog=catalog_d3)
    known = set(catalog_d3.by_detectors)
    assert len(out) == 2584
    assert all(s.weight >= 2 for s in out)
    assert not any(s.detectors in known for s in out)
    assert all(matches_c_template(s, layout3) for s in out)


def test_c_class_rejects_bad_windows(layout3, schedule_d3n4, catalog_d3):
    with pytest.raises(ValueError):
        generate_c_class(layout3, schedule_d3n4, 0, 2, catalog=catalog_d3)
    with pytest.raises(ValueError):
        generate_c_class(layout3, schedule_d3n4, 3, 4, catalog=catalog_d3, budget=64)


def test_bulk_catalog_size(catalog_d3):
    # Pauli faults give 112 signatures; flipped records on the 8 ancillas add one each
    record_only = [
        e for e in catalog_d3.entries.values() if all(catalog_d3.location(f).slot == SLOT_RECORD for f in e.faults)
    ]
    assert len(catalog_d3) == 120
    assert len(record_only) == 8
    assert len(catalog_d3) - len(record_only) == 112


def test_every_catalog_signature_is_classified(layout3, schedule_d3n4, catalog_d3):
    classes = {sig: classify_signature(sig, layout3, schedule_d3n4, catalog=catalog_d3) for sig in catalog_d3.entries}
    assert ErrorClass.UNCLASSIFIED not in classes.values()
    assert ErrorClass.C not in classes.values()
    for entry in catalog_d3.entries.values():
        if all(catalog_d3.location(f).slot == SLOT_RECORD for f in entry.faults):
            assert classes[entry.signature] == ErrorClass.TPRIME


def test_catalog_signatures_flip_at_most_two_detectors_per_kind(catalog_d3):
    for sig in catalog_d3.entries:
        assert len(sig.restrict("X")) <= 2, sig
        assert len(sig.restrict("Z")) <= 2, sig


def test_ancilla_flip_mid_parity_map_is_a_hook(layout3, schedule_d3n4, catalog_d3):
    # Z3 meets D4, D7, D5, D8; a flip after the second CZ dephases D5 and D8
    sig = propagate_fault(schedule_d3n4, PauliFault(cz_location(schedule_d3n4, "Z3", "D7", 3), "XI"))
    assert not sig.restrict("Z")
    assert len(sig.restrict("X")) in (2, 4)
    assert sig == signature_from_pairs([("X2", 7), ("X4", 7)])
    assert classify_signature(sig, layout3, schedule_d3n4, catalog=catalog_d3) == ErrorClass.H_X


def test_ancilla_flip_after_first_cz_matches_a_data_phase_flip(schedule_d3n4):
    # D7, D5, D8 dephased is D4 dephased times the Z3 stabilizer
    hook = propagate_fault(schedule_d3n4, PauliFault(cz_location(schedule_d3n4, "Z3", "D4", 3), "XI"))
    data = propagate_fault(schedule_d3n4, PauliFault(idle_location(schedule_d3n4, "D4", 3, "P.Z.rot2"), "Z"))
    assert hook.detectors
    assert hook == data
