import json
import math

import pytest

from qeccal.code_model import signature_from_pairs
from qeccal.correlation_inference import STATUS_NONPOSITIVE, InferredModel, ModelEntry
from qeccal.dataset_io import FormatError
from qeccal.matching_graph import build_aux_graph, compute_weights
from qeccal.model_io import (
    catalog_to_dict,
    format_model,
    graph_to_dot,
    parse_model,
    read_model,
    write_graph,
    write_model,
)


def _model():
    a = signature_from_pairs([("Z1", 4)], flip_z=True)
    b = signature_from_pairs([("X2", 7), ("Z1", 6)])
    c = signature_from_pairs([("Z3", 4), ("Z3", 8)])
    entries = {
        a.detectors: ModelEntry(a, 0.0123, 0.0004, "B", nu=3),
        b.detectors: ModelEntry(b, -0.0002, None, "S_Y", nu=1),
        c.detectors: ModelEntry(c, float("nan"), None, status=STATUS_NONPOSITIVE),
    }
    return InferredModel(entries, "abc123", 5000, cycle_averaged=False)


def test_model_round_trip(tmp_path):
    model = _model()
    path = tmp_path / "model.json"
    write_model(path, model)
    back = read_model(path)
    assert back.support_hash == "abc123"
    assert back.shots == 5000
    assert set(back.entries) == set(model.entries)
    for key, e in model.entries.items():
        got = back.entries[key]
        assert got.signature == e.signature
        assert got.error_class == e.error_class
        assert got.status == e.status
        assert got.nu == e.nu
        if math.isnan(e.p):
            assert math.isnan(got.p)
        else:
            assert got.p == e.p
    assert format_model(back) == path.read_text(encoding="utf-8")


def test_failed_entry_is_written_as_null():
    data = json.loads(format_model(_model()))
    failed = [e for e in data["entries"] if e["status"] != "ok"]
    assert failed[0]["p"] is None


def test_json_syntax_error_has_position():
    with pytest.raises(FormatError) as err:
        parse_model('{\n  "format": "qeccal-model",\n  "version": 1,\n  oops\n}\n', path="m.json")
    assert err.value.line == 4
    assert err.value.col == 3


@pytest.mark.parametrize(
    "entry",
    [
        {"detectors": [], "p": 0.1},
        {"detectors": [["Z1", 6], ["Z1", 4]], "p": 0.1},
        {"detectors": [["Z1", 4]], "p": None},
        {"detectors": [["Z1", 4]], "p": "0.1"},
        {"detectors": [["Z1", "4"]], "p": 0.1},
    ],
)
def test_bad_entries_are_rejected(entry):
    text = json.dumps({"format": "qeccal-model", "version": 1, "metadata": {}, "entries": [entry]})
    with pytest.raises(FormatError, match="entry 0"):
        parse_model(text)


def test_wrong_format_tag():
    with pytest.raises(FormatError):
        parse_model(json.dumps({"format": "other", "version": 1, "entries": []}))
    with pytest.raises(FormatError):
        parse_model(json.dumps({"format": "qeccal-model", "version": 9, "entries": []}))


def test_catalog_and_graph_exports(tmp_path, schedule_d3n4, catalog_d3):
    cat = catalog_to_dict(catalog_d3)
    assert cat["cz_combinations"] == 360
    assert len(cat["signatures"]) == len(catalog_d3)

    sig = signature_from_pairs([("Z1", 4)])
    model = InferredModel({sig.detectors: ModelEntry(sig, 0.01)})
    graph = build_aux_graph(model, "Z", 1, catalog_d3, schedule_d3n4)
    weights = compute_weights(graph)
    paths = write_graph(tmp_path, graph, weights)
    assert [p.name for p in paths] == ["graph_Z.json", "graph_Z.dot"]
    data = json.loads(paths[0].read_text(encoding="utf-8"))
    assert data["edges"][0]["u"] == "Z1@4"
    assert data["edges"][0]["v"] == "BNorth"
    assert graph_to_dot(graph).startswith("graph Z_graph {")
