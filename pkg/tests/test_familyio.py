import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from conftest import fixture_path
from graphgen import random_family
from stabred.engine import reduce_family
from stabred.errors import GraphError, SchemaError, StabRedError
from stabred.familyio import dump_family, graph_to_document, load_family, parse_family, validate_document

MODES = ["pairs", "triples", "rational_base", "elliptic_base"]


def doc(**over):
    d = {
        "version": "1",
        "mode": "pairs",
        "nodes": [{"id": "S", "genus": 2, "j": "const", "fibres": [{"orders": "(1, 1)"}]}],
        "edges": [],
    }
    d.update(over)
    return d


def test_minimal():
    g = parse_family(json.dumps(doc()))
    assert list(g.nodes) == ["S"]
    assert str(g.nodes["S"].q_squared) == "-1/6"


@pytest.mark.parametrize(
    "change",
    [
        {"version": "2"},
        {"mode": "quads"},
        {"extra": 1},
        {"nodes": []},
        {"nodes": [{"id": "S", "genus": -1, "j": "const"}]},
        {"nodes": [{"id": "S", "genus": 2, "j": "const", "colour": "red"}]},
        {"nodes": [{"id": "S", "genus": 2, "j": "sometimes"}]},
        {"nodes": [{"id": "S", "genus": 2, "j": "const", "fibres": [{"orders": "(1, x)"}]}]},
        {"nodes": [{"id": "S", "genus": 2, "j": "const"}, {"id": "S", "genus": 0, "j": "const"}],
         "edges": [{"a": "S", "b": "S"}]},
    ],
)
def test_rejected(change):
    with pytest.raises(SchemaError):
        parse_family(json.dumps(doc(**change)))


def test_graph_errors_pass_through():
    with pytest.raises(GraphError):
        parse_family(json.dumps(doc(edges=[{"a": "S", "b": "T"}])))
    with pytest.raises(GraphError):
        parse_family(json.dumps(doc(edges=[{"a": "S", "b": "S", "monodromy": 2, "kind": "stable"}])))


def test_error_names_the_path():
    with pytest.raises(SchemaError, match="nodes/0/genus"):
        validate_document(doc(nodes=[{"id": "S", "genus": "two", "j": "const"}]))


def test_not_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{")
    with pytest.raises(SchemaError):
        load_family(p)
    with pytest.raises(SchemaError):
        load_family(tmp_path / "missing.json")


def test_fixtures_load():
    g = load_family(fixture_path("rational_three_chain.json"))
    assert g.mode == "rational_base" and len(g.nodes) == 3


def test_reduced_graph_schema_valid():
    final, _ = reduce_family(load_family(fixture_path("rational_three_chain.json")))
    validate_document(graph_to_document(final))
    assert parse_family(dump_family(final)) == final


@settings(max_examples=100)
@given(st.integers(0, 10**6))
def test_round_trip(seed):
    rng = random.Random(seed)
    g = random_family(rng, rng.randint(1, 10), rng.choice(MODES))
    text = dump_family(g)
    again = parse_family(text)
    assert again == g
    assert dump_family(again) == text
    try:
        final, _ = reduce_family(g)
    except StabRedError:
        return
    assert parse_family(dump_family(final)) == final
