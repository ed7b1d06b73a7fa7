"""Reading and writing family files.

A family file is JSON with an explicit ``version``; unknown fields are
rejected.  Input files describe standard components only; the optional
``kind``/``exceptional``/``q_squared``/``splice``/``twist_lcm`` fields let the same format
carry intermediate and final states, so a reduced graph can be written out
and read back unchanged.
"""

from __future__ import annotations

import json
import re
from dataclasses import replace
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema

from .component import ComponentKind, FibreRecord, JClass, SurfaceComponent
from .engine import Edge, FamilyGraph
from .errors import GraphError, SchemaError, StabRedError
from .weierstrass import format_fibre, parse_fibre

FORMAT_VERSION = "1"
_KIND_RE = re.compile(r"^([a-zA-Z0-9_]+)(?:\((\d+)\))?$")


@lru_cache(maxsize=None)
def load_schema(name: str) -> dict:
    text = resources.files("stabred").joinpath("schemas", f"{name}.schema.json").read_text()
    return json.loads(text)


def _validator(name: str) -> jsonschema.protocols.Validator:
    schema = load_schema(name)
    cls = jsonschema.validators.validator_for(schema)
    return cls(schema)


def validate_document(doc: Any, name: str = "family") -> None:
    errors = sorted(_validator(name).iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        where = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise SchemaError(f"{where}: {e.message}")


def parse_kind(text: str) -> ComponentKind:
    m = _KIND_RE.match(text)
    if not m:
        raise SchemaError(f"bad component kind {text!r}")
    tag, param = m.group(1), m.group(2)
    return ComponentKind(tag, int(param) if param is not None else None)


def graph_from_document(doc: Any) -> FamilyGraph:
    validate_document(doc)
    nodes: dict[str, SurfaceComponent] = {}
    try:
        for raw in doc["nodes"]:
            node_id = raw["id"]
            if node_id in nodes:
                raise SchemaError(f"duplicate node id {node_id!r}")
            fibres = tuple(
                FibreRecord(parse_fibre(f["orders"]), f.get("monodromy", 1)) for f in raw.get("fibres", ())
            )
            q = raw.get("q_squared")
            nodes[node_id] = SurfaceComponent(
                id=node_id,
                genus=raw["genus"],
                j_class=JClass.from_text(raw["j"]),
                fibres=fibres,
                kind=parse_kind(raw.get("kind", "standard")),
                exceptional=tuple(Fraction(e) for e in raw.get("exceptional", ())),
                q_squared=Fraction(q) if q is not None else None,
            )
        edges = []
        for raw in doc.get("edges", ()):
            k = raw.get("monodromy", 1)
            edges.append(Edge(raw["a"], raw["b"], k, raw.get("kind", "twisted" if k > 1 else "stable"),
                              raw.get("splice", False)))
    except GraphError:
        raise
    except (StabRedError, ValueError) as err:
        raise SchemaError(str(err)) from err
    return FamilyGraph(nodes, tuple(edges), doc["mode"], doc.get("twist_lcm", 1))


def parse_family(text: str) -> FamilyGraph:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise SchemaError(f"not valid JSON: {err}") from err
    return graph_from_document(doc)


def load_family(path: str | Path) -> FamilyGraph:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as err:
        raise SchemaError(f"cannot read {path}: {err.strerror or err}") from err
    return parse_family(text)


def graph_to_document(g: FamilyGraph) -> dict:
    nodes = []
    for c in g.nodes.values():
        raw: dict[str, Any] = {"id": c.id, "genus": c.genus, "j": c.j_class.text()}
        raw["fibres"] = [{"orders": format_fibre(f.data), "monodromy": f.monodromy} for f in c.fibres]
        if str(c.kind) != "standard":
            raw["kind"] = str(c.kind)
        if c.exceptional:
            raw["exceptional"] = [str(e) for e in c.exceptional]
        if c.q_squared is not None:
            raw["q_squared"] = str(c.q_squared)
        nodes.append(raw)
    edges = []
    for e in g.edges:
        raw = {"a": e.a, "b": e.b, "monodromy": e.monodromy, "kind": e.kind}
        if e.splice:
            raw["splice"] = True
        edges.append(raw)
    out = {"version": FORMAT_VERSION, "mode": g.mode, "nodes": nodes, "edges": edges}
    # contracted twisted fibres leave their order behind in the integrality check
    if g.twist_lcm != replace(g, twist_lcm=1).twist_lcm:
        out["twist_lcm"] = g.twist_lcm
    return out


def dump_family(g: FamilyGraph) -> str:
    """Canonical text: equal graphs give identical bytes."""
    return json.dumps(graph_to_document(g), indent=2, sort_keys=True) + "\n"
