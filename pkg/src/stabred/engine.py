"""Stable reduction on the dual graph of the central fibre.

Nodes are :class:`SurfaceComponent` snapshots, edges are attaching fibres.
Every operation returns a new :class:`FamilyGraph`; the driver
:func:`stable_reduce` records each one as an :class:`MMPStep` so that
:func:`replay` can rebuild the result from the input.

An edge marked ``splice`` is the fibre along which a flipped leaf hangs off
its neighbour.  The neighbour's zero-section no longer meets that fibre, so
splices do not count as attachments (scions) of the neighbour.
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache, reduce
from math import lcm
from typing import Iterable, Mapping, Sequence

from .component import (
    KIND_LOG_STANDARD,
    ComponentKind,
    FibreRecord,
    JClass,
    PSEUDOELLIPTIC,
    PSEUDOELLIPTIC_E0,
    PSEUDOELLIPTIC_EIN,
    StabilityClass,
    SurfaceComponent,
    compute_q_squared,
    lc_degree,
    pseudoelliptic_ample,
    stability_class,
    stability_notes,
)
from .errors import (
    AmplenessFailure,
    BadStabilityClass,
    GraphError,
    NonLogCanonicalJunction,
    NonStandardFibre,
    NonTerminating,
    NotAChain,
    NotALeaf,
    NotContractible,
    NotFlippable,
    ReplayMismatch,
)
from .lattice import Cone, Fan
from .toric_threefold import (
    ChainFanData,
    OneFibreFanData,
    contraction_cone,
    fan_chain,
    fan_one_fibre,
    flip_singularity_data,
    log_flip_fan,
    section_contraction_cone,
    type2_attach_fan,
)
from .toric_surface import cone_quotient_type
from .weierstrass import (
    LocalFibreData,
    MAX_STANDARD_N,
    format_fibre,
    is_log_canonical,
    n_invariant,
    reduce_minimal,
)

MODES = ("pairs", "triples", "rational_base", "elliptic_base")
EDGE_KINDS = ("stable", "twisted")

UNTWIST = "untwist_to_cusp"
MINIMAL_REDUCE = "minimal_reduce"
SPECIAL_CONTRACT = "special_contract"
LOG_FLIP = "log_flip"
CHAIN_CONTRACT = "chain_contract"
SECTION_CONTRACT = "section_contract"
STEP_KINDS = (UNTWIST, MINIMAL_REDUCE, SPECIAL_CONTRACT, LOG_FLIP, CHAIN_CONTRACT, SECTION_CONTRACT)


def stability_mode(mode: str) -> str:
    """Stability predicate used for fibred components in a graph mode.

    Only triple stability keeps rational components with nonconstant j.  In
    the rational and elliptic base endgames every zero-section is contracted
    eventually, so they use the pairs predicate.
    """
    return "triples" if mode == "triples" else "pairs"


@dataclass(frozen=True)
class Edge:
    a: str
    b: str
    monodromy: int = 1
    kind: str = "stable"
    splice: bool = False

    def __post_init__(self) -> None:
        if self.a == self.b:
            raise GraphError(f"self-loop at {self.a}")
        if not isinstance(self.monodromy, int) or self.monodromy < 1:
            raise GraphError(f"edge {self.a}-{self.b}: monodromy must be a positive integer")
        if self.kind not in EDGE_KINDS:
            raise GraphError(f"edge {self.a}-{self.b}: kind must be stable or twisted")
        if (self.kind == "twisted") != (self.monodromy > 1):
            raise GraphError(f"edge {self.a}-{self.b}: twisted exactly when monodromy > 1")

    def other(self, node: str) -> str:
        if node == self.a:
            return self.b
        if node == self.b:
            return self.a
        raise KeyError(node)

    def touches(self, node: str) -> bool:
        return node in (self.a, self.b)

    def renamed(self, mapping: Mapping[str, str]) -> Edge:
        return replace(self, a=mapping.get(self.a, self.a), b=mapping.get(self.b, self.b))


@dataclass(frozen=True)
class FamilyGraph:
    nodes: Mapping[str, SurfaceComponent]
    edges: tuple[Edge, ...] = ()
    mode: str = "pairs"
    twist_lcm: int = 1

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise GraphError(f"unknown mode {self.mode!r}")
        nodes = dict(sorted(self.nodes.items()))
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "edges", tuple(self.edges))
        if not nodes:
            raise GraphError("a family graph needs at least one node")
        for key, c in nodes.items():
            if key != c.id:
                raise GraphError(f"node key {key!r} does not match id {c.id!r}")
        for e in self.edges:
            if e.a not in nodes or e.b not in nodes:
                raise GraphError(f"edge {e.a}-{e.b} references an unknown node")
        if not _connected(nodes, self.edges):
            raise GraphError("family graph is not connected")
        seen = [self.twist_lcm] + [e.monodromy for e in self.edges]
        seen += [f.monodromy for c in nodes.values() for f in c.fibres]
        object.__setattr__(self, "twist_lcm", reduce(lcm, seen, 1))

    # --- adjacency ---------------------------------------------------------

    def incident(self, node: str) -> list[Edge]:
        return [e for e in self.edges if e.touches(node)]

    def scion_indices(self, node: str) -> list[int]:
        return [i for i, e in enumerate(self.edges) if e.touches(node) and not e.splice]

    def scion_edges(self, node: str) -> list[Edge]:
        return [e for e in self.incident(node) if not e.splice]

    def splice_edges(self, node: str) -> list[Edge]:
        return [e for e in self.incident(node) if e.splice]

    def attachments(self, node: str) -> int:
        """r: attaching fibres that still meet the zero-section."""
        return len(self.scion_edges(node))

    def lc(self, node: str) -> int | None:
        c = self.nodes[node]
        return lc_degree(c, self.attachments(node)) if c.kind.is_fibred else None

    def fibred_ids(self) -> list[str]:
        return [i for i, c in self.nodes.items() if c.kind.is_fibred]

    def with_mode(self, mode: str) -> FamilyGraph:
        return replace(self, mode=mode)


def _connected(nodes: Mapping[str, object], edges: Sequence[Edge]) -> bool:
    if not nodes:
        return True
    adj: dict[str, set[str]] = {n: set() for n in nodes}
    for e in edges:
        adj[e.a].add(e.b)
        adj[e.b].add(e.a)
    start = next(iter(nodes))
    seen = {start}
    todo = [start]
    while todo:
        x = todo.pop()
        for y in adj[x]:
            if y not in seen:
                seen.add(y)
                todo.append(y)
    return len(seen) == len(nodes)


def base_genus(g: FamilyGraph) -> int:
    """Arithmetic genus of the central base curve."""
    return sum(c.genus for c in g.nodes.values()) + len(g.edges) - len(g.nodes) + 1


def check_mode_shape(g: FamilyGraph) -> None:
    """Input-level requirements of each mode."""
    if g.mode == "pairs" and base_genus(g) < 2:
        raise GraphError(f"pairs mode needs base genus >= 2, got {base_genus(g)}")
    if g.mode == "rational_base":
        if any(c.genus for c in g.nodes.values()):
            raise GraphError("rational_base mode needs all components over rational curves")
        if len(g.edges) != len(g.nodes) - 1:
            raise GraphError("rational_base mode needs a tree")
    if g.mode == "elliptic_base":
        genera = sorted(c.genus for c in g.nodes.values())
        if any(x > 1 for x in genera):
            raise GraphError("elliptic_base mode allows base genus at most 1 per component")
        ones = genera.count(1)
        cycles = len(g.edges) - len(g.nodes) + 1
        if ones + cycles != 1:
            raise GraphError("elliptic_base mode needs exactly one genus-1 node or exactly one cycle")


def total_q_squared(g: FamilyGraph) -> Fraction:
    """Sum of zero-section self-intersections over components still fibred."""
    return sum((c.q_squared for c in g.nodes.values() if c.kind.is_fibred), Fraction(0))


# --- steps and traces ------------------------------------------------------

@dataclass(frozen=True)
class Snapshot:
    node: str
    kind: str
    q_squared: Fraction | None
    lc: int | None


@dataclass(frozen=True)
class ToricPayload:
    """Toric data attached to a step: named fans and singularity labels."""

    label: str
    params: tuple[tuple[str, object], ...] = ()
    fans: tuple[tuple[str, Fan], ...] = ()
    singularities: tuple[tuple[str, str], ...] = ()


@dataclass(frozen=True)
class MMPStep:
    kind: str
    subject: tuple[str, ...]
    before: tuple[Snapshot, ...] = ()
    after: tuple[Snapshot, ...] = ()
    payload: ToricPayload | None = None
    notes: tuple[str, ...] = ()


@dataclass(frozen=True)
class MMPTrace:
    steps: tuple[MMPStep, ...]
    final: FamilyGraph

    def __len__(self) -> int:
        return len(self.steps)

    def then(self, other: MMPTrace) -> MMPTrace:
        return MMPTrace(self.steps + other.steps, other.final)


def _snap(g: FamilyGraph, ids: Iterable[str]) -> tuple[Snapshot, ...]:
    out = []
    for i in ids:
        if i in g.nodes:
            c = g.nodes[i]
            out.append(Snapshot(i, str(c.kind), c.q_squared, g.lc(i)))
    return tuple(out)


def _raw_q_squared(c: SurfaceComponent) -> Fraction:
    """Fibre formula without the minimality requirement (for snapshots)."""
    total = Fraction(-c.deg_j, 12)
    for f in c.fibres:
        if not f.data.is_j_infinity:
            total += Fraction(-n_invariant(f.data), 12 * f.monodromy)
    return total + sum((1 / e for e in c.exceptional), Fraction(0))


# --- prestable normalization -------------------------------------------------

def _set_fibre(g: FamilyGraph, node: str, index: int, record: FibreRecord) -> FamilyGraph:
    c = g.nodes[node]
    fibres = list(c.fibres)
    fibres[index] = record
    new = replace(c, fibres=tuple(fibres), q_squared=None)
    if all(is_log_canonical(f.data) for f in fibres):
        new = replace(new, q_squared=compute_q_squared(new))
    return replace(g, nodes={**g.nodes, node: new})


def reduce_fibre(g: FamilyGraph, node: str, index: int) -> FamilyGraph:
    """Replace one fibre by its minimal Weierstrass model."""
    rec = g.nodes[node].fibres[index]
    reduced, _ = reduce_minimal(rec.data)
    return _set_fibre(g, node, index, FibreRecord(reduced, rec.monodromy))


def untwist_fibre(g: FamilyGraph, node: str, index: int) -> FamilyGraph:
    """Drop the twisting marker of a fibre that sits at no twisted attachment."""
    rec = g.nodes[node].fibres[index]
    return _set_fibre(g, node, index, FibreRecord(rec.data, 1))


def _unmatched_twists(g: FamilyGraph, node: str) -> list[int]:
    """Indices of twisted fibres without a twisted incident edge of the same order."""
    available = Counter(e.monodromy for e in g.incident(node) if e.monodromy > 1)
    out = []
    for i, f in enumerate(g.nodes[node].fibres):
        if f.monodromy > 1:
            if available[f.monodromy]:
                available[f.monodromy] -= 1
            else:
                out.append(i)
    return out


def prestable_normalize(g: FamilyGraph) -> tuple[FamilyGraph, MMPTrace]:
    steps: list[MMPStep] = []
    for node in list(g.nodes):
        for i, f in enumerate(g.nodes[node].fibres):
            if f.data.is_j_infinity and f.data.jinf_k > 2:
                raise NonStandardFibre(
                    f"node {node} fibre {i} {format_fibre(f.data)}: j=inf order k={f.data.jinf_k} > 2"
                )
    for node in list(g.nodes):
        for i, f in enumerate(g.nodes[node].fibres):
            if not f.data.is_j_infinity and not is_log_canonical(f.data):
                before = (Snapshot(node, str(g.nodes[node].kind), _raw_q_squared(g.nodes[node]), g.lc(node)),)
                g = reduce_fibre(g, node, i)
                steps.append(MMPStep(MINIMAL_REDUCE, (node, str(i)), before, _snap(g, [node])))
        for i in _unmatched_twists(g, node):
            before = _snap(g, [node])
            g = untwist_fibre(g, node, i)
            steps.append(MMPStep(UNTWIST, (node, str(i)), before, _snap(g, [node])))
    for node, c in g.nodes.items():
        if c.kind.is_fibred and c.q_squared is None:
            raise NonStandardFibre(f"node {node}: fibres could not be normalized")
    return g, MMPTrace(tuple(steps), g)


def is_normalized(g: FamilyGraph) -> bool:
    return all(
        is_log_canonical(f.data) for c in g.nodes.values() for f in c.fibres
    ) and all(not _unmatched_twists(g, n) for n in g.fibred_ids())


# --- leaf operations -------------------------------------------------------------

def _leaf_index(g: FamilyGraph, leaf: str) -> int:
    """Index of the single attaching edge of a rational leaf."""
    if leaf not in g.nodes:
        raise NotALeaf(f"unknown node {leaf}")
    c = g.nodes[leaf]
    if not c.kind.is_fibred:
        raise NotALeaf(f"{leaf} is {c.kind}, not fibred")
    if c.genus != 0:
        raise NotALeaf(f"{leaf} lies over a curve of genus {c.genus}")
    scions = g.scion_indices(leaf)
    if len(scions) != 1:
        raise NotALeaf(f"{leaf} has {len(scions)} attaching fibres, not 1")
    other = g.edges[scions[0]].other(leaf)
    if not g.nodes[other].kind.is_fibred:
        raise NotALeaf(f"{leaf} is attached to the contracted component {other}")
    return scions[0]


def leaf_neighbour(g: FamilyGraph, leaf: str) -> str:
    return g.edges[_leaf_index(g, leaf)].other(leaf)


def junction_n(c: SurfaceComponent) -> int:
    """N of the fibre created by contracting c onto its neighbour."""
    return sum(n_invariant(f.data) for f in c.fibres if not f.data.is_j_infinity) + c.deg_j


def special_contract(g: FamilyGraph, leaf: str) -> FamilyGraph:
    """Contract a rational leaf with Q^2 >= -1 onto its neighbour.

    Its fibres merge into a single fibre of the neighbour with
    N = sum of N + deg j; the neighbour's Q^2 grows by the leaf's Q^2.
    """
    idx = _leaf_index(g, leaf)
    e = g.edges[idx]
    c = g.nodes[leaf]
    if g.splice_edges(leaf):
        raise NotALeaf(f"{leaf} still carries flipped components")
    n_new = junction_n(c)
    if n_new > MAX_STANDARD_N:
        raise NonLogCanonicalJunction(
            f"contracting {leaf} gives a junction fibre with N = {n_new} > {MAX_STANDARD_N}"
        )
    if c.q_squared < -1:
        raise NotContractible(f"{leaf} has Q^2 = {c.q_squared} < -1; flip it instead")
    nb_id = e.other(leaf)
    nb = g.nodes[nb_id]
    fibres = nb.fibres
    if e.monodromy > 1:
        # the neighbour's twisted fibre over this junction is replaced
        at = next((i for i, f in enumerate(fibres) if f.monodromy == e.monodromy), None)
        if at is not None:
            fibres = fibres[:at] + fibres[at + 1:]
    if n_new > 0:
        fibres = fibres + (FibreRecord(LocalFibreData.with_n(n_new), 1),)
    new_nb = replace(nb, fibres=fibres, q_squared=nb.q_squared + c.q_squared)
    nodes = {k: v for k, v in g.nodes.items() if k != leaf}
    nodes[nb_id] = new_nb
    edges = tuple(x for i, x in enumerate(g.edges) if i != idx)
    return replace(g, nodes=nodes, edges=edges)


@lru_cache(maxsize=4096)
def flip_payload(q_leaf: Fraction, junction_monodromy: int = 1) -> ToricPayload:
    d = OneFibreFanData.from_q_squared(q_leaf)
    fan = fan_one_fibre(d)
    flipped = log_flip_fan(fan)
    s = flip_singularity_data(d)
    return ToricPayload(
        label="log_flip",
        params=(("k", d.k), ("n", d.n), ("junction_monodromy", junction_monodromy),
                ("n_prime", s.nprime), ("a", s.a), ("m", s.m), ("k_prime", s.kprime)),
        fans=(("before", fan), ("after", flipped)),
        singularities=(("threefold", str(s.threefold)),
                       ("neighbour", str(s.on_X2plus)),
                       ("flipped", str(s.on_X1plus))),
    )


def log_flip_step(g: FamilyGraph, leaf: str) -> FamilyGraph:
    """Flip the zero-section of a rational leaf with Q^2 < -1.

    The leaf loses its section and becomes pseudoelliptic(1); the neighbour
    is blown up at the junction point, gaining E with E^2 = 1/Q^2(leaf).
    """
    try:
        idx = _leaf_index(g, leaf)
    except NotALeaf as err:
        raise NotFlippable(str(err)) from None
    c = g.nodes[leaf]
    if c.q_squared >= -1:
        raise NotFlippable(f"{leaf} has Q^2 = {c.q_squared} >= -1")
    cls = stability_class(c, 1, stability_mode(g.mode))
    if cls is not StabilityClass.extremal_ray_Q:
        raise NotFlippable(f"{leaf} is {cls} in {g.mode} mode")
    nb_id = g.edges[idx].other(leaf)
    nb = g.nodes[nb_id]
    new_leaf = replace(c, kind=ComponentKind.pseudoelliptic(1))
    new_nb = replace(
        nb,
        kind=KIND_LOG_STANDARD,
        exceptional=nb.exceptional + (1 / c.q_squared,),
        q_squared=nb.q_squared + c.q_squared,
    )
    edges = tuple(replace(x, splice=True) if i == idx else x for i, x in enumerate(g.edges))
    return replace(g, nodes={**g.nodes, leaf: new_leaf, nb_id: new_nb}, edges=edges)


# --- chains --------------------------------------------------------------------

def _chain_member(g: FamilyGraph, node: str) -> bool:
    c = g.nodes[node]
    if not c.kind.is_fibred or c.genus != 0 or g.attachments(node) != 2:
        return False
    if c.q_squared >= 0:
        return False
    return c.isotrivial or g.mode != "triples"


def _validate_chain(g: FamilyGraph, chain: Sequence[str]) -> tuple[list[int], list[int]]:
    """Return (end edge indices, internal edge indices) of a chain or raise."""
    if not chain or len(set(chain)) != len(chain):
        raise NotAChain("chain must be a non-empty list of distinct nodes")
    for node in chain:
        if node not in g.nodes:
            raise NotAChain(f"unknown node {node}")
        c = g.nodes[node]
        if not c.kind.is_fibred or c.genus != 0:
            raise NotAChain(f"{node} is not a fibred component over a rational curve")
        if g.attachments(node) != 2:
            raise BadStabilityClass(f"{node} has lc degree {g.lc(node)}, not 0")
        if c.q_squared >= 0:
            raise BadStabilityClass(f"{node} has Q^2 = {c.q_squared}; nothing to contract")
        if g.mode == "triples" and not c.isotrivial:
            raise BadStabilityClass(f"{node} has nonconstant j; triples keep it")
    internal: list[int] = []
    for x, y in zip(chain, chain[1:]):
        link = [i for i in g.scion_indices(x) if g.edges[i].other(x) == y and i not in internal]
        if not link:
            raise NotAChain(f"{x} and {y} are not adjacent")
        internal.append(link[0])
    members = set(chain)
    ends = []
    for node in (chain[0], chain[-1]) if len(chain) > 1 else (chain[0],):
        ends += [i for i in g.scion_indices(node) if i not in internal]
    for i in ends:
        e = g.edges[i]
        if e.a in members and e.b in members:
            raise NotAChain("chain ends must attach to components outside the chain")
    if len(ends) != 2:
        raise NotAChain("a chain has exactly two end attachments")
    return ends, internal


def chain_payload(g: FamilyGraph, chain: Sequence[str], ends: Sequence[int], internal: Sequence[int]) -> ToricPayload:
    k_list = tuple(g.edges[i].monodromy for i in (ends[0], *internal, ends[1]))
    return _chain_payload(k_list, tuple(g.nodes[x].q_squared for x in chain))


@lru_cache(maxsize=4096)
def _chain_payload(k_list: tuple[int, ...], qs: tuple[Fraction, ...]) -> ToricPayload:
    k_list = list(k_list)
    n = reduce(lcm, k_list + [q.denominator for q in qs], 1)
    n_list = [int(-q * n) for q in qs]
    data = ChainFanData(tuple(k_list), tuple(n_list), n=n, a=1, h1=k_list[0])
    cone = contraction_cone(data)
    fan = fan_chain(data)
    ends_fans = [type2_attach_fan(n, 1, k) for k in (k_list[0], k_list[-1])]
    sing = []
    for label, f in zip(("end0", "end1"), ends_fans):
        c = f.cones[0]
        sing.append((label, str(cone_quotient_type(c.rays[0], c.rays[1], c.lattice))))
    return ToricPayload(
        label="chain_contract",
        params=(("k_list", tuple(k_list)), ("n_list", tuple(n_list)), ("n", n), ("a", 1),
                ("h1", k_list[0]), ("rays", len(cone.rays))),
        fans=(("chain", fan), ("contracted", Fan((cone,))),
              ("end0", ends_fans[0]), ("end1", ends_fans[1])),
        singularities=tuple(sing),
    )


def chain_id(chain: Sequence[str]) -> str:
    return "+".join(chain)


def _merged_j(cs: Sequence[SurfaceComponent]) -> JClass:
    deg = sum(c.deg_j for c in cs)
    if deg:
        return JClass.nonconstant(deg)
    kinds = {c.j_class.kind for c in cs}
    return JClass("constant_infinity") if kinds == {"constant_infinity"} else JClass()


def chain_contract(g: FamilyGraph, chain: Sequence[str]) -> FamilyGraph:
    """Replace a chain of lc-degree-0 rational components by one
    pseudoelliptic(2) component whose zero-section has been contracted."""
    chain = list(chain)
    ends, internal = _validate_chain(g, chain)
    cs = [g.nodes[x] for x in chain]
    new_id = chain_id(chain)
    if new_id in g.nodes and new_id not in chain:
        raise NotAChain(f"merged id {new_id} already exists")
    merged = SurfaceComponent(
        id=new_id,
        genus=0,
        j_class=_merged_j(cs),
        fibres=tuple(f for c in cs for f in c.fibres),
        kind=ComponentKind.pseudoelliptic(2),
        q_squared=sum((c.q_squared for c in cs), Fraction(0)),
    )
    if not pseudoelliptic_ample(merged):
        raise AmplenessFailure(f"{new_id} is not ample after contraction")
    mapping = {x: new_id for x in chain}
    edges = tuple(e.renamed(mapping) for i, e in enumerate(g.edges) if i not in internal)
    nodes = {k: v for k, v in g.nodes.items() if k not in mapping}
    nodes[new_id] = merged
    return replace(g, nodes=nodes, edges=edges)


def _walk(g: FamilyGraph, start: str, edge: int) -> list[str] | None:
    """Chain members reached from ``start`` through ``edge``; None on a cycle."""
    out: list[str] = []
    cur, idx = start, edge
    while True:
        y = g.edges[idx].other(cur)
        if y == start or y in out:
            return None
        if not _chain_member(g, y):
            return out
        out.append(y)
        idx = next(i for i in g.scion_indices(y) if i != idx)
        cur = y


def find_chains(g: FamilyGraph) -> list[list[str]]:
    """Maximal chains of contractible lc-degree-0 components, oriented so
    the first id is smaller than the last, in ascending order."""
    seen: set[str] = set()
    chains = []
    for start in g.nodes:
        if start in seen or not _chain_member(g, start):
            continue
        first, second = g.scion_indices(start)
        left = _walk(g, start, first)
        right = _walk(g, start, second) if left is not None else None
        if left is None or right is None:
            seen.add(start)
            continue
        chain = left[::-1] + [start] + right
        seen.update(chain)
        if chain[0] > chain[-1]:
            chain.reverse()
        chains.append(chain)
    return sorted(chains)


def find_closed_loops(g: FamilyGraph) -> list[list[str]]:
    """Cycles made only of chain members (sorted ids), which have no ends."""
    members = [x for x in g.nodes if _chain_member(g, x)]
    seen: set[str] = set()
    loops = []
    for start in members:
        if start in seen:
            continue
        comp, todo, closed = {start}, [start], True
        while todo:
            x = todo.pop()
            for i in g.scion_indices(x):
                y = g.edges[i].other(x)
                if not _chain_member(g, y):
                    closed = False
                elif y not in comp:
                    comp.add(y)
                    todo.append(y)
        seen |= comp
        if closed and len(comp) >= 2:
            loops.append(sorted(comp))
    return sorted(loops)


def find_bare_elliptic(g: FamilyGraph) -> list[str]:
    """Fibred genus-1 components left with no attaching fibres and Q^2 < 0."""
    return [
        x for x, c in g.nodes.items()
        if c.kind.is_fibred and c.genus == 1 and g.attachments(x) == 0 and c.q_squared < 0
    ]


# --- endgames ------------------------------------------------------------------

def section_contract(g: FamilyGraph, ids: Sequence[str]) -> FamilyGraph:
    """Contract the zero-section of the surviving core.

    One rational component becomes pseudoelliptic(n) with n its attaching
    fibres; a pair of adjacent rational components becomes two
    pseudoelliptic(1); one genus-1 component becomes pseudoelliptic_E0; a
    cycle of rational components becomes one pseudoelliptic_EIN(N).
    """
    ids = list(ids)
    if not ids or len(set(ids)) != len(ids):
        raise NotContractible("need distinct components")
    for x in ids:
        if x not in g.nodes or not g.nodes[x].kind.is_fibred:
            raise NotContractible(f"{x} has no zero-section to contract")
    cs = [g.nodes[x] for x in ids]
    members = set(ids)
    inner_idx = [i for i, e in enumerate(g.edges) if e.a in members and e.b in members and not e.splice]
    inner = [g.edges[i] for i in inner_idx]
    outside = [e for x in ids for e in g.scion_edges(x) if e.other(x) not in members]
    if outside:
        raise NotContractible(f"{outside[0].a}-{outside[0].b} still attaches the core to fibred components")
    if len(ids) == 1 and cs[0].genus == 1:
        c = cs[0]
        new = replace(c, kind=ComponentKind(PSEUDOELLIPTIC_E0))
        if c.q_squared >= 0:
            raise AmplenessFailure(f"{c.id}: zero-section with Q^2 = {c.q_squared} cannot be contracted")
        return replace(g, nodes={**g.nodes, c.id: new})
    if any(c.genus for c in cs):
        raise NotContractible("section contraction needs rational components or one genus-1 component")
    if len(ids) >= 2 and len(inner) == len(ids) and all(
        sum(e.touches(x) for e in inner) == 2 for x in ids
    ) and not (len(ids) == 2 and len(inner) == 1):
        new_id = chain_id(ids)
        q = sum((c.q_squared for c in cs), Fraction(0))
        if q >= 0:
            raise AmplenessFailure(f"{new_id}: zero-section with Q^2 = {q} cannot be contracted")
        merged = SurfaceComponent(
            id=new_id,
            genus=0,
            j_class=_merged_j(cs),
            fibres=tuple(f for c in cs for f in c.fibres),
            kind=ComponentKind(PSEUDOELLIPTIC_EIN, len(ids)),
            q_squared=q,
        )
        mapping = {x: new_id for x in ids}
        edges = tuple(e.renamed(mapping) for i, e in enumerate(g.edges) if i not in inner_idx)
        nodes = {k: v for k, v in g.nodes.items() if k not in mapping}
        nodes[new_id] = merged
        return replace(g, nodes=nodes, edges=edges)
    if len(ids) > 2 or (len(ids) == 2 and len(inner) != 1):
        raise NotContractible("expected one component or an adjacent pair")
    nodes = dict(g.nodes)
    for c in cs:
        n = g.attachments(c.id)
        if n > 2:
            raise NotContractible(f"{c.id} has {n} attaching fibres")
        new = replace(c, kind=ComponentKind.pseudoelliptic(n))
        if not pseudoelliptic_ample(new):
            bound = {0: -4, 1: -1}[n]
            raise AmplenessFailure(
                f"{c.id}: contracting the zero-section with {n} marked fibres needs "
                f"Q^2 < {bound}, got {c.q_squared}"
            )
        nodes[c.id] = new
    return replace(g, nodes=nodes)


@lru_cache(maxsize=4096)
def _section_fan(q: Fraction) -> Fan:
    return section_contraction_cone(q)


def section_payload(g: FamilyGraph, ids: Sequence[str]) -> ToricPayload | None:
    fans = []
    sing = []
    for x in ids:
        q = g.nodes[x].q_squared
        if q < 0 and g.nodes[x].genus == 0:
            fan = _section_fan(q)
            c = fan.cones[0]
            fans.append((x, fan))
            sing.append((x, str(cone_quotient_type(c.rays[0], c.rays[1], c.lattice))))
    if not fans:
        return None
    return ToricPayload(label="section_contract", fans=tuple(fans), singularities=tuple(sing))


def tree_center(g: FamilyGraph) -> tuple[list[str], list[str]]:
    """Center (one or two nodes) of the tree of fibred components and the
    remaining fibred nodes ordered outermost first, ascending id per layer."""
    ids = g.fibred_ids()
    adj: dict[str, list[str]] = {x: [] for x in ids}
    for e in g.edges:
        if not e.splice and e.a in adj and e.b in adj:
            adj[e.a].append(e.b)
            adj[e.b].append(e.a)
    degree = {x: len(adj[x]) for x in ids}
    remaining = set(ids)
    layers: list[list[str]] = []
    while len(remaining) > 2:
        layer = sorted(x for x in remaining if degree[x] <= 1)
        if not layer:
            raise GraphError("fibred components do not form a tree")
        layers.append(layer)
        for x in layer:
            remaining.discard(x)
            for y in adj[x]:
                degree[y] -= 1
    order = [x for layer in layers for x in layer]
    return sorted(remaining), order


def elliptic_core(g: FamilyGraph) -> list[str]:
    """The genus-1 component, or the cycle of rational components."""
    ids = g.fibred_ids()
    ones = [x for x in ids if g.nodes[x].genus == 1]
    if ones:
        return ones
    adj: dict[str, list[str]] = {x: [] for x in ids}
    for e in g.edges:
        if not e.splice and e.a in adj and e.b in adj:
            adj[e.a].append(e.b)
            adj[e.b].append(e.a)
    degree = {x: len(adj[x]) for x in ids}
    remaining = set(ids)
    changed = True
    while changed:
        changed = False
        for x in sorted(remaining):
            if degree[x] <= 1:
                remaining.discard(x)
                for y in adj[x]:
                    degree[y] -= 1
                changed = True
    return sorted(remaining)


# --- driver ----------------------------------------------------------------------

def _eligible_leaf(g: FamilyGraph, node: str, protected: set[str]) -> bool:
    if node in protected:
        return False
    try:
        _leaf_index(g, node)
    except NotALeaf:
        return False
    c = g.nodes[node]
    return not (g.mode == "triples" and not c.isotrivial)


def _next_leaf_step(g: FamilyGraph, protected: set[str]) -> tuple[str, str] | None:
    leaves = [x for x in g.nodes if _eligible_leaf(g, x, protected)]
    for x in leaves:
        if g.nodes[x].q_squared >= -1 and not g.splice_edges(x):
            return SPECIAL_CONTRACT, x
    for x in leaves:
        if g.nodes[x].q_squared < -1:
            return LOG_FLIP, x
    return None


def apply_step(g: FamilyGraph, kind: str, subject: Sequence[str]) -> FamilyGraph:
    if kind == MINIMAL_REDUCE:
        return reduce_fibre(g, subject[0], int(subject[1]))
    if kind == UNTWIST:
        return untwist_fibre(g, subject[0], int(subject[1]))
    if kind == SPECIAL_CONTRACT:
        return special_contract(g, subject[0])
    if kind == LOG_FLIP:
        return log_flip_step(g, subject[0])
    if kind == CHAIN_CONTRACT:
        return chain_contract(g, list(subject))
    if kind == SECTION_CONTRACT:
        return section_contract(g, list(subject))
    raise ValueError(f"unknown step kind {kind!r}")


@dataclass
class _Recorder:
    g: FamilyGraph
    budget: int
    steps: list[MMPStep] = field(default_factory=list)

    def run(self, kind: str, subject: Sequence[str]) -> None:
        if len(self.steps) >= self.budget:
            raise NonTerminating(f"step budget {self.budget} exhausted")
        g = self.g
        touched = self._touched(kind, subject)
        before = _snap(g, touched)
        payload = None
        notes: list[str] = []
        if kind == LOG_FLIP:
            payload = flip_payload(g.nodes[subject[0]].q_squared, g.edges[_leaf_index(g, subject[0])].monodromy)
        elif kind == CHAIN_CONTRACT:
            ends, internal = _validate_chain(g, subject)
            payload = chain_payload(g, subject, ends, internal)
        elif kind == SECTION_CONTRACT:
            payload = section_payload(g, subject)
        if kind in (SPECIAL_CONTRACT, LOG_FLIP) and g.nodes[subject[0]].twisted_fibres():
            notes.append("twisted-extrapolation")
        new = apply_step(g, kind, subject)
        after_ids = [x for x in touched if x in new.nodes]
        if kind in (CHAIN_CONTRACT, SECTION_CONTRACT) and chain_id(subject) in new.nodes:
            after_ids.append(chain_id(subject))
        self.steps.append(MMPStep(kind, tuple(subject), before, _snap(new, dict.fromkeys(after_ids)),
                                  payload, tuple(notes)))
        self.g = new

    def _touched(self, kind: str, subject: Sequence[str]) -> list[str]:
        g = self.g
        if kind in (SPECIAL_CONTRACT, LOG_FLIP):
            return [subject[0], leaf_neighbour(g, subject[0])]
        return list(subject)


def stable_reduce(g: FamilyGraph) -> tuple[FamilyGraph, MMPTrace]:
    if not is_normalized(g):
        raise NonStandardFibre("run prestable_normalize first")
    rec = _Recorder(g, 4 * len(g.nodes))
    if g.mode in ("pairs", "triples"):
        while True:
            step = _next_leaf_step(rec.g, set())
            if step:
                rec.run(*step[:1], [step[1]])
                continue
            chains = find_chains(rec.g)
            if chains:
                rec.run(CHAIN_CONTRACT, chains[0])
                continue
            # components of lc degree 0 that are not chains
            loops = find_closed_loops(rec.g)
            if loops:
                rec.run(SECTION_CONTRACT, loops[0])
                continue
            bare = find_bare_elliptic(rec.g)
            if bare:
                rec.run(SECTION_CONTRACT, bare[:1])
                continue
            break
    elif g.mode == "rational_base":
        _rational_endgame(rec)
    else:
        _elliptic_endgame(rec)
    final = rec.g
    report = verify_stable(final)
    if not report.all_pass:
        bad = [v for v in report.verdicts if not v.ok]
        raise AmplenessFailure(
            "family not reducible by this pipeline: "
            + "; ".join(f"{v.node}: {', '.join(v.reasons)}" for v in bad)
        )
    return final, MMPTrace(tuple(rec.steps), final)


def _contract_small_leaves(rec: _Recorder, protected: set[str]) -> None:
    while True:
        step = _next_leaf_step(rec.g, protected)
        if not step or step[0] != SPECIAL_CONTRACT:
            return
        rec.run(SPECIAL_CONTRACT, [step[1]])


def _rational_endgame(rec: _Recorder) -> None:
    _contract_small_leaves(rec, set())
    if not rec.g.fibred_ids():
        return
    center, order = tree_center(rec.g)
    for x in order:
        rec.run(LOG_FLIP, [x])
    rec.run(SECTION_CONTRACT, center)


def _elliptic_endgame(rec: _Recorder) -> None:
    if not rec.g.fibred_ids():
        return
    core = set(elliptic_core(rec.g))
    while True:
        step = _next_leaf_step(rec.g, core)
        if not step:
            break
        rec.run(step[0], [step[1]])
    rec.run(SECTION_CONTRACT, sorted(core))


def reduce_family(g: FamilyGraph) -> tuple[FamilyGraph, MMPTrace]:
    """Prestable normalization followed by stable reduction."""
    check_mode_shape(g)
    normal, t1 = prestable_normalize(g)
    final, t2 = stable_reduce(normal)
    return final, t1.then(t2)


def replay(g: FamilyGraph, steps: Iterable[MMPStep]) -> FamilyGraph:
    for s in steps:
        before = _snap(g, [x.node for x in s.before])
        if before != s.before and s.kind not in (MINIMAL_REDUCE,):
            raise ReplayMismatch(f"state before {s.kind} {s.subject} differs from the trace")
        g = apply_step(g, s.kind, s.subject)
    return g


# --- verification ----------------------------------------------------------------

@dataclass(frozen=True)
class NodeVerdict:
    node: str
    kind: str
    ok: bool
    stability: str | None
    reasons: tuple[str, ...] = ()
    notes: tuple[str, ...] = ()


@dataclass(frozen=True)
class StabilityReport:
    verdicts: tuple[NodeVerdict, ...]

    @property
    def all_pass(self) -> bool:
        return all(v.ok for v in self.verdicts)

    def verdict(self, node: str) -> NodeVerdict:
        return next(v for v in self.verdicts if v.node == node)


def verify_stable(g: FamilyGraph) -> StabilityReport:
    verdicts = []
    smode = stability_mode(g.mode)
    for node, c in g.nodes.items():
        reasons: list[str] = []
        notes: list[str] = []
        cls_name = None
        for i, f in enumerate(c.fibres):
            if not is_log_canonical(f.data):
                reasons.append(f"fibre {i} {format_fibre(f.data)} is not standard")
        if c.q_squared is None:
            reasons.append("Q^2 unknown")
        elif (12 * c.q_squared * g.twist_lcm).denominator != 1:
            reasons.append(f"12 Q^2 lcm = {12 * c.q_squared * g.twist_lcm} is not an integer")
        if c.kind.is_fibred and c.q_squared is not None:
            r = g.attachments(node)
            cls = stability_class(c, r, smode)
            cls_name = str(cls)
            notes.extend(stability_notes(c, r, smode))
            if cls is not StabilityClass.ample:
                reasons.append(f"{cls} (g={c.genus}, r={r})")
            for e in c.exceptional:
                if not -1 < e < 0:
                    reasons.append(f"exceptional curve with E^2 = {e} outside (-1, 0)")
            if len(c.exceptional) != len(g.splice_edges(node)):
                reasons.append("exceptional curves do not match splices")
        elif c.kind.tag == PSEUDOELLIPTIC:
            if not pseudoelliptic_ample(c):
                reasons.append(f"{c.kind} with source Q^2 = {c.q_squared} is not ample")
        elif c.kind.tag in (PSEUDOELLIPTIC_E0, PSEUDOELLIPTIC_EIN):
            if c.q_squared >= 0:
                reasons.append(f"{c.kind} with source Q^2 = {c.q_squared} >= 0")
        verdicts.append(NodeVerdict(node, str(c.kind), not reasons, cls_name, tuple(reasons), tuple(notes)))
    return StabilityReport(tuple(verdicts))
