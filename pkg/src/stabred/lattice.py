"""Exact lattices, rational polyhedral cones and fans in ranks 1 to 3.

Vectors are tuples of :class:`fractions.Fraction` in the standard coordinates
of the ambient rational space.  A :class:`Lattice` is given by a rational
basis; membership is decided by solving the coordinate system exactly and
checking integrality.

Rank 1 lattices only show up as quotients of rank 2 lattices (the star of a
ray in a surface fan).  Anything above rank 3 is rejected.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, reduce
from itertools import combinations
from math import gcd, lcm
from typing import Iterable, Mapping, Sequence

from .errors import (
    LatticeRankError,
    NotFullDimensional,
    NotStrictlyConvex,
    NotSublattice,
    RayNotInCone,
)

Vector = tuple[Fraction, ...]

MAX_RANK = 3


def vec(*coords: int | Fraction | str) -> Vector:
    """Build an exact vector; strings like ``"1/3"`` are accepted."""
    return tuple(Fraction(c) for c in coords)


def unit(i: int, rank: int) -> Vector:
    return tuple(Fraction(int(j == i)) for j in range(rank))


def add(u: Vector, v: Vector) -> Vector:
    return tuple(a + b for a, b in zip(u, v))


def sub(u: Vector, v: Vector) -> Vector:
    return tuple(a - b for a, b in zip(u, v))


def scale(t: int | Fraction, v: Vector) -> Vector:
    return tuple(t * a for a in v)


def dot(u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    return sum((a * b for a, b in zip(u, v)), Fraction(0))


def combine(coeffs: Sequence[int | Fraction], vectors: Sequence[Vector]) -> Vector:
    """Linear combination sum(c_i * v_i)."""
    out = [Fraction(0)] * len(vectors[0])
    for c, v in zip(coeffs, vectors):
        for i, a in enumerate(v):
            out[i] += c * a
    return tuple(out)


def is_zero(v: Sequence[Fraction]) -> bool:
    return all(a == 0 for a in v)


# --- exact linear algebra over Q -------------------------------------------

def det(rows: Sequence[Sequence[Fraction]]) -> Fraction:
    """Determinant by fraction-exact Gaussian elimination."""
    m = [list(map(Fraction, r)) for r in rows]
    n = len(m)
    if any(len(r) != n for r in m):
        raise ValueError("determinant of a non-square matrix")
    sign = 1
    result = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            sign = -sign
        p = m[col][col]
        result *= p
        for r in range(col + 1, n):
            f = m[r][col] / p
            if f:
                for c in range(col, n):
                    m[r][c] -= f * m[col][c]
    return sign * result


def row_echelon(rows: Sequence[Sequence[Fraction]]) -> list[list[Fraction]]:
    """Reduced row echelon form, zero rows dropped."""
    m = [list(map(Fraction, r)) for r in rows]
    if not m:
        return []
    ncols = len(m[0])
    out: list[list[Fraction]] = []
    r = 0
    for col in range(ncols):
        pivot = next((i for i in range(r, len(m)) if m[i][col] != 0), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        p = m[r][col]
        m[r] = [a / p for a in m[r]]
        for i in range(len(m)):
            if i != r and m[i][col] != 0:
                f = m[i][col]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        r += 1
        if r == len(m):
            break
    out = [row for row in m[:r]]
    return out


def rank_of(rows: Sequence[Sequence[Fraction]]) -> int:
    return len(row_echelon(rows)) if rows else 0


def nullspace(rows: Sequence[Sequence[Fraction]], ncols: int) -> list[Vector]:
    """Basis of {x : row . x = 0 for every row}."""
    rref = row_echelon(rows) if rows else []
    pivots = []
    for row in rref:
        pivots.append(next(i for i, a in enumerate(row) if a != 0))
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        x = [Fraction(0)] * ncols
        x[f] = Fraction(1)
        for row, p in zip(rref, pivots):
            x[p] = -row[f]
        basis.append(tuple(x))
    return basis


def solve_coordinates(basis: Sequence[Vector], v: Sequence[Fraction]) -> Vector | None:
    """Coefficients c with sum(c_i basis_i) = v, or None if v is not in the span.

    ``basis`` must be linearly independent.
    """
    m = len(basis)
    # augmented system: columns are basis vectors
    rows = [[basis[j][i] for j in range(m)] + [Fraction(v[i])] for i in range(len(v))]
    rref = row_echelon(rows)
    coeffs = [Fraction(0)] * m
    for row in rref:
        lead = next(i for i, a in enumerate(row) if a != 0)
        if lead == m:
            return None
        coeffs[lead] = row[m]
    return tuple(coeffs)


# --- integer helpers -----------------------------------------------------------

def _common_denominator(rows: Iterable[Iterable[Fraction]]) -> int:
    return reduce(lcm, (a.denominator for r in rows for a in r), 1)


def hermite_rows(rows: Sequence[Sequence[int]]) -> list[list[int]]:
    """Row-style Hermite normal form of an integer matrix, zero rows dropped.

    The result is a basis of the row lattice with positive pivots and
    entries above each pivot reduced into [0, pivot).
    """
    m = [list(r) for r in rows if any(r)]
    if not m:
        return []
    ncols = len(m[0])
    top = 0
    for col in range(ncols):
        if top == len(m):
            break
        while True:
            nz = [i for i in range(top, len(m)) if m[i][col] != 0]
            if not nz:
                break
            piv = min(nz, key=lambda i: abs(m[i][col]))
            m[top], m[piv] = m[piv], m[top]
            done = True
            for i in range(top + 1, len(m)):
                q = m[i][col] // m[top][col]
                if q:
                    m[i] = [a - q * b for a, b in zip(m[i], m[top])]
                if m[i][col] != 0:
                    done = False
            if done:
                break
        if m[top][col] == 0:
            continue
        if m[top][col] < 0:
            m[top] = [-a for a in m[top]]
        for i in range(top):
            q = m[i][col] // m[top][col]
            if q:
                m[i] = [a - q * b for a, b in zip(m[i], m[top])]
        top += 1
    return [r for r in m[:top] if any(r)]


# --- lattices --------------------------------------------------------------------

def _check_rank(rank: int) -> None:
    if not 1 <= rank <= MAX_RANK:
        raise LatticeRankError(f"lattice rank must be between 1 and {MAX_RANK}, got {rank}")


@dataclass(frozen=True, eq=False)
class Lattice:
    """Full-rank lattice in Q^rank with an explicit basis."""

    basis: tuple[Vector, ...]

    def __post_init__(self) -> None:
        basis = tuple(tuple(Fraction(a) for a in b) for b in self.basis)
        object.__setattr__(self, "basis", basis)
        _check_rank(len(basis))
        if any(len(b) != len(basis) for b in basis):
            raise LatticeRankError("basis vectors must have length equal to the rank")
        if det(basis) == 0:
            raise LatticeRankError("lattice basis is linearly dependent")

    @classmethod
    def standard(cls, rank: int) -> Lattice:
        return cls(tuple(unit(i, rank) for i in range(rank)))

    @classmethod
    def from_generators(cls, generators: Iterable[Sequence[Fraction]]) -> Lattice:
        """Reduce a (possibly redundant) generating set to a basis."""
        gens = [tuple(Fraction(a) for a in g) for g in generators]
        if not gens:
            raise LatticeRankError("no generators")
        d = _common_denominator(gens)
        ints = [[int(a * d) for a in g] for g in gens]
        rows = hermite_rows(ints)
        if len(rows) != len(gens[0]):
            raise LatticeRankError("generators do not span the ambient space")
        return cls(tuple(tuple(Fraction(a, d) for a in r) for r in rows))

    @property
    def rank(self) -> int:
        return len(self.basis)

    @cached_property
    def _inverse_columns(self) -> tuple[Vector, ...]:
        # column i holds the coordinates of the i-th unit vector
        return tuple(solve_coordinates(self.basis, unit(i, self.rank)) for i in range(self.rank))

    def coordinates(self, v: Sequence[Fraction]) -> Vector:
        if len(v) != self.rank:
            raise LatticeRankError("vector length does not match lattice rank")
        out = [Fraction(0)] * self.rank
        for a, col in zip(v, self._inverse_columns):
            if a:
                for j, x in enumerate(col):
                    out[j] += a * x
        return tuple(out)

    def integer_coordinates(self, v: Sequence[Fraction]) -> tuple[int, ...]:
        c = self.coordinates(v)
        if any(a.denominator != 1 for a in c):
            raise NotSublattice(f"{render_vector(v)} is not in the lattice")
        return tuple(int(a) for a in c)

    def contains(self, v: Sequence[Fraction]) -> bool:
        return all(a.denominator == 1 for a in self.coordinates(v))

    def primitive(self, v: Sequence[Fraction]) -> Vector:
        """Generator of the ray through ``v`` that is primitive in the lattice."""
        v = tuple(Fraction(a) for a in v)
        if is_zero(v):
            raise ValueError("zero vector has no ray")
        c = self.coordinates(v)
        d = reduce(lcm, (a.denominator for a in c), 1)
        ints = [int(a * d) for a in c]
        g = reduce(gcd, ints, 0)
        return combine([Fraction(a, g) for a in ints], self.basis)

    def covolume(self) -> Fraction:
        return abs(det(self.basis))

    def canonical_basis(self) -> tuple[Vector, ...]:
        return self._canonical

    @cached_property
    def _canonical(self) -> tuple[Vector, ...]:
        d = _common_denominator(self.basis)
        rows = hermite_rows([[int(a * d) for a in b] for b in self.basis])
        return tuple(tuple(Fraction(a, d) for a in r) for r in rows)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Lattice):
            return NotImplemented
        return self.canonical_basis() == other.canonical_basis()

    def __hash__(self) -> int:
        return hash(self.canonical_basis())

    def __repr__(self) -> str:
        return f"Lattice({', '.join(render_vector(b) for b in self.basis)})"


def lattice_index(sub_lattice: Lattice, super_lattice: Lattice) -> int:
    """Group index [super : sub] for sub contained in super, same rank."""
    if sub_lattice.rank != super_lattice.rank:
        raise NotSublattice("lattices have different ranks")
    rows = [super_lattice.integer_coordinates(b) for b in sub_lattice.basis]
    return abs(int(det(rows)))


# --- cones -----------------------------------------------------------------------

def _span_complement(rays: Sequence[Vector], dim: int) -> list[Vector]:
    return nullspace(rays, dim) if rays else [unit(i, dim) for i in range(dim)]


def _facet_normals(rays: Sequence[Vector], dim: int) -> tuple[list[Vector], list[Vector]]:
    """Equations and inward facet normals of the cone spanned by ``rays``.

    Each normal lies in the linear span of the rays.  Works for cones of any
    dimension up to ``dim`` by testing every (d-1)-subset of rays.
    """
    complement = _span_complement(rays, dim)
    d = dim - len(complement)
    facets: list[Vector] = []
    for subset in combinations(rays, d - 1):
        if rank_of(list(subset)) != d - 1:
            continue
        null = nullspace(list(subset) + complement, dim)
        if len(null) != 1:
            continue
        # project the normal into the span so it is canonical up to scale
        n = null[0]
        values = [dot(n, r) for r in rays]
        if all(x >= 0 for x in values):
            pass
        elif all(x <= 0 for x in values):
            n = scale(-1, n)
        else:
            continue
        n = _normalize_direction(n)
        if n not in facets:
            facets.append(n)
    return complement, facets


def _normalize_direction(v: Vector) -> Vector:
    d = reduce(lcm, (a.denominator for a in v), 1)
    ints = [int(a * d) for a in v]
    g = reduce(gcd, ints, 0)
    return tuple(Fraction(a, g) for a in ints)


def _in_cone(x: Vector, equations: Sequence[Vector], facets: Sequence[Vector]) -> bool:
    return all(dot(e, x) == 0 for e in equations) and all(dot(f, x) >= 0 for f in facets)


@dataclass(frozen=True, eq=False)
class Cone:
    """Strictly convex rational polyhedral cone.

    Generators are replaced by their primitive lattice vectors; duplicates
    and non-extremal generators are dropped.  The order of the surviving
    rays is the order in which they were given, which fixes the sign of
    :func:`cone_determinant`.
    """

    rays: tuple[Vector, ...]
    lattice: Lattice

    def __post_init__(self) -> None:
        lat = self.lattice
        prim: list[Vector] = []
        for g in self.rays:
            if len(g) != lat.rank:
                raise LatticeRankError("ray length does not match lattice rank")
            p = lat.primitive(g)
            if p not in prim:
                prim.append(p)
        if not prim:
            raise NotStrictlyConvex("a cone needs at least one ray")
        if rank_of(prim) == len(prim):
            # independent rays: every ray is extremal and the cone is pointed
            object.__setattr__(self, "rays", tuple(prim))
            return
        # dropping a generator that lies in the cone of the others keeps the cone
        extremal = list(prim)
        for r in prim:
            rest = [x for x in extremal if x != r]
            if rest and _cone_has(rest, r, lat.rank):
                extremal = rest
        _, facets = _facet_normals(extremal, lat.rank)
        if len(extremal) > 1:
            w = reduce(add, facets) if facets else None
            if w is None or any(dot(w, r) <= 0 for r in extremal):
                raise NotStrictlyConvex("cone contains a line")
        object.__setattr__(self, "rays", tuple(extremal))

    @property
    def dim(self) -> int:
        return rank_of(self.rays)

    def is_simplicial(self) -> bool:
        return self.dim == len(self.rays)

    def contains(self, v: Sequence[Fraction]) -> bool:
        return _cone_has(self.rays, tuple(Fraction(a) for a in v), self.lattice.rank)

    def contains_cone(self, other: Cone) -> bool:
        return all(self.contains(r) for r in other.rays)

    def facets(self) -> list[Vector]:
        return _facet_normals(self.rays, self.lattice.rank)[1]

    def faces(self) -> list[frozenset[Vector]]:
        """Ray sets of all nonzero faces (materialized on demand)."""
        eqs, normals = _facet_normals(self.rays, self.lattice.rank)
        faces = {frozenset(self.rays)}
        frontier = [frozenset(self.rays)]
        while frontier:
            nxt = []
            for face in frontier:
                for n in normals:
                    sub_face = frozenset(r for r in face if dot(n, r) == 0)
                    if sub_face and sub_face != face and sub_face not in faces:
                        if rank_of(list(sub_face)) < rank_of(list(face)):
                            faces.add(sub_face)
                            nxt.append(sub_face)
            frontier = nxt
        return sorted(faces, key=lambda f: (len(f), sorted(f)))

    def key(self) -> tuple:
        return (tuple(sorted(self.rays)), self.lattice.canonical_basis())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Cone):
            return NotImplemented
        return self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        return render_cone(self)


def _cone_has(rays: Sequence[Vector], x: Vector, dim: int) -> bool:
    if not rays:
        return is_zero(x)
    eqs, facets = _facet_normals(list(rays), dim)
    if not facets and rank_of(list(rays)) > 0:
        # cone is a full linear subspace (or a half-space-free union)
        return all(dot(e, x) == 0 for e in eqs)
    return _in_cone(x, eqs, facets)


def cone_determinant(c: Cone) -> Fraction:
    """Determinant of the ray matrix in the coordinates of the lattice basis.

    Rays are the rows, in the cone's stored order.
    """
    if len(c.rays) != c.lattice.rank:
        raise NotFullDimensional(
            f"cone has {len(c.rays)} rays in a rank {c.lattice.rank} lattice"
        )
    rows = [c.lattice.coordinates(r) for r in c.rays]
    value = det(rows)
    if value == 0:
        raise NotFullDimensional("rays are linearly dependent")
    return value


def is_smooth_cone(c: Cone) -> bool:
    """True iff the primitive rays are part of a basis of the lattice.

    Full-dimensional cones are tested by expressing each lattice basis vector
    in the rays; lower-dimensional ones by the gcd of maximal minors.
    """
    if not c.is_simplicial():
        return False
    lat = c.lattice
    m = len(c.rays)
    if m == lat.rank:
        for b in lat.basis:
            coeffs = solve_coordinates(c.rays, b)
            if coeffs is None or any(a.denominator != 1 for a in coeffs):
                return False
        return True
    rows = [lat.integer_coordinates(r) for r in c.rays]
    minors = [
        int(det([[row[j] for j in cols] for row in rows]))
        for cols in combinations(range(lat.rank), m)
    ]
    return reduce(gcd, minors, 0) == 1


def projection_along(ray: Vector):
    """Linear map killing ``ray``: drop the first coordinate where it is nonzero."""
    i = next(j for j, a in enumerate(ray) if a != 0)

    def pi(v: Sequence[Fraction]) -> Vector:
        t = Fraction(v[i]) / ray[i]
        w = sub(tuple(Fraction(a) for a in v), scale(t, ray))
        return w[:i] + w[i + 1:]

    return pi


def project_along(c: Cone, ray: Sequence[Fraction]) -> Cone:
    """Image of ``c`` in the quotient lattice by the line through ``ray``."""
    lat = c.lattice
    if lat.rank < 2:
        raise LatticeRankError("cannot project a rank 1 cone")
    r = lat.primitive(ray)
    if r not in c.rays:
        raise RayNotInCone(f"{render_vector(r)} is not a ray of {render_cone(c)}")
    pi = projection_along(r)
    image_lattice = Lattice.from_generators(pi(b) for b in lat.basis)
    images = [pi(x) for x in c.rays if x != r]
    images = [x for x in images if not is_zero(x)]
    if not images:
        raise NotFullDimensional("projection of a ray is the zero cone")
    return Cone(tuple(images), image_lattice)


# --- fans ------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Fan:
    """Finite set of cones in one lattice with optional divisor tags.

    ``ray_tags`` names toric divisors; ``face_tags`` names higher faces
    (curves), keyed by the set of rays spanning the face.
    """

    cones: tuple[Cone, ...]
    ray_tags: Mapping[Vector, str] = field(default_factory=dict)
    face_tags: Mapping[frozenset, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.cones:
            raise ValueError("empty fan")
        lat = self.cones[0].lattice
        if any(c.lattice != lat for c in self.cones):
            raise ValueError("all cones of a fan must share one lattice")
        object.__setattr__(self, "ray_tags", dict(self.ray_tags))
        object.__setattr__(self, "face_tags", dict(self.face_tags))

    @property
    def lattice(self) -> Lattice:
        return self.cones[0].lattice

    def rays(self) -> list[Vector]:
        out: list[Vector] = []
        for c in self.cones:
            for r in c.rays:
                if r not in out:
                    out.append(r)
        return out

    def tag(self, ray: Sequence[Fraction]) -> str | None:
        return self.ray_tags.get(self.lattice.primitive(ray))

    def ray_for_tag(self, tag: str) -> Vector:
        for r, t in self.ray_tags.items():
            if t == tag:
                return r
        raise KeyError(tag)

    def walls_are_separating(self) -> bool:
        """Cones sharing a codimension-one face lie on opposite sides of it,
        and no cone contains a ray of another cone that it does not share."""
        rank = self.lattice.rank
        for a, b in combinations(self.cones, 2):
            shared = [r for r in a.rays if r in b.rays]
            if any(a.contains(r) for r in b.rays if r not in shared):
                return False
            if any(b.contains(r) for r in a.rays if r not in shared):
                return False
            if len(shared) == rank - 1 and len(a.rays) == rank and len(b.rays) == rank:
                n = nullspace(shared, rank)[0]
                sa = [dot(n, r) for r in a.rays if r not in shared]
                sb = [dot(n, r) for r in b.rays if r not in shared]
                if not (all(x > 0 for x in sa) and all(x < 0 for x in sb)
                        or all(x < 0 for x in sa) and all(x > 0 for x in sb)):
                    return False
        return True

    def key(self) -> tuple:
        return (
            tuple(sorted(c.key() for c in self.cones)),
            tuple(sorted(self.ray_tags.items())),
            tuple(sorted((tuple(sorted(f)), t) for f, t in self.face_tags.items())),
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Fan):
            return NotImplemented
        return self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())


# --- rendering -------------------------------------------------------------------

def render_vector(v: Sequence[Fraction]) -> str:
    return "(" + ",".join(str(Fraction(a)) for a in v) + ")"


def render_cone(c: Cone) -> str:
    return "<" + " ".join(render_vector(r) for r in c.rays) + ">"


def render_fan(f: Fan) -> str:
    """Multi-line text form used in traces and reports."""
    lines = ["lattice " + " ".join(render_vector(b) for b in f.lattice.basis)]
    for c in f.cones:
        lines.append("cone " + render_cone(c))
    for r in f.rays():
        if r in f.ray_tags:
            lines.append(f"ray {render_vector(r)} {f.ray_tags[r]}")
    for face, t in sorted(f.face_tags.items(), key=lambda kv: sorted(kv[0])):
        lines.append("face <" + " ".join(render_vector(r) for r in sorted(face)) + f"> {t}")
    return "\n".join(lines)
