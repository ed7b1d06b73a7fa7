"""Three-dimensional toric models used by flips and contractions.

Coordinates are (e1, e2, e3).  Near a component attached along a single
fibre the total space is modelled by :func:`fan_one_fibre`; its flip is
:func:`log_flip_fan`.  A chain of components with two attachments each is
modelled by :func:`fan_chain`, which :func:`contraction_cone` collapses to a
single cone.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from fractions import Fraction
from math import gcd
from typing import Sequence

from .errors import InvalidData, NotCoprime, WrongFanShape
from .lattice import Cone, Fan, Lattice, Vector, vec
from .toric_surface import CyclicQuotient2D

# divisor names shared by the one-fibre fan and its flip
ZERO_SECTION = "Q"
LEAF = "X1"
NEIGHBOUR = "X2"
SECTION_DIVISOR = "S"
FLIPPING_CURVE = "Q1"
FLIPPED_CURVE = "Q1+"


@dataclass(frozen=True)
class OneFibreFanData:
    """(k, n) with Q1^2 = -n/k; a common factor is divided out on construction."""

    k: int
    n: int
    reduced_by: int = 1

    def __post_init__(self) -> None:
        if self.k < 1 or self.n < 1:
            raise InvalidData(f"k and n must be positive, got ({self.k}, {self.n})")
        g = gcd(self.k, self.n)
        if g > 1:
            object.__setattr__(self, "k", self.k // g)
            object.__setattr__(self, "n", self.n // g)
            object.__setattr__(self, "reduced_by", self.reduced_by * g)

    @classmethod
    def from_q_squared(cls, q_sq: Fraction) -> OneFibreFanData:
        q_sq = Fraction(q_sq)
        if q_sq >= 0:
            raise InvalidData(f"need negative Q^2, got {q_sq}")
        return cls(q_sq.denominator, -q_sq.numerator)

    @property
    def q_squared(self) -> Fraction:
        return Fraction(-self.n, self.k)


@dataclass(frozen=True)
class ThreefoldQuotientType:
    """1/r(a, b, 1)."""

    r: int
    weights: tuple[int, int, int]

    def __post_init__(self) -> None:
        if self.r < 1:
            raise InvalidData(f"order must be positive, got {self.r}")
        a, b, c = self.weights
        if c != 1:
            raise InvalidData("last weight must be 1")
        object.__setattr__(self, "weights", (a % self.r, b % self.r, 1))

    def __str__(self) -> str:
        a, b, c = self.weights
        return f"1/{self.r}({a},{b},{c})"


@dataclass(frozen=True)
class FlipSingularities:
    threefold: ThreefoldQuotientType
    on_X2plus: CyclicQuotient2D
    on_X1plus: CyclicQuotient2D
    # auxiliary integers of the defining congruences
    nprime: int
    a: int
    m: int
    kprime: int


@dataclass(frozen=True)
class ChainFanData:
    k_list: tuple[int, ...]
    n_list: tuple[int, ...]
    n: int = 1
    a: int = 1
    h1: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "k_list", tuple(self.k_list))
        object.__setattr__(self, "n_list", tuple(self.n_list))
        if len(self.k_list) != len(self.n_list) + 1:
            raise InvalidData(
                f"need |k_list| = |n_list| + 1, got {len(self.k_list)} and {len(self.n_list)}"
            )
        if any(x < 1 for x in self.k_list + self.n_list):
            raise InvalidData("chain entries must be positive")
        if self.n < 1 or self.h1 < 1:
            raise InvalidData("cover order and h1 must be positive")
        if gcd(self.a, self.h1) != 1:
            raise NotCoprime(f"gcd(a={self.a}, h1={self.h1}) != 1")

    @property
    def length(self) -> int:
        return len(self.n_list)


# --- one attaching fibre -----------------------------------------------------

def one_fibre_vectors(k: int, n: int) -> dict[str, Vector]:
    return {
        "e1": vec(1, 0, 0),
        "e3": vec(0, 0, 1),
        "e1+e2": vec(1, 1, 0),
        "w": vec(0, Fraction(1, k), Fraction(n, k)),
    }


def one_fibre_lattice(k: int, n: int) -> Lattice:
    v = one_fibre_vectors(k, n)
    return Lattice((v["e1"], v["w"], v["e3"]))


def _one_fibre_tags(v: dict[str, Vector]) -> dict[Vector, str]:
    return {
        v["e3"]: ZERO_SECTION,
        v["e1+e2"]: LEAF,
        v["e1"]: NEIGHBOUR,
        v["w"]: SECTION_DIVISOR,
    }


def fan_one_fibre(d: OneFibreFanData) -> Fan:
    return _one_fibre_fan(d.k, d.n)


@lru_cache(maxsize=4096)
def _one_fibre_fan(k: int, n: int) -> Fan:
    v = one_fibre_vectors(k, n)
    lat = one_fibre_lattice(k, n)
    s1 = Cone((v["e1"], v["e1+e2"], v["e3"]), lat)
    s2 = Cone((v["e3"], v["e1+e2"], v["w"]), lat)
    if s1.dim != 3 or s2.dim != 3:
        raise InvalidData("one-fibre cones are not full-dimensional")
    return Fan(
        (s1, s2),
        ray_tags=_one_fibre_tags(v),
        face_tags={frozenset((v["e3"], v["e1+e2"])): FLIPPING_CURVE},
    )


def _read_one_fibre(f: Fan) -> tuple[int, int]:
    """Recover (k, n) from a fan built by :func:`fan_one_fibre`."""
    try:
        w = f.ray_for_tag(SECTION_DIVISOR)
    except KeyError:
        raise WrongFanShape("no section divisor ray") from None
    if w[0] != 0 or w[1] <= 0 or (1 / w[1]).denominator != 1:
        raise WrongFanShape(f"unexpected section ray {w}")
    k = int(1 / w[1])
    n = w[2] * k
    if n.denominator != 1:
        raise WrongFanShape(f"unexpected section ray {w}")
    n = int(n)
    if k < 1 or n < 1:
        raise WrongFanShape("fan is not of one-fibre shape")
    expected = _one_fibre_fan(k, n)
    if f is not expected and f != expected:
        raise WrongFanShape("fan is not of one-fibre shape")
    return k, n


def log_flip_fan(f: Fan) -> Fan:
    """Replace the wall <e3, e1+e2> by <e1, w>."""
    k, n = _read_one_fibre(f)
    v = one_fibre_vectors(k, n)
    lat = f.lattice
    s1 = Cone((v["e1"], v["w"], v["e3"]), lat)
    s2 = Cone((v["e1"], v["e1+e2"], v["w"]), lat)
    return Fan(
        (s1, s2),
        ray_tags=_one_fibre_tags(v),
        face_tags={frozenset((v["e1"], v["w"])): FLIPPED_CURVE},
    )


def straighten_matrix(k: int, n: int) -> tuple[tuple[int, ...], ...]:
    return ((1, 0, 0), (0, k, 0), (0, -n, 1))


def apply_matrix(m: Sequence[Sequence[int]], v: Sequence[Fraction]) -> Vector:
    """Matrix times column vector."""
    return tuple(sum((Fraction(a) * b for a, b in zip(row, v)), Fraction(0)) for row in m)


def straighten(f: Fan) -> list[list[Vector]]:
    """Ray lists of the cones of ``f`` after the straightening change of
    coordinates, in which the one-fibre lattice becomes Z^3."""
    w = f.ray_for_tag(SECTION_DIVISOR)
    k = int(1 / w[1])
    m = straighten_matrix(k, int(w[2] * k))
    return [[apply_matrix(m, r) for r in c.rays] for c in f.cones]


def flip_singularity_data(d: OneFibreFanData) -> FlipSingularities:
    k, n = d.k, d.n
    if gcd(k, n) != 1:
        raise NotCoprime(f"gcd({k}, {n}) != 1")
    nprime = pow(n % k, -1, k) if k > 1 else 0
    # smallest a with a*k - n' >= 0
    a = -(-nprime // k)
    m = a * k - nprime
    kprime = pow(k % n, -1, n) if n > 1 else 0
    return FlipSingularities(
        threefold=ThreefoldQuotientType(n, (1, k, 1)),
        on_X2plus=CyclicQuotient2D(k, m % k),
        on_X1plus=CyclicQuotient2D(n, kprime),
        nprime=nprime,
        a=a,
        m=m,
        kprime=kprime,
    )


def self_int_flip(q_sq: Fraction) -> Fraction:
    q_sq = Fraction(q_sq)
    if q_sq == 0:
        raise ZeroDivisionError("self-intersection 0 cannot be flipped")
    return 1 / q_sq


# --- chains ------------------------------------------------------------------

def chain_rays(d: ChainFanData) -> list[Vector]:
    """(1/n)e1, w_1, ..., w_{N+1}, e3 with
    w_i = e1 + (k_1+...+k_i) e2 + sum_{j=2..i} (n_1+...+n_{j-1}) k_j e3."""
    rays = [vec(Fraction(1, d.n), 0, 0)]
    s = 0
    z = 0
    for i, k in enumerate(d.k_list):
        s += k
        if i > 0:
            z += sum(d.n_list[:i]) * k
        rays.append(vec(1, s, z))
    rays.append(vec(0, 0, 1))
    return rays


def chain_lattice(d: ChainFanData) -> Lattice:
    return Lattice((
        vec(Fraction(1, d.n), 0, 0),
        vec(0, 0, 1),
        vec(0, Fraction(1, d.n), Fraction(d.a, d.h1)),
    ))


def fan_chain(d: ChainFanData) -> Fan:
    rays = chain_rays(d)
    lat = chain_lattice(d)
    e3 = rays[-1]
    walls = rays[:-1]
    cones = tuple(Cone((walls[i], walls[i + 1], e3), lat) for i in range(len(walls) - 1))
    if any(c.dim != 3 for c in cones):
        raise InvalidData("chain cones are not full-dimensional")
    prim = [lat.primitive(r) for r in rays]
    tags = {prim[-1]: ZERO_SECTION, prim[0]: "end0", prim[-2]: "end1"}
    for i in range(1, d.length + 1):
        tags[prim[i]] = f"X{i}"
    return Fan(cones, ray_tags=tags)


def contraction_cone(d: ChainFanData) -> Cone:
    return Cone(tuple(chain_rays(d)), chain_lattice(d))


# --- components with two marked fibres ----------------------------------------

def type2_lattice(n: int, a: int, h1: int) -> Lattice:
    """Z^2 enlarged by (1/n, a/h1) and (1/n, (n-a)/h1)."""
    return Lattice.from_generators([
        vec(1, 0),
        vec(0, 1),
        vec(Fraction(1, n), Fraction(a, h1)),
        vec(Fraction(1, n), Fraction(n - a, h1)),
    ])


def type2_attach_fan(n: int, a: int, h1: int) -> Fan:
    """Single-cone fan <e1, -e1 + n e2>; the rays carry the marked fibres and
    the cone itself the contracted zero-section."""
    if n < 1 or h1 < 1:
        raise InvalidData("n and h1 must be positive")
    if gcd(a, h1) != 1:
        raise NotCoprime(f"gcd(a={a}, h1={h1}) != 1")
    lat = type2_lattice(n, a, h1)
    g1 = lat.primitive(vec(1, 0))
    g2 = lat.primitive(vec(-1, n))
    cone = Cone((g1, g2), lat)
    return Fan((cone,), ray_tags={g1: "G1", g2: "G2"}, face_tags={frozenset((g1, g2)): ZERO_SECTION})


def section_contraction_cone(q_sq: Fraction) -> Fan:
    """Surface germ after contracting a zero-section with Q^2 = -n/k.

    Uses the blow-up fan <e1, e2> u <e1, n e1 - k e2>, in which the ray e1
    has self-intersection -n/k, and returns its coarsening <e2, n e1 - k e2>.
    """
    d = OneFibreFanData.from_q_squared(q_sq)
    lat = Lattice.standard(2)
    e2 = vec(0, 1)
    v = vec(d.n, -d.k)
    cone = Cone((e2, v), lat)
    return Fan((cone,), ray_tags={e2: "G", lat.primitive(v): "F"},
               face_tags={frozenset(cone.rays): ZERO_SECTION})


def blowup_surface_fan(q_sq: Fraction) -> tuple[Vector, Vector, Vector]:
    """Rays (e2, e1, n e1 - k e2) around the curve of Q^2 = -n/k."""
    d = OneFibreFanData.from_q_squared(q_sq)
    return vec(0, 1), vec(1, 0), vec(d.n, -d.k)
