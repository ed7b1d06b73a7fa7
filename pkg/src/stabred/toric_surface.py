"""Two-dimensional cyclic quotient singularities.

A :class:`CyclicQuotient2D` with order ``k`` and weight ``nprime`` stands for
the quotient of C^2 by the cyclic group of order k acting with weights
(nprime, 1), written A_{nprime,k}.  Note the subscript order: weight first,
group order second.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Sequence

from .errors import BadInput, NotCoprime
from .lattice import Lattice, Vector, det, vec


@dataclass(frozen=True)
class CyclicQuotient2D:
    k: int
    nprime: int

    def __post_init__(self) -> None:
        if self.k < 1:
            raise BadInput(f"group order must be positive, got {self.k}")
        if not 0 <= self.nprime < self.k and not (self.k == 1 and self.nprime == 0):
            raise BadInput(f"weight {self.nprime} not in [0, {self.k})")
        if self.k > 1 and gcd(self.nprime, self.k) != 1:
            raise NotCoprime(f"weight {self.nprime} not coprime to {self.k}")

    @property
    def is_smooth(self) -> bool:
        return self.k == 1

    def __str__(self) -> str:
        return "smooth" if self.is_smooth else f"A_{{{self.nprime},{self.k}}}"


@dataclass(frozen=True)
class HJChain:
    entries: tuple[int, ...]

    def value(self) -> Fraction:
        return evaluate_hj(self.entries)

    def self_intersections(self) -> tuple[int, ...]:
        return tuple(-a for a in self.entries)


@dataclass(frozen=True)
class Normalization:
    """Result of :func:`normalize_cone_2d`: the normal form and the integer
    change of basis carrying <f2, k f1 - n f2> onto <f2, k f1 - n' f2>."""

    quotient: CyclicQuotient2D
    matrix: tuple[tuple[int, int], tuple[int, int]]


def evaluate_hj(entries: Sequence[int]) -> Fraction:
    """a1 - 1/(a2 - 1/(... - 1/ar))."""
    if not entries:
        raise BadInput("empty continued fraction")
    value = Fraction(entries[-1])
    for a in reversed(entries[:-1]):
        value = a - 1 / value
    return value


def normalize_cone_2d(k: int, n: int) -> Normalization:
    if k < 1:
        raise BadInput(f"k must be positive, got {k}")
    if gcd(k, n) != 1:
        raise NotCoprime(f"gcd({k}, {n}) != 1")
    if k == 1:
        nprime = 0
    else:
        nprime = pow(n % k, -1, k)
    b = (1 - n * nprime) // k
    assert n * nprime == 1 - k * b
    matrix = ((n, k), (b, -nprime))
    return Normalization(CyclicQuotient2D(k, nprime), matrix)


def hj_expansion(k: int, nprime: int) -> HJChain:
    """Negative-regular continued fraction of k/nprime by ceiling division."""
    if not 0 < nprime < k:
        raise BadInput(f"need 0 < nprime < k, got ({k}, {nprime})")
    if gcd(k, nprime) != 1:
        raise BadInput(f"gcd({k}, {nprime}) != 1")
    entries = []
    p, q = k, nprime
    while q:
        a = -(-p // q)
        entries.append(a)
        p, q = q, a * q - p
    return HJChain(tuple(entries))


def quotient_weights_2d(q: CyclicQuotient2D) -> tuple[int, tuple[int, int]]:
    return q.k, (q.nprime, 1)


def cone_quotient_type(u: Sequence[Fraction], v: Sequence[Fraction], lattice: Lattice) -> CyclicQuotient2D:
    """Singularity of the affine toric surface of the cone <u, v>.

    The rays are put in the form <f2, k f1 - n f2> in some lattice basis and
    the result is normalized.  The answer is determined up to swapping the
    two rays, which replaces the weight by its inverse mod k.
    """
    cu = lattice.integer_coordinates(lattice.primitive(u))
    cv = lattice.integer_coordinates(lattice.primitive(v))
    k = abs(int(det([cu, cv])))
    if k == 0:
        raise BadInput("rays are collinear")
    if k == 1:
        return CyclicQuotient2D(1, 0)
    # complete u to a basis (f1, u): f1 = (x, y) with det(f1, u) = 1
    p, q = cu
    g, s, t = _ext_gcd(p, q)
    assert g == 1
    # (t, -s) pairs with (p, q): det((t, -s), (p, q)) = t*q + s*p = 1
    f1 = (t, -s)
    # coordinates of v in basis (f1, u)
    a = det([cv, cu]) / det([f1, cu])
    b = det([f1, cv]) / det([f1, cu])
    a, b = int(a), int(b)
    # replacing f1 by -f1 keeps u and flips the sign of the f1-coordinate
    a = abs(a)
    assert a == k
    # now <u, v> = <f2, k f1 - n f2> with f2 = u
    n = -b
    return normalize_cone_2d(k, n).quotient


def _ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    if b == 0:
        return (abs(a), 1 if a >= 0 else -1, 0)
    g, x, y = _ext_gcd(b, a % b)
    return g, y, x - (a // b) * y


def toric_self_intersection(prev: Vector, mid: Vector, nxt: Vector, lattice: Lattice) -> Fraction:
    """Self-intersection of the curve of ray ``mid`` in a complete 2D fan.

    ``prev`` and ``nxt`` are the neighbouring rays on either side.  Uses
    D^2 = -det(u-, u+) / (det(u-, u) det(u, u+)) with all rays primitive,
    determinants taken in lattice coordinates and u- -> u counterclockwise.
    """
    um, u, up = (lattice.coordinates(lattice.primitive(x)) for x in (prev, mid, nxt))
    if det([um, u]) < 0:
        um, up = up, um
    d_outer = det([um, up])
    d_left = det([um, u])
    d_right = det([u, up])
    if d_left == 0 or d_right == 0:
        raise BadInput("neighbouring rays are collinear with the middle ray")
    return -d_outer / (d_left * d_right)


def standard_cone(k: int, n: int) -> tuple[Vector, Vector]:
    """Rays f2 and k f1 - n f2 of the normal form used by normalize_cone_2d, in Z^2."""
    return vec(0, 1), vec(k, -n)


def same_singularity(p: CyclicQuotient2D, q: CyclicQuotient2D) -> bool:
    """Equal as germs: swapping the two rays inverts the weight mod k."""
    if p.k != q.k:
        return False
    if p.k == 1:
        return True
    return p.nprime == q.nprime or (p.nprime * q.nprime) % p.k == 1
