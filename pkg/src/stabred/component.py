"""Irreducible components of the central fibre and their numerical invariants."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from math import lcm
from functools import reduce

from .errors import InconsistentRecord, InvalidFibre, NotMinimalFibre
from .weierstrass import (
    LocalFibreData,
    classify_fibre,
    format_fibre,
    is_log_canonical,
    n_invariant,
    q_contribution,
)

STANDARD = "standard"
LOG_STANDARD = "log_standard"
PSEUDOELLIPTIC = "pseudoelliptic"
PSEUDOELLIPTIC_E0 = "pseudoelliptic_E0"
PSEUDOELLIPTIC_EIN = "pseudoelliptic_EIN"

FIBRED_KINDS = (STANDARD, LOG_STANDARD)
STABILITY_MODES = ("pairs", "triples")


@dataclass(frozen=True)
class ComponentKind:
    tag: str = STANDARD
    param: int | None = None

    def __post_init__(self) -> None:
        if self.tag in FIBRED_KINDS or self.tag == PSEUDOELLIPTIC_E0:
            if self.param is not None:
                raise ValueError(f"{self.tag} takes no parameter")
        elif self.tag == PSEUDOELLIPTIC:
            # log canonical exactly when at most two fibres are marked
            if self.param not in (0, 1, 2):
                raise ValueError(f"pseudoelliptic(n) needs n in 0..2, got {self.param}")
        elif self.tag == PSEUDOELLIPTIC_EIN:
            if not isinstance(self.param, int) or self.param < 1:
                raise ValueError(f"pseudoelliptic_EIN(N) needs N >= 1, got {self.param}")
        else:
            raise ValueError(f"unknown component kind {self.tag!r}")

    @classmethod
    def pseudoelliptic(cls, n: int) -> ComponentKind:
        return cls(PSEUDOELLIPTIC, n)

    @property
    def is_fibred(self) -> bool:
        """Still carries its zero-section (standard or log-standard)."""
        return self.tag in FIBRED_KINDS

    def __str__(self) -> str:
        return self.tag if self.param is None else f"{self.tag}({self.param})"


KIND_STANDARD = ComponentKind(STANDARD)
KIND_LOG_STANDARD = ComponentKind(LOG_STANDARD)


@dataclass(frozen=True)
class JClass:
    """Behaviour of the j-map on the base: nonconstant of degree ``deg``, or
    constant with finite or infinite value."""

    kind: str = "constant_finite"
    deg: int = 0

    def __post_init__(self) -> None:
        if self.kind == "nonconstant":
            if not isinstance(self.deg, int) or self.deg < 1:
                raise ValueError(f"nonconstant j needs degree >= 1, got {self.deg!r}")
        elif self.kind in ("constant_finite", "constant_infinity"):
            if self.deg != 0:
                raise ValueError("constant j has degree 0")
        else:
            raise ValueError(f"unknown j class {self.kind!r}")

    @classmethod
    def nonconstant(cls, deg: int) -> JClass:
        return cls("nonconstant", deg)

    @property
    def isotrivial(self) -> bool:
        return self.kind != "nonconstant"

    def text(self) -> int | str:
        return {"constant_finite": "const", "constant_infinity": "inf"}.get(self.kind, self.deg)

    @classmethod
    def from_text(cls, value: int | str) -> JClass:
        if value == "const":
            return cls("constant_finite")
        if value == "inf":
            return cls("constant_infinity")
        if isinstance(value, bool) or not isinstance(value, int):
            raise ValueError(f"j must be a positive degree, 'const' or 'inf', got {value!r}")
        if value == 0:
            return cls("constant_finite")
        return cls.nonconstant(value)


@dataclass(frozen=True)
class FibreRecord:
    data: LocalFibreData
    monodromy: int = 1

    def __post_init__(self) -> None:
        if not isinstance(self.monodromy, int) or self.monodromy < 1:
            raise InvalidFibre(f"monodromy must be a positive integer, got {self.monodromy!r}")

    def __str__(self) -> str:
        text = format_fibre(self.data)
        return text if self.monodromy == 1 else f"{text}/{self.monodromy}"


@dataclass(frozen=True)
class SurfaceComponent:
    """One component of the central fibre.

    For the fibred kinds ``q_squared`` is the self-intersection of the
    zero-section.  For the pseudoelliptic kinds it is the self-intersection
    the zero-section had just before it was contracted.
    """

    id: str
    genus: int = 0
    j_class: JClass = field(default_factory=JClass)
    fibres: tuple[FibreRecord, ...] = ()
    kind: ComponentKind = KIND_STANDARD
    exceptional: tuple[Fraction, ...] = ()
    q_squared: Fraction | None = None

    def __post_init__(self) -> None:
        if not isinstance(self.genus, int) or self.genus < 0:
            raise ValueError(f"genus must be a non-negative integer, got {self.genus!r}")
        object.__setattr__(self, "fibres", tuple(self.fibres))
        object.__setattr__(self, "exceptional", tuple(Fraction(e) for e in self.exceptional))
        if self.kind.tag == STANDARD and self.exceptional:
            raise InconsistentRecord(f"{self.id}: standard component with exceptional curves")
        if self.q_squared is not None:
            object.__setattr__(self, "q_squared", Fraction(self.q_squared))
        elif self.kind.is_fibred and all_minimal(self):
            object.__setattr__(self, "q_squared", compute_q_squared(self))
        elif not self.kind.is_fibred:
            raise InconsistentRecord(f"{self.id}: contracted component needs its source Q^2")

    @property
    def deg_j(self) -> int:
        return self.j_class.deg

    @property
    def isotrivial(self) -> bool:
        return self.j_class.isotrivial

    def twisted_fibres(self) -> list[FibreRecord]:
        return [f for f in self.fibres if f.monodromy > 1]

    def with_(self, **changes) -> SurfaceComponent:
        return replace(self, **changes)


def all_minimal(c: SurfaceComponent) -> bool:
    return all(is_log_canonical(f.data) for f in c.fibres)


def compute_q_squared(c: SurfaceComponent) -> Fraction:
    """Sum of fibre contributions minus deg(j)/12, plus 1/E^2 per splice."""
    if not c.kind.is_fibred:
        raise InconsistentRecord(f"{c.id}: {c.kind} has no zero-section")
    total = Fraction(-c.deg_j, 12)
    for f in c.fibres:
        if not is_log_canonical(f.data):
            raise NotMinimalFibre(f"{c.id}: fibre {format_fibre(f.data)} is not minimal")
        total += q_contribution(f.data, f.monodromy)
    for e in c.exceptional:
        total += 1 / e
    return total


def monodromy_lcm(c: SurfaceComponent) -> int:
    return reduce(lcm, (f.monodromy for f in c.fibres), 1)


def lc_degree(c: SurfaceComponent, r: int) -> int:
    """L.Q = 2g - 2 + r, with r the number of attaching fibres."""
    if r < 0:
        raise ValueError("attachment count must be non-negative")
    return 2 * c.genus - 2 + r


class StabilityClass(Enum):
    ample = "ample"
    semiample_null_Q = "semiample_null_Q"
    extremal_ray_Q = "extremal_ray_Q"

    def __str__(self) -> str:
        return self.value


def stability_class(c: SurfaceComponent, r: int, mode: str) -> StabilityClass:
    if mode not in STABILITY_MODES:
        raise ValueError(f"mode must be one of {STABILITY_MODES}, got {mode!r}")
    if mode == "triples" and not c.isotrivial and c.genus == 0 and r in (1, 2):
        # the pulled back j-map makes the polarization positive on Q
        return StabilityClass.ample
    d = lc_degree(c, r)
    if d > 0:
        return StabilityClass.ample
    if d == 0:
        return StabilityClass.semiample_null_Q
    return StabilityClass.extremal_ray_Q


def stability_notes(c: SurfaceComponent, r: int, mode: str) -> list[str]:
    """Provisos attached to a classification."""
    notes = []
    if stability_class(c, r, mode) is StabilityClass.semiample_null_Q:
        if c.isotrivial:
            notes.append("isotrivial: semiampleness needs non-isotriviality")
        if c.q_squared == 0:
            notes.append("degenerate-trivial")
    if len(c.twisted_fibres()) >= 2:
        notes.append("multi-twisted extrapolation")
    return notes


def pseudoelliptic_ample(c: SurfaceComponent) -> bool:
    if c.kind.tag != PSEUDOELLIPTIC:
        raise InconsistentRecord(f"{c.id}: not a pseudoelliptic(n) component")
    n = c.kind.param
    if n == 2:
        return True
    if n == 1:
        return c.q_squared < -1
    return c.q_squared < -4


def pullback_coefficient(c: SurfaceComponent) -> Fraction:
    """Coefficient of Q in the pullback of the polarization along the
    contraction of the zero-section: (2 - n) / Q^2."""
    if c.kind.tag != PSEUDOELLIPTIC:
        raise InconsistentRecord(f"{c.id}: not a pseudoelliptic(n) component")
    if c.q_squared == 0:
        raise InconsistentRecord(f"{c.id}: contracted section with Q^2 = 0")
    return Fraction(2 - c.kind.param, 1) / c.q_squared


def pullback_identity_check(c: SurfaceComponent, scions: int = 0, splices: int | None = None) -> bool:
    """Numerical consistency of the recorded contraction data.

    log_standard: one exceptional curve per splice, the zero-section degree
    on the blow-up is 2g - 2 + scions and grows by one per splice on the
    blow-down, and Q^2 matches the fibre formula.
    pseudoelliptic(n): the coefficient solving (L + a Q).Q = 0 on the source
    equals (2 - n)/Q^2.
    """
    if c.kind.tag == LOG_STANDARD:
        s = len(c.exceptional) if splices is None else splices
        if s != len(c.exceptional):
            raise InconsistentRecord(
                f"{c.id}: {len(c.exceptional)} exceptional curves but {s} splices"
            )
        on_blowup = lc_degree(c, scions)
        on_blowdown = lc_degree(c, scions + s)
        if on_blowdown - on_blowup != s:
            return False
        return c.q_squared == compute_q_squared(c)
    if c.kind.tag == PSEUDOELLIPTIC:
        n = c.kind.param
        # degree of the polarization on Q for a rational base with n marked fibres
        degree_on_q = lc_degree(c, n)
        solved = Fraction(-degree_on_q) / c.q_squared
        return solved == pullback_coefficient(c)
    raise InconsistentRecord(f"{c.id}: pullback identities need log_standard or pseudoelliptic")


def fibre_multiset(c: SurfaceComponent) -> list[str]:
    out = []
    for f in c.fibres:
        d = f.data
        if d.is_j_infinity:
            name = f"I[jinf{d.jinf_k}]"
        elif not is_log_canonical(d):
            name = f"N={n_invariant(d)}"
        else:
            name = str(classify_fibre(d))
        out.append(name if f.monodromy == 1 else f"{name}/{f.monodromy}")
    return sorted(out)


def render_component(c: SurfaceComponent, r: int | None = None, mode: str | None = None) -> str:
    parts = [c.id, str(c.kind), f"g={c.genus}", f"j={c.j_class.text()}"]
    parts.append("fibres={" + ",".join(fibre_multiset(c)) + "}")
    if c.exceptional:
        parts.append("E2=[" + ",".join(str(e) for e in c.exceptional) + "]")
    parts.append(f"Q2={c.q_squared}")
    if r is not None and mode is not None and c.kind.is_fibred:
        parts.append(f"class={stability_class(c, r, mode)}")
    return " ".join(parts)
