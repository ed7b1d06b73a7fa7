"""Local Weierstrass data y^2 = x^3 + a x + b at one point of the base.

The classification uses N = min(3 ord(a), 2 ord(b)), which merges Kodaira's
I_n into I and I_n* into I*, and adds the type L for N = 12 (an elliptic
singularity on the Weierstrass model).  A fibre with j = infinity of the
shape y^2 = x^2 (x - t^k) is tracked separately by its order k.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

from .errors import InvalidFibre, JInfinityCase, NotMinimal, NotStandardJInfinity

INF = math.inf

# N = min(3 ord a, 2 ord b) must not exceed this for log canonical singularities
MAX_STANDARD_N = 12


class KodairaType(Enum):
    I = "I"
    Istar = "I*"
    II = "II"
    IIstar = "II*"
    III = "III"
    IIIstar = "III*"
    IV = "IV"
    IVstar = "IV*"
    L = "L"

    def __str__(self) -> str:
        return self.value


TYPE_BY_N: dict[int, KodairaType] = {
    0: KodairaType.I,
    6: KodairaType.Istar,
    2: KodairaType.II,
    10: KodairaType.IIstar,
    3: KodairaType.III,
    9: KodairaType.IIIstar,
    4: KodairaType.IV,
    8: KodairaType.IVstar,
    12: KodairaType.L,
}

N_BY_TYPE: dict[KodairaType, int] = {t: n for n, t in TYPE_BY_N.items()}

# smallest orders (ord a, ord b) realizing each tabulated N
ORDERS_BY_N: dict[int, tuple[int, int]] = {
    0: (0, 0),
    2: (1, 1),
    3: (1, 2),
    4: (2, 2),
    6: (2, 3),
    8: (3, 4),
    9: (3, 5),
    10: (4, 5),
    12: (4, 6),
}


@dataclass(frozen=True)
class LocalFibreData:
    """Vanishing orders at one point.

    ``nu_a``/``nu_b`` may be :data:`INF` for an identically vanishing
    coefficient.  ``jinf_k`` marks the j = infinity model and makes the
    orders irrelevant.  ``n_direct`` records a fibre known only through its
    N value (the fibre created when a component is contracted onto its
    neighbour); the orders are then unused.
    """

    nu_a: int | float = 0
    nu_b: int | float = 0
    nu_delta: int | None = None
    jinf_k: int | None = None
    n_direct: int | None = None

    def __post_init__(self) -> None:
        if self.jinf_k is not None:
            if not isinstance(self.jinf_k, int) or self.jinf_k < 0:
                raise InvalidFibre(f"j=inf order must be a non-negative integer, got {self.jinf_k!r}")
            return
        if self.n_direct is not None:
            if not isinstance(self.n_direct, int) or self.n_direct < 0:
                raise InvalidFibre(f"N must be a non-negative integer, got {self.n_direct!r}")
            return
        for name in ("nu_a", "nu_b"):
            v = getattr(self, name)
            if not (v == INF or (isinstance(v, int) and v >= 0)):
                raise InvalidFibre(f"{name} must be a non-negative integer or inf, got {v!r}")
        if self.nu_a == INF and self.nu_b == INF:
            raise InvalidFibre("a and b cannot both vanish identically")
        if self.nu_delta is not None and (not isinstance(self.nu_delta, int) or self.nu_delta < 0):
            raise InvalidFibre(f"nu_delta must be a non-negative integer, got {self.nu_delta!r}")

    @classmethod
    def j_infinity(cls, k: int) -> LocalFibreData:
        return cls(jinf_k=k)

    @classmethod
    def with_n(cls, n: int) -> LocalFibreData:
        """Fibre with the given N, using tabulated orders when possible."""
        if n in ORDERS_BY_N:
            a, b = ORDERS_BY_N[n]
            return cls(a, b)
        return cls(n_direct=n)

    @property
    def is_j_infinity(self) -> bool:
        return self.jinf_k is not None

    @property
    def j_type(self) -> str:
        return "j_infinity" if self.is_j_infinity else "finite"

    def __str__(self) -> str:
        return format_fibre(self)


def n_invariant(d: LocalFibreData) -> int:
    if d.is_j_infinity:
        raise JInfinityCase("fibre has j = infinity; N is not defined")
    if d.n_direct is not None:
        return d.n_direct
    n = min(3 * d.nu_a, 2 * d.nu_b)
    return int(n)


def classify_fibre(d: LocalFibreData) -> KodairaType:
    if d.is_j_infinity:
        if d.jinf_k > 2:
            raise NotStandardJInfinity(f"j=inf fibre with k={d.jinf_k} > 2 is not semi-log-canonical")
        return KodairaType.I
    n = n_invariant(d)
    if n > MAX_STANDARD_N:
        raise NotMinimal(f"N = {n} > {MAX_STANDARD_N}; reduce first")
    return TYPE_BY_N.get(n, KodairaType.I)


def fibre_flags(d: LocalFibreData) -> list[str]:
    """Annotations a report should carry for this fibre."""
    flags = []
    if d.is_j_infinity:
        flags.append("multiplicative")
        return flags
    n = n_invariant(d)
    if n <= MAX_STANDARD_N and n not in TYPE_BY_N:
        flags.append("untabulated-N")
    if n in (0, 6) and d.nu_delta is None and d.n_direct is None:
        flags.append("delta-unrefined")
    return flags


def euler_number(d: LocalFibreData) -> int | None:
    """Topological Euler number when it is determined by the data.

    For the tabulated additive types it is fixed; for I and I* it needs the
    discriminant order (I_n has chi = n, I_n* has chi = n + 6 = ord Delta).
    """
    if d.is_j_infinity:
        return None
    t = classify_fibre(d)
    fixed = {
        KodairaType.II: 2, KodairaType.III: 3, KodairaType.IV: 4,
        KodairaType.IVstar: 8, KodairaType.IIIstar: 9, KodairaType.IIstar: 10,
    }
    if t in fixed:
        return fixed[t]
    if t in (KodairaType.I, KodairaType.Istar) and d.nu_delta is not None:
        return d.nu_delta
    return None


def is_log_canonical(d: LocalFibreData) -> bool:
    if d.is_j_infinity:
        return d.jinf_k <= 2
    return n_invariant(d) <= MAX_STANDARD_N


def reduce_minimal(d: LocalFibreData) -> tuple[LocalFibreData, int]:
    """Subtract (4, 6) from the orders while N > 12.

    Each subtraction is the coordinate change (x, y) -> (x t^2, y t^3); it
    lowers ord(Delta) by 12.
    """
    if d.is_j_infinity:
        raise JInfinityCase("reduce_minimal needs finite Weierstrass data")
    steps = 0
    if d.n_direct is not None:
        n = d.n_direct
        while n > MAX_STANDARD_N:
            n -= 12
            steps += 1
        return (d if steps == 0 else LocalFibreData(n_direct=n)), steps
    a, b, delta = d.nu_a, d.nu_b, d.nu_delta
    while min(3 * a, 2 * b) > MAX_STANDARD_N:
        a -= 4
        b -= 6
        if delta is not None:
            delta = max(delta - 12, 0)
        steps += 1
    if steps == 0:
        return d, 0
    return LocalFibreData(a, b, delta), steps


def q_contribution(d: LocalFibreData, monodromy_k: int = 1) -> Fraction:
    """-N / (12 k); j = infinity fibres contribute nothing through N."""
    if monodromy_k < 1:
        raise InvalidFibre(f"monodromy must be positive, got {monodromy_k}")
    if d.is_j_infinity:
        classify_fibre(d)
        return Fraction(0)
    n = n_invariant(d)
    if n > MAX_STANDARD_N:
        raise NotMinimal(f"N = {n} > {MAX_STANDARD_N}")
    return Fraction(-n, 12 * monodromy_k)


# --- text form -----------------------------------------------------------------

_ORDER = r"\s*(\d+|inf)\s*"
_PAIR_RE = re.compile(rf"^\({_ORDER},{_ORDER}(?:,\s*(\d+)\s*)?\)$")
_JINF_RE = re.compile(r"^jinf\(\s*(\d+)\s*\)$")
_NDIRECT_RE = re.compile(r"^n\(\s*(\d+)\s*\)$")


def _order(text: str) -> int | float:
    return INF if text == "inf" else int(text)


def parse_fibre(text: str) -> LocalFibreData:
    """Inverse of :func:`format_fibre`."""
    s = text.strip()
    if m := _PAIR_RE.match(s):
        delta = int(m.group(3)) if m.group(3) is not None else None
        return LocalFibreData(_order(m.group(1)), _order(m.group(2)), delta)
    if m := _JINF_RE.match(s):
        return LocalFibreData.j_infinity(int(m.group(1)))
    if m := _NDIRECT_RE.match(s):
        return LocalFibreData(n_direct=int(m.group(1)))
    raise InvalidFibre(f"cannot parse fibre data {text!r}")


def format_fibre(d: LocalFibreData) -> str:
    if d.is_j_infinity:
        return f"jinf({d.jinf_k})"
    if d.n_direct is not None:
        return f"n({d.n_direct})"

    def o(v: int | float) -> str:
        return "inf" if v == INF else str(v)

    parts = [o(d.nu_a), o(d.nu_b)]
    if d.nu_delta is not None:
        parts.append(str(d.nu_delta))
    return "(" + ", ".join(parts) + ")"
