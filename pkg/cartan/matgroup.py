"""2x2 matrices over Z/mZ and the finite groups built from them.

Groups keep their elements as a frozenset of reduced row-major 4-tuples
(a11, a12, a21, a22); Mat2 is the checked, user-facing wrapper around one tuple.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass
from enum import Enum
from math import gcd
from typing import Iterable, Iterator, Optional, Union

from cartan.errors import (
    ClosureBudgetExceeded,
    MalformedMatrix,
    ModulusMismatch,
    NonInvertibleGenerator,
    NotADivisor,
)
from cartan.modarith import Residue, embed_integer, unit_table
from utils.config import closure_cap

log = logging.getLogger(__name__)

Entries = tuple[int, int, int, int]


def _mul(x: Entries, y: Entries, m: int) -> Entries:
    a, b, c, d = x
    e, f, g, h = y
    return ((a * e + b * g) % m, (a * f + b * h) % m, (c * e + d * g) % m, (c * f + d * h) % m)


def _det(x: Entries, m: int) -> int:
    return (x[0] * x[3] - x[1] * x[2]) % m


def _reduce(x: Entries, m: int) -> Entries:
    return (x[0] % m, x[1] % m, x[2] % m, x[3] % m)


def _identity(m: int) -> Entries:
    return (1 % m, 0, 0, 1 % m)


def _inverse(x: Entries, m: int) -> Entries:
    a, b, c, d = x
    u = pow(_det(x, m), -1, m)
    return ((d * u) % m, (-b * u) % m, (-c * u) % m, (a * u) % m)


def witness_key(x: Entries) -> tuple[int, int, int, int]:
    """Order used to pick witnesses: Cartan coordinates (a, b) = (a22, a12) first."""
    return (x[3], x[1], x[2], x[0])


@dataclass(frozen=True)
class Mat2:
    entries: Entries
    modulus: int

    def __post_init__(self):
        if self.modulus < 1:
            raise ValueError(f"modulus must be positive, got {self.modulus}")
        if len(self.entries) != 4:
            raise MalformedMatrix(f"expected 4 entries, got {len(self.entries)}")
        object.__setattr__(self, "entries", _reduce(tuple(int(e) for e in self.entries), self.modulus))

    @classmethod
    def identity(cls, m: int) -> "Mat2":
        return cls(_identity(m), m)

    @classmethod
    def parse(cls, text: str, m: int) -> "Mat2":
        """Read the row-major "a11,a12,a21,a22" format."""
        parts = [part.strip() for part in text.split(",")]
        try:
            values = tuple(int(part) for part in parts)
        except ValueError:
            raise MalformedMatrix(f"not a matrix: {text!r}") from None
        if len(values) != 4:
            raise MalformedMatrix(f"expected 4 comma-separated entries, got {text!r}")
        return cls(values, m)

    def __mul__(self, other: "Mat2") -> "Mat2":
        return mat_mul(self, other)

    def __str__(self):
        return ",".join(str(e) for e in self.entries)


class GroupKind(str, Enum):
    CARTAN = "cartan"
    EXTENDED = "extended"
    GENERATED = "generated"


@dataclass(frozen=True)
class MatGroup:
    modulus: int
    elements: frozenset
    kind: GroupKind
    params: Optional[tuple[int, int]] = None  # (delta mod m, phi mod m)

    def __len__(self):
        return len(self.elements)

    @property
    def order(self) -> int:
        return len(self.elements)

    def __contains__(self, x: Union[Mat2, Entries]) -> bool:
        if isinstance(x, Mat2):
            return x.modulus == self.modulus and x.entries in self.elements
        return x in self.elements

    def __iter__(self) -> Iterator[Mat2]:
        for entries in self.sorted_entries():
            yield Mat2(entries, self.modulus)

    def sorted_entries(self) -> list[Entries]:
        return sorted(self.elements)


def _check_moduli(x: Mat2, y: Mat2):
    if x.modulus != y.modulus:
        raise ModulusMismatch(f"matrices mod {x.modulus} and mod {y.modulus}")


def mat_mul(x: Mat2, y: Mat2) -> Mat2:
    _check_moduli(x, y)
    return Mat2(_mul(x.entries, y.entries, x.modulus), x.modulus)


def mat_det(x: Mat2) -> Residue:
    return Residue(_det(x.entries, x.modulus), x.modulus)


def mat_reduce(x: Mat2, m_new: int) -> Mat2:
    if m_new < 1 or x.modulus % m_new:
        raise NotADivisor(f"{m_new} does not divide {x.modulus}")
    return Mat2(x.entries, m_new)


def in_sl2(x: Mat2) -> bool:
    return mat_det(x).value == 1 % x.modulus


def is_subgroup(h: MatGroup, g: MatGroup) -> bool:
    if h.modulus != g.modulus:
        raise ModulusMismatch(f"groups mod {h.modulus} and mod {g.modulus}")
    return h.elements <= g.elements


def gamma_matrix(phi: Residue, m: int) -> Mat2:
    return Mat2((-1, 0, phi.value, 1), m)


def cartan_enumerate(delta: Residue, phi: Residue, m: int) -> MatGroup:
    """All (a + b*phi, b; b*delta, a) with a^2 + phi*ab - delta*b^2 a unit mod m."""
    if delta.modulus != m or phi.modulus != m:
        raise ModulusMismatch(f"parameters mod {delta.modulus}/{phi.modulus}, group mod {m}")
    d, f = delta.value, phi.value
    unit = unit_table(m)
    elements = set()
    for a in range(m):
        for b in range(m):
            if unit[(a * a + f * a * b - d * b * b) % m]:
                elements.add(((a + b * f) % m, b, (b * d) % m, a))
    log.debug("C(%d) with delta=%d phi=%d has %d elements", m, d, f, len(elements))
    return MatGroup(m, frozenset(elements), GroupKind.CARTAN, (d, f))


def _normalizes(g: Entries, group: frozenset, m: int) -> bool:
    g_inv = _inverse(g, m)
    return all(_mul(_mul(g, c, m), g_inv, m) in group for c in group)


def extended_group(cartan: MatGroup) -> MatGroup:
    """N = <gamma, C>, realized as C u gamma*C once gamma is seen to normalize C."""
    if cartan.kind is not GroupKind.CARTAN or cartan.params is None:
        raise ValueError("extended_group needs a Cartan group with known (delta, phi)")
    m = cartan.modulus
    delta, phi = cartan.params
    gamma = gamma_matrix(embed_integer(phi, m), m).entries

    if gamma in cartan.elements:
        return MatGroup(m, cartan.elements, GroupKind.EXTENDED, cartan.params)

    if _mul(gamma, gamma, m) in cartan.elements and _normalizes(gamma, cartan.elements, m):
        coset = {_mul(gamma, c, m) for c in cartan.elements}
        return MatGroup(m, cartan.elements | coset, GroupKind.EXTENDED, cartan.params)

    log.warning("gamma does not normalize C for delta=%d phi=%d m=%d, closing by BFS", delta, phi, m)
    gens = [Mat2(gamma, m)] + [Mat2(c, m) for c in sorted(cartan.elements)]
    closed = closure_from_generators(gens, m)
    return MatGroup(m, closed.elements, GroupKind.EXTENDED, cartan.params)


def closure_from_generators(gens: Iterable[Mat2], m: int, cap: Optional[int] = None) -> MatGroup:
    if cap is None:
        cap = closure_cap()
    gen_entries = []
    for g in gens:
        if g.modulus != m:
            raise ModulusMismatch(f"generator {g} is mod {g.modulus}, expected mod {m}")
        if gcd(_det(g.entries, m), m) != 1:
            raise NonInvertibleGenerator(f"generator {g} has non-unit determinant mod {m}")
        gen_entries.append(g.entries)

    start = _identity(m)
    seen = {start}
    queue = deque([start])
    while queue:
        current = queue.popleft()
        for g in gen_entries:
            nxt = _mul(current, g, m)
            if nxt not in seen:
                seen.add(nxt)
                if len(seen) > cap:
                    raise ClosureBudgetExceeded(f"closure mod {m} passed {cap} elements")
                queue.append(nxt)
    return MatGroup(m, frozenset(seen), GroupKind.GENERATED)
