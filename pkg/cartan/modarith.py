"""Exact residue arithmetic in Z/mZ."""

from __future__ import annotations

from dataclasses import dataclass
from functools import wraps
from math import gcd, isqrt

from cartan.errors import EvenModulus, ModulusMismatch, ModulusOutOfRange, NotAUnit, NotPrime

MAX_MODULUS = 2**31


def _same_ring(func):
    @wraps(func)
    def method(self, other):
        if isinstance(other, int):
            other = Residue(other, self.modulus)
        elif not isinstance(other, Residue):
            return NotImplemented
        elif other.modulus != self.modulus:
            raise ModulusMismatch(f"residues mod {self.modulus} and mod {other.modulus}")
        return func(self, other)

    return method


@dataclass(frozen=True)
class Residue:
    """An element of Z/mZ, always stored as its representative in [0, m)."""

    value: int
    modulus: int

    def __post_init__(self):
        if not 1 <= self.modulus <= MAX_MODULUS:
            raise ModulusOutOfRange(f"modulus must lie in [1, 2^31], got {self.modulus}")
        if not 0 <= self.value < self.modulus:
            object.__setattr__(self, "value", self.value % self.modulus)

    @_same_ring
    def __add__(self, other):
        return Residue(self.value + other.value, self.modulus)

    __radd__ = __add__

    @_same_ring
    def __sub__(self, other):
        return Residue(self.value - other.value, self.modulus)

    @_same_ring
    def __rsub__(self, other):
        return Residue(other.value - self.value, self.modulus)

    @_same_ring
    def __mul__(self, other):
        return Residue(self.value * other.value, self.modulus)

    __rmul__ = __mul__

    def __neg__(self):
        return Residue(-self.value, self.modulus)

    def __int__(self):
        return self.value

    def __str__(self):
        return f"{self.value} mod {self.modulus}"


def embed_integer(z: int, m: int) -> Residue:
    if m < 1:
        raise ValueError(f"modulus must be positive, got {m}")
    return Residue(z % m, m)


def is_unit(x: Residue) -> bool:
    return gcd(x.value, x.modulus) == 1


def inv_mod(x: Residue) -> Residue:
    if not is_unit(x):
        raise NotAUnit(f"{x} is not invertible (gcd {gcd(x.value, x.modulus)})")
    return Residue(pow(x.value, -1, x.modulus), x.modulus)


def quarter_mod(z: int, m: int) -> Residue:
    """The residue r with 4r = z mod m.

    At odd m this is z times the inverse of 4. At even m it exists only as the
    plain integer quotient, so z has to be divisible by 4.
    """
    if m % 2 == 0:
        if z % 4:
            raise EvenModulus(f"{z}/4 has no meaning mod even {m}")
        return embed_integer(z // 4, m)
    return embed_integer(z * pow(4, -1, m), m)


def unit_count(m: int) -> int:
    """Order of (Z/mZ)^x."""
    count = m
    rest = m
    q = 2
    while q * q <= rest:
        if rest % q == 0:
            while rest % q == 0:
                rest //= q
            count -= count // q
        q += 1
    if rest > 1:
        count -= count // rest
    return count


def unit_table(m: int) -> list[bool]:
    return [gcd(v, m) == 1 for v in range(m)]


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    return all(p % q for q in range(2, isqrt(p) + 1))


def require_prime(p: int) -> int:
    if not is_prime(p):
        raise NotPrime(f"{p} is not prime")
    return p
