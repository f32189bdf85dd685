"""From a CM order (Delta_K, f) to the Cartan parameters (phi, delta)."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

from cartan.errors import BadConductor, NotFundamental, NotImaginary
from cartan.modarith import Residue, embed_integer, quarter_mod


class Parity(str, Enum):
    EVEN = "even"
    ODD = "odd"

    @classmethod
    def of(cls, m: int) -> "Parity":
        return cls.EVEN if m % 2 == 0 else cls.ODD


@dataclass(frozen=True)
class OrderParams:
    delta_K: int
    f: int

    @property
    def order_disc(self) -> int:
        return self.delta_K * self.f * self.f

    @property
    def label(self) -> str:
        return f"disc{self.delta_K}_f{self.f}"


@dataclass(frozen=True)
class PhiDelta:
    """phi and delta of one order in one parity context.

    When `quarter` is set, delta is delta_int/4 and only has a value at odd
    moduli. `parity` is None for raw parameters that did not come from an order.
    """

    phi: int
    delta_int: int
    quarter: bool = False
    parity: Optional[Parity] = None

    @classmethod
    def raw(cls, delta: int, phi: int) -> "PhiDelta":
        return cls(phi=phi, delta_int=delta)

    def phi_mod(self, m: int) -> Residue:
        return embed_integer(self.phi, m)

    def delta_mod(self, m: int) -> Residue:
        if self.quarter:
            return quarter_mod(self.delta_int, m)
        return embed_integer(self.delta_int, m)

    @property
    def delta_text(self):
        return f"{self.delta_int}/4" if self.quarter else self.delta_int

    def as_dict(self) -> dict:
        return {"phi": self.phi, "delta": self.delta_text}


def _is_squarefree(n: int) -> bool:
    n = abs(n)
    q = 2
    while q * q <= n:
        if n % (q * q) == 0:
            return False
        q += 1
    return True


def is_fundamental(d: int) -> bool:
    if d % 4 == 1:
        return d != 1 and _is_squarefree(d)
    if d % 4 == 0:
        return (d // 4) % 4 in (2, 3) and _is_squarefree(d // 4)
    return False


def validate_order(delta_K: int, f: int) -> OrderParams:
    if delta_K >= 0:
        raise NotImaginary(f"discriminant {delta_K} is not negative")
    if f < 1:
        raise BadConductor(f"conductor {f} is not a positive integer")
    if not is_fundamental(delta_K):
        raise NotFundamental(f"{delta_K} is not a fundamental discriminant")
    return OrderParams(delta_K=delta_K, f=f)


def is_even_discriminant(order: OrderParams) -> bool:
    return order.order_disc % 2 == 0


def phi_delta(order: OrderParams, modulus_parity: Parity) -> PhiDelta:
    disc = order.order_disc
    if disc % 4 == 1 and modulus_parity is Parity.EVEN:
        return PhiDelta(
            phi=order.f,
            delta_int=(order.delta_K - 1) * order.f * order.f // 4,
            parity=modulus_parity,
        )
    if disc % 4 == 0:
        return PhiDelta(phi=0, delta_int=disc // 4, parity=modulus_parity)
    return PhiDelta(phi=0, delta_int=disc, quarter=True, parity=modulus_parity)


def fundamental_discriminants(lo: int, hi: int) -> list[int]:
    """Negative fundamental discriminants in [lo, hi], ascending."""
    return [d for d in range(lo, min(hi, -1) + 1) if is_fundamental(d)]
