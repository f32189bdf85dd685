"""Reduction kernels, the determinant lift and the n0 search over towers G(p^n).

The lift G(p^n) -> (Z/p^{n+1}Z)^x sends g to det(g') for any preimage g' of g
one level up. It is called Lambda here; delta is already the Cartan parameter.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Optional, Sequence

from cartan.cmparams import PhiDelta
from cartan.errors import (
    ClosureBudgetExceeded,
    ElementNotInGroup,
    EmptyFiber,
    LiftNotWellDefined,
    MissingLevel,
    ModulusMismatch,
    TowerNotCompatible,
)
from cartan.matgroup import (
    Entries,
    Mat2,
    MatGroup,
    _det,
    _identity,
    _mul,
    _reduce,
    cartan_enumerate,
    closure_from_generators,
    extended_group,
    gamma_matrix,
    witness_key,
)
from cartan.modarith import Residue, require_prime, unit_count
from utils.config import closure_cap

log = logging.getLogger(__name__)


class TowerSource(str, Enum):
    FULL_NORMALIZER = "full_normalizer"
    GENERATED = "generated"


class Tower:
    """Groups G(p^n) for n_min <= n <= n_top.

    Full-normalizer levels are N_{delta,phi}(p^n), built on first use.
    Generated levels are closures of user generators and are checked for
    compatibility with reduction when the tower is created.
    """

    def __init__(self, p: int, n_min: int, n_top: int, source: TowerSource,
                 params: Optional[PhiDelta] = None, cap: Optional[int] = None):
        require_prime(p)
        if n_min < 1 or n_top < n_min:
            raise ValueError(f"bad level range [{n_min}, {n_top}]")
        self.p = p
        self.n_min = n_min
        self.n_top = n_top
        self.source = source
        self.params = params
        self.cap = closure_cap() if cap is None else cap
        self._levels: dict[int, MatGroup] = {}

    @classmethod
    def full_normalizer(cls, p: int, params: PhiDelta, n_top: int, n_min: int = 1,
                        cap: Optional[int] = None) -> "Tower":
        return cls(p, n_min, n_top, TowerSource.FULL_NORMALIZER, params=params, cap=cap)

    @classmethod
    def generated(cls, p: int, generators: Mapping[int, Sequence[Mat2]],
                  cap: Optional[int] = None) -> "Tower":
        if not generators:
            raise MissingLevel("a generated tower needs at least one level")
        ns = sorted(generators)
        if ns != list(range(ns[0], ns[-1] + 1)):
            raise MissingLevel(f"levels {ns} are not contiguous")
        tower = cls(p, ns[0], ns[-1], TowerSource.GENERATED, cap=cap)
        for n in ns:
            tower._levels[n] = closure_from_generators(generators[n], p**n, cap=tower.cap)
        tower.check_compatible()
        return tower

    def modulus(self, n: int) -> int:
        return self.p**n

    def has_level(self, n: int) -> bool:
        return self.n_min <= n <= self.n_top

    def size_bound(self, n: int) -> int:
        if n in self._levels:
            return self._levels[n].order
        return 2 * self.modulus(n) ** 2

    def within_budget(self, n: int) -> bool:
        return self.size_bound(n) <= self.cap

    def level(self, n: int) -> MatGroup:
        if not self.has_level(n):
            raise MissingLevel(f"tower has levels {self.n_min}..{self.n_top}, asked for {n}")
        if n not in self._levels:
            if not self.within_budget(n):
                raise ClosureBudgetExceeded(
                    f"N(p^{n}) for p={self.p} may hold {self.size_bound(n)} elements, cap is {self.cap}"
                )
            m = self.modulus(n)
            cartan = cartan_enumerate(self.params.delta_mod(m), self.params.phi_mod(m), m)
            self._levels[n] = extended_group(cartan)
            log.debug("level %d of p=%d tower: %d elements", n, self.p, self._levels[n].order)
        return self._levels[n]

    def check_compatible(self):
        """Reduction of every level must land inside the level below."""
        for n in range(self.n_min, self.n_top):
            q = self.modulus(n)
            lower = self.level(n).elements
            escaped = [x for x in self.level(n + 1).elements if _reduce(x, q) not in lower]
            if escaped:
                x = min(escaped, key=witness_key)
                raise TowerNotCompatible(
                    f"{Mat2(x, q * self.p)} at level {n + 1} reduces outside level {n}"
                )


def _require_levels(tower: Tower, *ns: int):
    for n in ns:
        if not tower.has_level(n):
            raise MissingLevel(f"tower has levels {tower.n_min}..{tower.n_top}, needs {n}")


@dataclass(frozen=True)
class KernelReport:
    n: int
    p: int
    kernel_elements: frozenset
    in_sl2: bool
    witness: Optional[Mat2] = None
    witness_det: Optional[int] = None

    @property
    def size(self) -> int:
        return len(self.kernel_elements)

    def sorted_elements(self) -> list[Mat2]:
        return sorted(self.kernel_elements, key=lambda x: x.entries)


def _kernel_report(n: int, p: int, entries) -> KernelReport:
    m = p ** (n + 1)
    ordered = sorted(entries, key=witness_key)
    witness = next((x for x in ordered if _det(x, m) != 1), None)
    return KernelReport(
        n=n,
        p=p,
        kernel_elements=frozenset(Mat2(x, m) for x in ordered),
        in_sl2=witness is None,
        witness=None if witness is None else Mat2(witness, m),
        witness_det=None if witness is None else _det(witness, m),
    )


def reduction_kernel(tower: Tower, n: int) -> KernelReport:
    """Elements of G(p^{n+1}) that reduce to the identity mod p^n."""
    _require_levels(tower, n, n + 1)
    q = tower.modulus(n)
    one = _identity(q)
    upper = tower.level(n + 1)
    return _kernel_report(n, tower.p, [x for x in upper.elements if _reduce(x, q) == one])


def kernel_parametrized(delta: Residue, phi: Residue, p: int, n: int) -> frozenset:
    """ker(N(p^{n+1}) -> N(p^n)) without enumerating N.

    The Cartan part is a = 1 + p^n*alpha, b = p^n*beta. gamma*C meets the kernel
    only when gamma is the identity mod p^n, i.e. p = 2, n = 1 and phi even.
    """
    require_prime(p)
    if n < 1:
        raise ValueError(f"level must be at least 1, got {n}")
    m = p ** (n + 1)
    q = p**n
    if delta.modulus != m or phi.modulus != m:
        raise ModulusMismatch(f"parameters must be mod {m}")
    d, f = delta.value, phi.value

    cartan_part = []
    for alpha in range(p):
        for beta in range(p):
            a, b = 1 + q * alpha, q * beta
            cartan_part.append(((a + b * f) % m, b, (b * d) % m, a))

    elements = set(cartan_part)
    gamma = gamma_matrix(phi, m).entries
    if _reduce(gamma, q) == _identity(q):
        elements.update(_mul(gamma, c, m) for c in cartan_part)
    return frozenset(Mat2(x, m) for x in elements)


def kernel_report(tower: Tower, n: int) -> KernelReport:
    """reduction_kernel, or its parametrized twin for full-normalizer levels past the cap."""
    _require_levels(tower, n, n + 1)
    if tower.source is TowerSource.FULL_NORMALIZER and not tower.within_budget(n + 1):
        m = tower.modulus(n + 1)
        log.debug("level %d past the cap, using the parametrized kernel", n + 1)
        kernel = kernel_parametrized(tower.params.delta_mod(m), tower.params.phi_mod(m), tower.p, n)
        return _kernel_report(n, tower.p, [x.entries for x in kernel])
    return reduction_kernel(tower, n)


@dataclass(frozen=True)
class DetLift:
    n: int
    p: int
    table: Mapping[Mat2, Residue]
    well_defined: bool
    surjective: bool
    failure_witness: Optional[tuple[Mat2, Mat2]] = None

    def __call__(self, g: Mat2) -> Residue:
        try:
            return self.table[g]
        except KeyError:
            raise ElementNotInGroup(f"{g} mod {g.modulus} is not in G({self.p}^{self.n})") from None

    @property
    def image(self) -> set[int]:
        return {r.value for r in self.table.values()}


def build_det_lift(tower: Tower, n: int) -> DetLift:
    _require_levels(tower, n, n + 1)
    p = tower.p
    q, m = tower.modulus(n), tower.modulus(n + 1)
    lower = tower.level(n).elements
    upper = tower.level(n + 1).elements

    # least preimage of each g, and the least preimage whose det disagrees with it
    first: dict[Entries, Entries] = {}
    dets: dict[Entries, int] = {}
    clash: dict[Entries, Entries] = {}
    for x in sorted(upper, key=witness_key):
        g = _reduce(x, q)
        d = _det(x, m)
        if g not in first:
            first[g] = x
            dets[g] = d
        elif d != dets[g] and g not in clash:
            clash[g] = x

    empty = lower - first.keys()
    if empty:
        g = min(empty, key=witness_key)
        raise EmptyFiber(f"{Mat2(g, q)} at level {n} has no preimage at level {n + 1}")

    witness = None
    if clash:
        one = _identity(q)
        g = one if one in clash else min(clash, key=witness_key)
        witness = (Mat2(first[g], m), Mat2(clash[g], m))

    table = {Mat2(g, q): Residue(dets[g], m) for g in lower}
    values = {dets[g] for g in lower}
    return DetLift(
        n=n,
        p=p,
        table=table,
        well_defined=not clash,
        surjective=len(values) == unit_count(m),
        failure_witness=witness,
    )


@dataclass(frozen=True)
class DiagramCheck:
    commutes: bool
    counterexample: Optional[Mat2] = None

    def __bool__(self):
        return self.commutes


def check_diagram_commutes(tower: Tower, n: int, lift: DetLift) -> DiagramCheck:
    """det = Lambda o pi on G(p^{n+1}), and Lambda(g) = det(g) mod p^n on G(p^n)."""
    if lift.n != n or lift.p != tower.p:
        raise ValueError("lift was built for another tower or level")
    _require_levels(tower, n, n + 1)
    q, m = tower.modulus(n), tower.modulus(n + 1)

    for x in sorted(tower.level(n + 1).elements, key=witness_key):
        if lift.table[Mat2(_reduce(x, q), q)].value != _det(x, m):
            return DiagramCheck(False, Mat2(x, m))
    for g, value in lift.table.items():
        if value.value % q != _det(g.entries, q):
            return DiagramCheck(False, g)
    return DiagramCheck(True)


def least_n0(verdicts: Mapping[int, bool]) -> Optional[int]:
    """Least n0 with every verdict from n0 to the top level true."""
    n0 = None
    for n in sorted(verdicts, reverse=True):
        if not verdicts[n]:
            break
        n0 = n
    return n0


def n0_search(tower: Tower, n_max: int) -> Optional[int]:
    """Least n0 <= n_max with ker(G(p^{n+1}) -> G(p^n)) in SL2 for n0 <= n <= n_max.

    None means no such n0 up to n_max, not that none exists.
    """
    _require_levels(tower, n_max + 1)
    verdicts = {n: kernel_report(tower, n).in_sl2 for n in range(tower.n_min, n_max + 1)}
    return least_n0(verdicts)


@dataclass(frozen=True)
class DegreeReport:
    n: int
    group_order: int
    image_size: int
    kernel_size: int
    unit_group_order: int

    @property
    def surjective(self) -> bool:
        return self.image_size == self.unit_group_order


def degree_report(tower: Tower, n: int, lift: DetLift) -> DegreeReport:
    if not lift.well_defined:
        raise LiftNotWellDefined(f"Lambda at level {n} depends on the preimage", lift.failure_witness)
    m = tower.modulus(n + 1)
    values = [r.value for r in lift.table.values()]
    return DegreeReport(
        n=n,
        group_order=tower.level(n).order,
        image_size=len(lift.image),
        kernel_size=sum(1 for v in values if v == 1),
        unit_group_order=unit_count(m),
    )


@dataclass(frozen=True)
class LevelReport:
    kernel: KernelReport
    group_order: int
    lift: DetLift
    diagram: DiagramCheck
    degree: Optional[DegreeReport] = None

    def as_dict(self) -> dict:
        kernel = self.kernel
        witness = None
        if kernel.witness is not None:
            witness = {"matrix": str(kernel.witness), "det": kernel.witness_det}
        failure = None
        if self.lift.failure_witness is not None:
            failure = [str(x) for x in self.lift.failure_witness]
        return {
            "n": kernel.n,
            "kernel_size": kernel.size,
            "in_sl2": kernel.in_sl2,
            "witness": witness,
            "lift_well_defined": self.lift.well_defined,
            "lift_surjective": self.lift.surjective,
            "diagram_commutes": self.diagram.commutes,
            "group_order": self.group_order,
            "lift_image_size": None if self.degree is None else self.degree.image_size,
            "lift_kernel_size": None if self.degree is None else self.degree.kernel_size,
            "lift_failure": failure,
        }


@dataclass(frozen=True)
class TowerReport:
    p: int
    levels: list = field(default_factory=list)
    n0: Optional[int] = None


def verify_level(tower: Tower, n: int) -> LevelReport:
    kernel = reduction_kernel(tower, n)
    lift = build_det_lift(tower, n)
    diagram = check_diagram_commutes(tower, n, lift)
    degree = degree_report(tower, n, lift) if lift.well_defined else None
    return LevelReport(kernel, tower.level(n).order, lift, diagram, degree)


def verify_tower(tower: Tower, n_min: int, n_max: int) -> TowerReport:
    """Every check at every level n_min..n_max, plus the n0 those levels give."""
    _require_levels(tower, n_min, n_max + 1)
    levels = [verify_level(tower, n) for n in range(n_min, n_max + 1)]
    n0 = least_n0({r.kernel.n: r.kernel.in_sl2 for r in levels})
    return TowerReport(p=tower.p, levels=levels, n0=n0)
