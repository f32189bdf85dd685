"""Kernel verdicts over every CM order in a discriminant/conductor box."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Optional

from cartan.cmparams import OrderParams, Parity, fundamental_discriminants, phi_delta, validate_order
from cartan.entangle import Tower, kernel_report, least_n0

SCAN_CSV_FIELDS = [
    "delta_K", "f", "order_disc", "p", "phi_mod", "delta_mod", "n",
    "kernel_size", "in_sl2", "witness", "witness_det", "n0",
]


@dataclass(frozen=True)
class ScanRow:
    delta_K: int
    f: int
    order_disc: int
    p: int
    phi_mod: int
    delta_mod: int
    n: int
    kernel_size: int
    in_sl2: bool
    witness: Optional[str] = None
    witness_det: Optional[int] = None
    n0: Optional[int] = None

    def sort_key(self):
        return (self.order_disc, self.p, self.n)

    def as_dict(self):
        return asdict(self)


def scan_order(order: OrderParams, p: int, n_max: int, cap: Optional[int] = None) -> list[ScanRow]:
    params = phi_delta(order, Parity.of(p))
    tower = Tower.full_normalizer(p, params, n_top=n_max + 1, cap=cap)
    reports = [kernel_report(tower, n) for n in range(1, n_max + 1)]
    n0 = least_n0({r.n: r.in_sl2 for r in reports})

    rows = []
    for r in reports:
        m = tower.modulus(r.n + 1)
        rows.append(ScanRow(
            delta_K=order.delta_K,
            f=order.f,
            order_disc=order.order_disc,
            p=p,
            phi_mod=params.phi_mod(m).value,
            delta_mod=params.delta_mod(m).value,
            n=r.n,
            kernel_size=r.size,
            in_sl2=r.in_sl2,
            witness=None if r.witness is None else str(r.witness),
            witness_det=r.witness_det,
            n0=n0,
        ))
    return rows


def _scan_task(task):
    delta_K, f, p, n_max, cap = task
    return scan_order(validate_order(delta_K, f), p, n_max, cap)


def scan_orders(disc_min: int, disc_max: int, f_max: int, p: int, n_max: int,
                workers: int = 1, cap: Optional[int] = None) -> list[ScanRow]:
    tasks = [
        (d, f, p, n_max, cap)
        for d in fundamental_discriminants(disc_min, disc_max)
        for f in range(1, f_max + 1)
    ]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            batches = list(executor.map(_scan_task, tasks))
    else:
        batches = [_scan_task(task) for task in tasks]

    rows = [row for batch in batches for row in batch]
    return sorted(rows, key=ScanRow.sort_key)
