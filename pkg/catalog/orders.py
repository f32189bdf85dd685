import json
import os

from cartan.cmparams import OrderParams, validate_order
from cartan.errors import EntangleError

CATALOG_PATH = os.path.join(os.path.dirname(__file__), "orders.json")


def load_catalog(path=CATALOG_PATH):
    """Load the local table of curves and the CM orders they carry."""
    if not os.path.exists(path):
        return {}
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def lookup_order(label, path=CATALOG_PATH) -> OrderParams:
    entry = load_catalog(path).get(label)
    if entry is None:
        raise EntangleError(f"unknown curve label {label!r}")
    return validate_order(entry["delta_K"], entry["f"])


def list_orders(path=CATALOG_PATH):
    rows = []
    for label, entry in sorted(load_catalog(path).items()):
        order = validate_order(entry["delta_K"], entry["f"])
        rows.append({
            "label": label,
            "delta_K": order.delta_K,
            "f": order.f,
            "order_disc": order.order_disc,
            "equation": entry.get("equation", ""),
            "note": entry.get("note", ""),
        })
    return rows
