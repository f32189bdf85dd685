import json
import os

import pytest

from cartan.cmparams import OrderParams, PhiDelta
from cartan.entangle import Tower, verify_tower
from cartan.errors import EntangleError
from catalog.orders import list_orders, lookup_order
from export import (
    CHECK_CSV_FIELDS,
    REPORT_PREFIX,
    build_log_sections,
    check_rows,
    csv_text,
    dumps_json,
    export_to_html,
    report_to_dict,
)
from logger import log_path, save_log
from utils.config import BUDGET_ENV, DEFAULTS, closure_cap, load_config


@pytest.fixture(scope="module")
def gaussian_report():
    tower = Tower.full_normalizer(2, PhiDelta.raw(-4, 0), n_top=4)
    return report_to_dict({"p": 2, "phi": 0, "delta": -4}, verify_tower(tower, 1, 3))


def test_report_schema(gaussian_report):
    assert list(gaussian_report) == ["params", "levels", "n0"]
    assert gaussian_report["n0"] == 2
    assert list(gaussian_report["levels"][0]) == [
        "n", "kernel_size", "in_sl2", "witness", "lift_well_defined", "lift_surjective",
        "diagram_commutes", "group_order", "lift_image_size", "lift_kernel_size", "lift_failure",
    ]


def test_json_is_stable(gaussian_report):
    text = dumps_json(gaussian_report)
    assert text == dumps_json(json.loads(text))
    assert '"matrix": "3,0,0,1"' in text


def test_csv_rows(gaussian_report):
    lines = csv_text(check_rows(gaussian_report), CHECK_CSV_FIELDS).splitlines()
    assert lines[0] == ",".join(CHECK_CSV_FIELDS)
    assert lines[1] == "2,1,8,false,\"3,0,0,1\",3,false,false,false,2,,,2"
    assert len(lines) == 4


def test_save_log_merges_commands(tmp_path, gaussian_report):
    base = str(tmp_path / "logs")
    path = save_log("check", 2, "delta-4_phi0", gaussian_report, base_dir=base)
    assert path == log_path(2, "delta-4_phi0", base)
    save_log("tower", 2, "delta-4_phi0", gaussian_report, base_dir=base)
    with open(path, encoding="utf-8") as f:
        data = json.load(f)
    assert set(data) == {"params_key", "p", "check", "tower"}


def test_export_html(tmp_path, gaussian_report):
    logs, reports = str(tmp_path / "logs"), str(tmp_path / "reports")
    save_log("check", 2, "delta-4_phi0", gaussian_report, base_dir=logs)
    sections = build_log_sections(logs)
    assert [s["title"] for s in sections] == ["check p2 delta-4_phi0"]
    assert sections[0]["n_max"] == 3

    path = export_to_html(logs, reports)
    assert os.path.basename(path).startswith(REPORT_PREFIX)
    with open(path, encoding="utf-8") as f:
        html = f.read()
    assert "Cartan Tower Entanglement Report" in html
    assert "3,0,0,1" in html


def test_export_without_logs(tmp_path):
    path = export_to_html(str(tmp_path / "missing"), str(tmp_path / "reports"))
    with open(path, encoding="utf-8") as f:
        assert "No saved runs found" in f.read()


def test_catalog():
    assert lookup_order("32a3") == OrderParams(-4, 2)
    assert [row["label"] for row in list_orders()] == ["32a3", "E-4,1", "E-4,2"]
    with pytest.raises(EntangleError):
        lookup_order("11a1")


def test_config_defaults(tmp_path, monkeypatch):
    monkeypatch.delenv(BUDGET_ENV, raising=False)
    assert load_config(str(tmp_path / "none.json")) == DEFAULTS
    assert closure_cap() == 2**24


def test_config_file_and_env(tmp_path, monkeypatch):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"n_max": 3}), encoding="utf-8")
    monkeypatch.setenv(BUDGET_ENV, "500")
    config = load_config(str(path))
    assert (config["n_max"], config["closure_cap"]) == (3, 500)


@pytest.mark.parametrize("value", ["lots", "0"])
def test_config_bad_budget(monkeypatch, value):
    monkeypatch.setenv(BUDGET_ENV, value)
    with pytest.raises(EntangleError):
        load_config()
