import json
import os

from cartan.errors import EntangleError

CONFIG_FILE = os.path.join(os.path.dirname(__file__), "entangle_config.json")

BUDGET_ENV = "ENTANGLE_BUDGET"

DEFAULTS = {
    "closure_cap": 2**24,
    "n_max": 6,
    "workers": 1,
    "logs_dir": "logs",
    "reports_dir": "reports",
}


def load_config(path=CONFIG_FILE):
    """Defaults, overlaid with the JSON config file, overlaid with ENTANGLE_BUDGET."""
    config = dict(DEFAULTS)
    if os.path.exists(path):
        with open(path, "r", encoding="utf-8") as f:
            config.update(json.load(f))

    budget = os.environ.get(BUDGET_ENV)
    if budget is not None:
        try:
            config["closure_cap"] = int(budget)
        except ValueError:
            raise EntangleError(f"{BUDGET_ENV} must be an integer, got {budget!r}") from None
        if config["closure_cap"] < 1:
            raise EntangleError(f"{BUDGET_ENV} must be positive, got {budget!r}")
    return config


def closure_cap():
    return load_config()["closure_cap"]
