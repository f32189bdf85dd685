import os
import json
import logging


def setup_logging(verbose=False):
    level = logging.DEBUG if verbose else logging.WARNING
    logging.basicConfig(
        level=level,
        format="%(asctime)s - %(levelname)s - %(name)s - %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
    )


def log_path(p, params_key, base_dir="logs"):
    return os.path.join(base_dir, f"p{p}", params_key, "logs.json")


def save_log(command, p, params_key, report, base_dir="logs"):
    """Save a report to <base_dir>/p<p>/<params_key>/logs.json without overwriting other commands."""

    log_file_path = log_path(p, params_key, base_dir)
    os.makedirs(os.path.dirname(log_file_path), exist_ok=True)

    # Load existing log file or initialize new
    if os.path.exists(log_file_path):
        with open(log_file_path, "r", encoding="utf-8") as f:
            try:
                log_data = json.load(f)
            except json.JSONDecodeError:
                log_data = {}
    else:
        log_data = {}

    log_data.setdefault("params_key", params_key)
    log_data.setdefault("p", p)
    log_data[command] = report

    with open(log_file_path, "w", encoding="utf-8") as f:
        json.dump(log_data, f, indent=4)

    return log_file_path
