import csv
import io
import json
import os
from datetime import datetime

import jinja2

REPORT_PREFIX = "Entangle_Report"

CHECK_CSV_FIELDS = [
    "p", "n", "kernel_size", "in_sl2", "witness", "witness_det",
    "lift_well_defined", "lift_surjective", "diagram_commutes",
    "group_order", "lift_image_size", "lift_kernel_size", "n0",
]

TEMPLATE_HTML = """<!DOCTYPE html>
<html>
<head>
    <title>Cartan Tower Entanglement Report</title>
    <meta charset="UTF-8">
    <style>
        body { background-color: #1e1e2e; color: #c0c0c0; font-family: Arial, sans-serif; margin: 20px; }
        h1, h2, h3 { color: #ff9900; }
        .header { display: flex; align-items: center; justify-content: space-between; padding: 20px; background: #292929; }
        .pass { color: green; font-weight: bold; }
        .fail { color: red; font-weight: bold; }
        .nav-links { text-align: center; margin-top: 10px; }
        .nav-links a { margin: 5px; padding: 8px 12px; text-decoration: none; border-radius: 4px; display: inline-block; font-weight: bold; }
        .pass-link { background-color: green; color: white; }
        .fail-link { background-color: red; color: white; }
        table { width: 100%; border-collapse: collapse; background: #2b2b3b; margin-top: 10px; }
        th, td { border: 1px solid #444; padding: 8px; text-align: left; font-family: 'Courier New', monospace; }
        th { background: #333; color: #ffcc00; }
        tr.fail-row td { background: #3b2323; }
    </style>
</head>
<body>
<div class="header">
    <h1>Cartan Tower Entanglement Report</h1>
    <span>Generated {{ generated }}</span>
</div>

<div class="nav-links">
{% for section in sections %}
    <a href="#{{ section.anchor }}" class="{{ 'pass-link' if section.n0 is not none else 'fail-link' }}">{{ section.title }}</a>
{% endfor %}
</div>

{% if not sections %}
<p style="text-align: center; color: #999;">No saved runs found. Run check or tower with --save-log first.</p>
{% endif %}

{% for section in sections %}
<h2 id="{{ section.anchor }}">{{ section.title }}</h2>
<p>
    Parameters: <code>{{ section.params | tojson }}</code><br>
    n0:
    {% if section.n0 is not none %}
        <span class="pass">{{ section.n0 }}</span>
    {% else %}
        <span class="fail">none up to n = {{ section.n_max }}</span>
    {% endif %}
</p>
<table>
    <thead>
        <tr>
            <th>n</th><th>|G(p^n)|</th><th>|kernel|</th><th>kernel in SL2</th><th>witness</th>
            <th>lift well-defined</th><th>lift surjective</th><th>diagram</th><th>|image|</th><th>|ker lift|</th>
        </tr>
    </thead>
    <tbody>
    {% for level in section.levels %}
        <tr class="{{ '' if level.in_sl2 else 'fail-row' }}">
            <td>{{ level.n }}</td>
            <td>{{ level.group_order }}</td>
            <td>{{ level.kernel_size }}</td>
            <td class="{{ 'pass' if level.in_sl2 else 'fail' }}">{{ '✅' if level.in_sl2 else '❌' }}</td>
            <td>{% if level.witness %}{{ level.witness.matrix }} (det {{ level.witness.det }}){% endif %}</td>
            <td class="{{ 'pass' if level.lift_well_defined else 'fail' }}">{{ '✅' if level.lift_well_defined else '❌' }}</td>
            <td>{{ '✅' if level.lift_surjective else '❌' }}</td>
            <td>{{ '✅' if level.diagram_commutes else '❌' }}</td>
            <td>{{ level.lift_image_size if level.lift_image_size is not none else '' }}</td>
            <td>{{ level.lift_kernel_size if level.lift_kernel_size is not none else '' }}</td>
        </tr>
    {% endfor %}
    </tbody>
</table>
{% endfor %}
</body>
</html>
"""


def report_to_dict(params, report):
    return {
        "params": params,
        "levels": [level.as_dict() for level in report.levels],
        "n0": report.n0,
    }


def dumps_json(data):
    return json.dumps(data, indent=4, ensure_ascii=False)


def _cell(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return ""
    return value


def check_rows(data):
    """Flatten a report dict into one CSV row per level."""
    rows = []
    for level in data["levels"]:
        witness = level["witness"] or {}
        row = dict(level)
        row["p"] = data["params"]["p"]
        row["witness"] = witness.get("matrix")
        row["witness_det"] = witness.get("det")
        row["n0"] = data["n0"]
        rows.append(row)
    return rows


def write_csv(rows, fields, f):
    writer = csv.DictWriter(f, fieldnames=fields, extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({key: _cell(row.get(key)) for key in fields})


def csv_text(rows, fields):
    buf = io.StringIO()
    write_csv(rows, fields, buf)
    return buf.getvalue()


def build_log_sections(logs_dir="logs"):
    """Collect every saved check/tower report under logs_dir, in a stable order."""
    sections = []
    if not os.path.exists(logs_dir):
        return sections

    for prime_dir in sorted(os.listdir(logs_dir)):
        prime_path = os.path.join(logs_dir, prime_dir)
        if not os.path.isdir(prime_path):
            continue
        for params_key in sorted(os.listdir(prime_path)):
            log_file = os.path.join(prime_path, params_key, "logs.json")
            if not os.path.exists(log_file):
                continue
            try:
                with open(log_file, "r", encoding="utf-8") as f:
                    log_data = json.load(f)
            except (OSError, json.JSONDecodeError) as e:
                print(f"❌ Error loading {log_file}: {e}")
                continue

            for command in ("check", "tower"):
                data = log_data.get(command)
                if not isinstance(data, dict) or "levels" not in data:
                    continue
                levels = data["levels"]
                sections.append({
                    "anchor": f"{prime_dir}-{params_key}-{command}",
                    "title": f"{command} {prime_dir} {params_key}",
                    "params": data.get("params", {}),
                    "levels": levels,
                    "n0": data.get("n0"),
                    "n_max": max((level["n"] for level in levels), default=None),
                })
    return sections


def export_to_html(logs_dir="logs", reports_dir="reports"):
    sections = build_log_sections(logs_dir)
    os.makedirs(reports_dir, exist_ok=True)

    timestamp = datetime.now().strftime("%Y%m%d-%H%M%S")
    report_path = os.path.join(reports_dir, f"{REPORT_PREFIX}_{timestamp}.html")

    template = jinja2.Template(TEMPLATE_HTML)
    html_output = template.render(sections=sections, generated=timestamp)

    with open(report_path, "w", encoding="utf-8") as f:
        f.write(html_output)
    return report_path
