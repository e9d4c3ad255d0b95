"""Machine-readable reports with byte-stable serialization.

Rows are sorted by check id and floats go through repr (shortest
round-trip), so identical (config, seed, version) runs emit identical
bytes.
"""

from __future__ import annotations

import csv
import io
import json

from . import __version__

CSV_FIELDS = ("check_id", "tag", "inputs", "value", "threshold", "passed")


def build_report(suite, rows, config_echo, scenario_digests):
    rows = sorted(rows, key=lambda r: r.check_id)
    failing = [r.check_id for r in rows if not r.passed]
    return {
        "tool": {"name": "jetcalc", "version": __version__},
        "suite": suite,
        "config": config_echo,
        "scenarios": scenario_digests,
        "rows": [
            {
                "check_id": r.check_id,
                "tag": r.tag,
                "inputs": r.inputs,
                "value": repr(float(r.value)),
                "threshold": repr(float(r.threshold)),
                "passed": bool(r.passed),
            }
            for r in rows
        ],
        "summary": {
            "total": len(rows),
            "passed": len(rows) - len(failing),
            "failed": len(failing),
            "failing_ids": failing,
        },
    }


def report_json(report):
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def report_csv(report):
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for row in report["rows"]:
        writer.writerow({k: row[k] for k in CSV_FIELDS})
    return buf.getvalue()


def emit_report(report, fmt, path):
    text = report_json(report) if fmt == "json" else report_csv(report)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path
