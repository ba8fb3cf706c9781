"""Biomarker report schema, serialization, and CSV flattening.

A report is a nested ordered mapping whose metric leaves all share one
shape: {"value": v, "status": "ok"} or {"value": null, "status":
"undefined", "reason": code}. Field order is fixed by construction and
floats serialize through repr (shortest round-trip form), so identical
inputs yield byte-identical JSON.
"""

import json

SCHEMA_VERSION = 1
CSV_COLUMNS = ("image_id", "metric", "value", "status", "reason")


def ok(value) -> dict:
    return {"value": value, "status": "ok"}


def undefined(reason: str) -> dict:
    return {"value": None, "status": "undefined", "reason": reason}


def is_leaf(node) -> bool:
    return isinstance(node, dict) and "status" in node


def metric_leaves(report: dict):
    """Yield (dotted_path, leaf) for every metric leaf in schema order."""
    def walk(node, prefix):
        for key, val in node.items():
            path = f"{prefix}.{key}" if prefix else key
            if is_leaf(val):
                yield path, val
            elif isinstance(val, dict):
                yield from walk(val, path)
    yield from walk(report, "")


def count_metrics(report: dict) -> int:
    return sum(1 for _ in metric_leaves(report))


def to_json(report: dict) -> str:
    return json.dumps(report, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def from_json(text: str) -> dict:
    return json.loads(text)


def csv_rows(report: dict) -> list[dict]:
    """Flatten metric leaves to long-form rows; values keep their JSON
    rendering so both formats print numbers identically."""
    image_id = report.get("image_id", "")
    rows = []
    for path, leaf in metric_leaves(report):
        rows.append({
            "image_id": image_id,
            "metric": path,
            "value": json.dumps(leaf["value"], ensure_ascii=False, allow_nan=False),
            "status": leaf["status"],
            "reason": leaf.get("reason", ""),
        })
    return rows
