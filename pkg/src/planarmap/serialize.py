"""Deterministic CSV and JSON emitters.

Identical inputs must produce byte-identical files: floats are printed
with 17 significant digits (lossless for binary64), JSON keys are
sorted, line endings are LF, and nothing timestamped is written.
"""

from __future__ import annotations

import dataclasses
import json
import math

import numpy as np

SCHEMA_VERSION = 1

__all__ = [
    "SCHEMA_VERSION",
    "fmt_float",
    "write_csv",
    "write_json",
    "jsonable",
    "polyline_set_rows",
    "certificate_payload",
    "report_payload",
]


def fmt_float(x: float) -> str:
    return f"{float(x):.17g}"


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return fmt_float(value)


def write_csv(path, header, rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_cell(v) for v in row))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def jsonable(obj):
    """Recursively convert to JSON-safe values; non-finite floats become strings."""
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, tuple) and hasattr(obj, "_fields"):  # NamedTuple
        return [jsonable(v) for v in obj]
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj, key=repr) if isinstance(obj, (set, frozenset)) else obj
        return [jsonable(v) for v in items]
    return repr(obj)


def write_json(path, payload: dict) -> None:
    body = {"schema_version": SCHEMA_VERSION}
    body.update(payload)
    text = json.dumps(jsonable(body), sort_keys=True, indent=2, allow_nan=False)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text + "\n")


def polyline_set_rows(ps) -> list[tuple]:
    """One row per vertex: (polyline-id, x, y); cloud points use id "cloud"."""
    rows: list[tuple] = []
    for k, pl in enumerate(ps.polylines):
        for x, y in pl.points:
            rows.append((k, float(x), float(y)))
    for x, y in ps.cloud:
        rows.append(("cloud", float(x), float(y)))
    return rows


def certificate_payload(cert) -> dict:
    """SequenceCertificate fields with the verdict under the key "pass"."""
    body = {f.name: jsonable(getattr(cert, f.name))
            for f in dataclasses.fields(cert)}
    body["pass"] = body.pop("passed")
    return {"certificate": body}


def _lift_summary(lift, csv_name: str | None = None) -> dict:
    out = {
        "status": lift.status,
        "max_residual": jsonable(lift.max_residual),
        "n_vertices": 0 if lift.lifted is None else len(lift.lifted),
        "start": jsonable(lift.start),
        "end": jsonable(lift.end),
        "min_separation_from_others": jsonable(lift.min_separation_from_others),
    }
    if csv_name is not None:
        out["csv"] = csv_name
    return out


def _scan_summary(scan) -> dict:
    return {
        "w0": jsonable(scan.w0),
        "eps": scan.eps,
        "valence": scan.valence,
        "valence_infinite": scan.infinite_valence.infinite,
        "fs_distance": jsonable(scan.fs_distance),
        "w0_in_fs": scan.w0_in_fs,
        "nowhere_dense_ok": scan.nowhere_dense_ok,
        "has_interior_block": scan.has_interior_block,
        "component_count": scan.component_count,
        "ulac_score": scan.ulac_score,
        "probe_stats": jsonable(scan.probe_stats),
        "notes": list(scan.notes),
    }


def report_payload(report, endcut_csv: str | None = None,
                   lift_csv: str | None = None) -> dict:
    """Bounded JSON body for an AsymptoteReport.

    Heavy geometry (partition cloud, component grid, full lift vertex
    lists) lives in sibling CSV files; the JSON carries the verdict, the
    stage summaries and the audit schedule.
    """
    body: dict = {
        "w0": jsonable(report.w0),
        "verdict": report.verdict,
        "precondition_findings": list(report.precondition_findings),
        "sequence": jsonable(report.sequence),
        "component_label": report.component_label,
        "end_cut_status": report.end_cut_status,
        "escape_radii": jsonable(report.escape_radii),
        "diagnostics": jsonable(report.diagnostics),
    }
    if report.scan is not None:
        body["scan"] = _scan_summary(report.scan)
    if report.refined is not None:
        body["refined"] = {
            "points": jsonable(report.refined.points),
            "indices": jsonable(report.refined.indices),
            "eps_n": jsonable(report.refined.eps_n),
            "margins": jsonable(report.refined.margins),
            "margin_floor": jsonable(report.refined.margin_floor),
        }
    if report.schedule is not None:
        body["schedule"] = jsonable(report.schedule)
    if report.end_cut is not None:
        body["end_cut"] = {
            "n_vertices": len(report.end_cut),
            "first": jsonable(report.end_cut.first),
            "last": jsonable(report.end_cut.last),
            "diameter": jsonable(report.end_cut.diameter()),
        }
        if endcut_csv is not None:
            body["end_cut"]["csv"] = endcut_csv
    if report.lifts:
        body["lifts"] = [_lift_summary(lf) for lf in report.lifts]
    if report.chosen_lift is not None:
        body["chosen_lift"] = _lift_summary(report.chosen_lift, lift_csv)
    return {"report": body}
