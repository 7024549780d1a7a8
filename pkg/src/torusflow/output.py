"""Trace CSV and report JSON writers (and their readers for round trips)."""

from __future__ import annotations

import json

from .integrate import NormTrace

__all__ = [
    "CSV_HEADER",
    "write_trace_csv",
    "read_trace_csv",
    "write_report_json",
    "read_report_json",
]

CSV_HEADER = "t,a0,a2,a4,a6,mean,dt"


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_trace_csv(trace: NormTrace, path) -> None:
    """One row per trace sample, %.17g, header exactly CSV_HEADER."""
    lines = [CSV_HEADER]
    for row in trace.rows():
        lines.append(",".join(_fmt(v) for v in row))
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def read_trace_csv(path) -> NormTrace:
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or lines[0] != CSV_HEADER:
        head = lines[0] if lines else ""
        raise ValueError(f"{path}: bad trace header {head!r}, expected {CSV_HEADER!r}")
    rows = []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != 7:
            raise ValueError(f"{path}: malformed trace row {ln!r}")
        rows.append([float(p) for p in parts])
    return NormTrace.from_rows(rows)


def write_report_json(report: dict, path) -> None:
    with open(path, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_report_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)
