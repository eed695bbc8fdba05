"""Serialize frequency tables as CSV, JSON or a plain-text pair table."""
from __future__ import annotations

import csv
import io
import json

from .simulate import FrequencyTable


def _fmt(x: float) -> str:
    return f"{x:.4f}"


def _csv(table: FrequencyTable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["tree", "partner", "count", "percent", "pair_percent"])
    for key in sorted(table.rows):
        row = table.rows[key]
        w.writerow([key, row.partner, row.count, _fmt(table.percent(key)),
                    _fmt(table.pair_percent(key))])
    return buf.getvalue()


def _json(table: FrequencyTable) -> str:
    doc = {
        "n": table.n,
        "policy": table.policy.value,
        "samples": table.samples,
        "seed": table.seed,
        "strict_ties": table.strict_ties,
        "rows": [
            {"tree": k, "partner": table.rows[k].partner, "count": table.rows[k].count,
             "percent": round(table.percent(k), 4), "pair_percent": round(table.pair_percent(k), 4)}
            for k in sorted(table.rows)
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def _text(table: FrequencyTable) -> str:
    seen = set()
    pairs = []
    for key in sorted(table.rows):
        row = table.rows[key]
        if key in seen:
            continue
        seen.update((key, row.partner))
        pairs.append((key, row.partner))
    w = max(len(k) for k in table.rows)
    head = f"{table.n} taxa, policy={table.policy.value}, samples={table.samples}, seed={table.seed}"
    lines = [head, f"{'tree':<{w}}  {'percent':>8}  ||  {'tree':<{w}}  {'percent':>8}  |  pair"]
    for a, b in pairs:
        lines.append(f"{a:<{w}}  {_fmt(table.percent(a)):>8}  ||  {b:<{w}}  "
                     f"{_fmt(table.percent(b)):>8}  |  {_fmt(table.pair_percent(a))}")
    return "\n".join(lines) + "\n"


def emit_report(table: FrequencyTable, format: str = "csv") -> bytes:
    try:
        render = {"csv": _csv, "json": _json, "text": _text}[format]
    except KeyError:
        raise ValueError(f"unknown report format {format!r}") from None
    return render(table).encode("utf-8")
