"""Report rows and their CSV / JSON serialization.

Numbers are written in full precision except the observed
``failure_rate``, which always has six decimals. An absent bound is an
empty CSV field or JSON ``null``.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, fields

HEADER = (
    "model,n,ell,params,adversary,trials,failures,wrong_outputs,"
    "fail_outputs,failure_rate,bound,mean_bits,max_bits,seed"
).split(",")


@dataclass(frozen=True)
class ReportRow:
    model: str
    n: int
    ell: int
    params: str
    adversary: str
    trials: int
    failures: int
    wrong_outputs: int
    fail_outputs: int
    bound: float | None
    mean_bits: float
    max_bits: int
    seed: int

    @property
    def failure_rate(self) -> float:
        return self.failures / self.trials if self.trials else 0.0


def _rate(x: float) -> str:
    return f"{x:.6f}"


def _csv_cells(row: ReportRow) -> list[str]:
    values = {f.name: getattr(row, f.name) for f in fields(row)}
    values["failure_rate"] = _rate(row.failure_rate)
    values["bound"] = "" if row.bound is None else repr(float(row.bound))
    values["mean_bits"] = repr(float(row.mean_bits))
    cells = [str(values[h]) for h in HEADER]
    for cell in cells:
        # csv leaves a bare CR unquoted under "\n" line endings and cannot write NUL
        if "\r" in cell or "\x00" in cell:
            raise ValueError(f"report field {cell!r} contains a control character")
    return cells


def _json_object(row: ReportRow) -> str:
    parts = []
    for key in HEADER:
        if key == "failure_rate":
            text = _rate(row.failure_rate)
        elif key == "bound":
            text = "null" if row.bound is None else json.dumps(float(row.bound))
        elif key == "mean_bits":
            text = json.dumps(float(row.mean_bits))
        else:
            text = json.dumps(getattr(row, key))
        parts.append(f'"{key}": {text}')
    return "{" + ", ".join(parts) + "}"


def emit_report(rows: list[ReportRow], fmt: str = "csv") -> bytes:
    if not rows:
        raise ValueError("report needs at least one row")
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(HEADER)
        for row in rows:
            writer.writerow(_csv_cells(row))
        return buf.getvalue().encode()
    if fmt == "json":
        body = ",\n".join("  " + _json_object(r) for r in rows)
        return ("[\n" + body + "\n]\n").encode()
    raise ValueError(f"unknown report format {fmt!r}")


def _row_from_mapping(obj: dict) -> ReportRow:
    bound = obj["bound"]
    return ReportRow(
        model=obj["model"],
        n=int(obj["n"]),
        ell=int(obj["ell"]),
        params=obj["params"],
        adversary=obj["adversary"],
        trials=int(obj["trials"]),
        failures=int(obj["failures"]),
        wrong_outputs=int(obj["wrong_outputs"]),
        fail_outputs=int(obj["fail_outputs"]),
        bound=None if bound in (None, "") else float(bound),
        mean_bits=float(obj["mean_bits"]),
        max_bits=int(obj["max_bits"]),
        seed=int(obj["seed"]),
    )


def parse_report(data: bytes | str, fmt: str = "json") -> list[ReportRow]:
    text = data.decode() if isinstance(data, bytes) else data
    if fmt == "json":
        return [_row_from_mapping(obj) for obj in json.loads(text)]
    if fmt == "csv":
        reader = csv.DictReader(io.StringIO(text, newline=""))
        if reader.fieldnames != HEADER:
            raise ValueError(f"unexpected CSV header {reader.fieldnames}")
        return [_row_from_mapping(rec) for rec in reader]
    raise ValueError(f"unknown report format {fmt!r}")
