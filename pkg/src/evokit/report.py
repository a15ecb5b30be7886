"""Run reports: JSON document plus CSV tables, with timing kept separately."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .errors import IoError, SchemaError

REPORT_VERSION = 1
ERROR_COLUMNS = ("lambda", "t", "order", "frob_error")
RESIDUAL_COLUMNS = ("order", "t", "residual")


def encode_complex(z) -> list:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def encode_matrix(M) -> list:
    M = np.asarray(M, dtype=complex)
    return [[encode_complex(x) for x in row] for row in M]


def decode_matrix(rows) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in rows], dtype=complex)


@dataclass
class RunReport:
    command: str
    mode: str | None = None
    order: int | None = None
    config: dict = field(default_factory=dict)
    coefficients: list = field(default_factory=list)
    evolutors: list = field(default_factory=list)
    errors: list = field(default_factory=list)
    verdicts: list = field(default_factory=list)
    residuals: list = field(default_factory=list)
    results: dict = field(default_factory=dict)
    timing: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        """The persisted document (timing excluded; it goes to a side file)."""
        doc = {"schema_version": REPORT_VERSION}
        for f in fields(self):
            if f.name != "timing":
                doc[f.name] = getattr(self, f.name)
        return json.loads(json.dumps(doc))

    @classmethod
    def from_dict(cls, doc: dict) -> "RunReport":
        if doc.get("schema_version") != REPORT_VERSION:
            raise SchemaError("schema_version", f"expected report version {REPORT_VERSION}")
        kwargs = {f.name: doc[f.name] for f in fields(cls) if f.name in doc and f.name != "timing"}
        if "command" not in kwargs:
            raise SchemaError("command", "required field is missing")
        return cls(**kwargs)


def _csv_text(rows: list, columns) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([repr(row[c]) if isinstance(row[c], float) else row[c] for c in columns])
    return buf.getvalue()


def render(report: RunReport) -> dict[str, str]:
    """File name -> content for every persisted artefact except timing."""
    return {
        "report.json": json.dumps(report.to_dict(), indent=2) + "\n",
        "errors.csv": _csv_text(report.errors, ERROR_COLUMNS),
        "residuals.csv": _csv_text(report.residuals, RESIDUAL_COLUMNS),
    }


def write_results(report: RunReport, path) -> list[Path]:
    """Write report.json, errors.csv, residuals.csv (and timing.json) into directory ``path``."""
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
        written = []
        for name, text in render(report).items():
            p = out / name
            p.write_text(text)
            written.append(p)
        if report.timing:
            p = out / "timing.json"
            p.write_text(json.dumps(report.timing, indent=2) + "\n")
            written.append(p)
        return written
    except OSError as exc:
        raise IoError(f"cannot write results to {out}: {exc}") from exc


def read_report(path) -> RunReport:
    p = Path(path)
    if p.is_dir():
        p = p / "report.json"
    try:
        doc = json.loads(p.read_text())
    except OSError as exc:
        raise IoError(f"cannot read {p}: {exc}") from exc
    return RunReport.from_dict(doc)


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
