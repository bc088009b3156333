"""Verification records and their CSV form.

A report is a list of rows, each recording one tested inequality
``lhs <= rhs`` (up to the stated tolerance) together with the Monte Carlo
budget that produced it.  Floats are written with ``repr`` so a rerun with the
same seeds reproduces the file byte for byte.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .exceptions import ConfigError

__all__ = ["ReportRow", "EstimateReport", "summarize", "REPORT_HEADER", "COLUMNS"]

REPORT_HEADER = "# levysmooth estimate-report v1"
COLUMNS = ("check", "model", "f", "x", "t", "lhs", "rhs", "se", "tol", "pass", "n_paths", "seed",
           "note")


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (tuple, list, np.ndarray)):
        return ";".join(_fmt(u) for u in np.ravel(v))
    return "" if v is None else str(v)


@dataclass(frozen=True)
class ReportRow:
    """One tested inequality ``lhs <= rhs``.

    ``x`` is a float, a coordinate tuple or ``None`` for global checks; ``se``
    is the Monte Carlo standard error of ``lhs - rhs`` (0 for deterministic
    rows) and ``tol`` the allowance that was added to ``rhs``.
    """

    check: str
    model: str
    f: str
    x: object
    t: object
    lhs: float
    rhs: float
    se: float = 0.0
    tol: float = 0.0
    passed: bool = True
    n_paths: int = 0
    seed: str = ""
    note: str = ""

    def as_strings(self):
        vals = asdict(self)
        vals["pass"] = vals.pop("passed")
        return [_fmt(vals[c]) for c in COLUMNS]


@dataclass
class EstimateReport:
    """Ordered collection of :class:`ReportRow` for one suite."""

    name: str
    rows: list = field(default_factory=list)

    def add(self, **kwargs):
        row = ReportRow(**kwargs)
        self.rows.append(row)
        return row

    def extend(self, other):
        self.rows.extend(other.rows)
        return self

    @property
    def passed(self):
        return all(r.passed for r in self.rows)

    def failures(self):
        return [r for r in self.rows if not r.passed]

    def to_csv(self, fh=None):
        out = io.StringIO() if fh is None else fh
        out.write(f"{REPORT_HEADER}\n# suite={self.name}\n")
        w = csv.writer(out, lineterminator="\n")
        w.writerow(COLUMNS)
        for r in self.rows:
            w.writerow(r.as_strings())
        return out.getvalue() if fh is None else None

    def save(self, path):
        with open(path, "w", newline="") as fh:
            self.to_csv(fh)

    @classmethod
    def from_csv(cls, source):
        text = Path(source).read_text() if not _looks_like_csv(source) else source
        lines = text.splitlines()
        if not lines or lines[0] != REPORT_HEADER:
            raise ConfigError("not a levysmooth estimate-report v1 file")
        name = ""
        body = []
        for ln in lines[1:]:
            if ln.startswith("# suite="):
                name = ln[len("# suite="):]
            elif not ln.startswith("#"):
                body.append(ln)
        reader = csv.reader(body)
        head = next(reader, None)
        if tuple(head or ()) != COLUMNS:
            raise ConfigError(f"report columns {head} do not match {COLUMNS}")
        rows = []
        for line, rec in enumerate(reader, start=1):
            if len(rec) != len(COLUMNS):
                raise ConfigError(f"report row {line} has {len(rec)} fields, expected {len(COLUMNS)}")
            d = dict(zip(COLUMNS, rec))
            try:
                rows.append(_row(d))
            except ValueError as exc:
                raise ConfigError(f"report row {line}: {exc}") from exc
        return cls(name, rows)


def _row(d):
    return ReportRow(
        check=d["check"], model=d["model"], f=d["f"], x=_parse_x(d["x"]), t=_parse_x(d["t"]),
        lhs=float(d["lhs"]), rhs=float(d["rhs"]), se=float(d["se"]), tol=float(d["tol"]),
        passed=d["pass"] == "1", n_paths=int(d["n_paths"] or 0), seed=d["seed"], note=d["note"])


def _looks_like_csv(source):
    return isinstance(source, str) and source.startswith(REPORT_HEADER)


def _parse_x(s):
    if s == "":
        return None
    parts = s.split(";")
    try:
        vals = tuple(float(p) for p in parts)
    except ValueError:
        return s
    return vals[0] if len(vals) == 1 else vals


def summarize(reports):
    """Per-check pass counts; a pure function of the report rows.

    Returns
    -------
    text : str
        One line per ``(suite, check)`` plus an overall line.
    ok : bool
    """
    lines = []
    ok = True
    for rep in reports:
        groups = {}
        for r in rep.rows:
            g = groups.setdefault(r.check, [0, 0])
            g[0] += r.passed
            g[1] += 1
        for check, (npass, ntot) in groups.items():
            status = "PASS" if npass == ntot else "FAIL"
            ok &= npass == ntot
            lines.append(f"{status} {rep.name}/{check}: {npass}/{ntot} rows")
        if not rep.rows:
            lines.append(f"PASS {rep.name}: no rows")
    lines.append(f"overall: {'PASS' if ok else 'FAIL'}")
    return "\n".join(lines) + "\n", ok
