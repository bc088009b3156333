"""Standalone SVG line plots for report CSV files.

Three inputs are recognized by their header line: gradient profiles (log-log
curve with the fitted slope), modulus files (measured modulus with the
fitted theory curve) and estimate reports (``lhs`` and ``rhs`` per row).
Output is plain SVG text with fixed number formatting, so equal input gives
equal bytes.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from .exceptions import ConfigError
from .reports import REPORT_HEADER, EstimateReport

__all__ = ["svg_line_plot", "plot_csv"]

_W, _H = 640, 420
_ML, _MR, _MT, _MB = 70, 20, 40, 50
_COLORS = ("#1f4e9c", "#c0392b", "#2e8b57", "#8e44ad")


def _esc(s):
    return str(s).replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _range(vals, log):
    v = np.asarray([x for x in vals if np.isfinite(x) and (x > 0 or not log)], dtype=float)
    if v.size == 0:
        return (0.0, 1.0) if not log else (0.0, 1.0)
    if log:
        v = np.log10(v)
    lo, hi = float(v.min()), float(v.max())
    if hi - lo < 1e-12:
        lo, hi = lo - 0.5, hi + 0.5
    pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


def svg_line_plot(series, *, title="", xlabel="", ylabel="", logx=False, logy=False, notes=()):
    """Render ``series`` (list of ``(label, xs, ys, dashed)``) as an SVG string.

    Non-finite points and, on log axes, non-positive points are skipped.  An
    empty ``series`` gives the axes alone.
    """
    xs_all = [x for s in series for x in s[1]]
    ys_all = [y for s in series for y in s[2]]
    x0, x1 = _range(xs_all, logx)
    y0, y1 = _range(ys_all, logy)
    pw, ph = _W - _ML - _MR, _H - _MT - _MB

    def px(x):
        u = math.log10(x) if logx else x
        return _ML + (u - x0) / (x1 - x0) * pw

    def py(y):
        u = math.log10(y) if logy else y
        return _MT + ph - (u - y0) / (y1 - y0) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
           f'viewBox="0 0 {_W} {_H}">',
           f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="white"/>',
           f'<text x="{_W / 2:.1f}" y="24" text-anchor="middle" font-size="15">{_esc(title)}</text>',
           f'<line x1="{_ML}" y1="{_MT + ph}" x2="{_ML + pw}" y2="{_MT + ph}" stroke="black"/>',
           f'<line x1="{_ML}" y1="{_MT}" x2="{_ML}" y2="{_MT + ph}" stroke="black"/>']
    for i in range(5):
        u = x0 + (x1 - x0) * i / 4
        v = y0 + (y1 - y0) * i / 4
        gx = _ML + pw * i / 4
        gy = _MT + ph - ph * i / 4
        lx = f"1e{u:.2f}" if logx else f"{u:.3g}"
        ly = f"1e{v:.2f}" if logy else f"{v:.3g}"
        out.append(f'<line x1="{gx:.1f}" y1="{_MT + ph}" x2="{gx:.1f}" y2="{_MT + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{gx:.1f}" y="{_MT + ph + 18}" text-anchor="middle" font-size="11">{lx}</text>')
        out.append(f'<line x1="{_ML - 5}" y1="{gy:.1f}" x2="{_ML}" y2="{gy:.1f}" stroke="black"/>')
        out.append(f'<text x="{_ML - 8}" y="{gy + 4:.1f}" text-anchor="end" font-size="11">{ly}</text>')
    out.append(f'<text x="{_ML + pw / 2:.1f}" y="{_H - 10}" text-anchor="middle" font-size="12">'
               f'{_esc(xlabel)}</text>')
    out.append(f'<text x="16" y="{_MT + ph / 2:.1f}" text-anchor="middle" font-size="12" '
               f'transform="rotate(-90 16 {_MT + ph / 2:.1f})">{_esc(ylabel)}</text>')
    for k, (label, xs, ys, dashed) in enumerate(series):
        pts = [(px(x), py(y)) for x, y in zip(xs, ys)
               if math.isfinite(x) and math.isfinite(y) and (x > 0 or not logx) and (y > 0 or not logy)]
        color = _COLORS[k % len(_COLORS)]
        if pts:
            path = " ".join(f"{a:.2f},{b:.2f}" for a, b in pts)
            dash = ' stroke-dasharray="6,4"' if dashed else ""
            out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash} points="{path}"/>')
        out.append(f'<text x="{_ML + pw - 6}" y="{_MT + 16 + 15 * k}" text-anchor="end" font-size="12" '
                   f'fill="{color}">{_esc(label)}</text>')
    for k, note in enumerate(notes):
        out.append(f'<text x="{_ML + 8}" y="{_MT + 16 + 15 * k}" font-size="12">{_esc(note)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _table(lines, required):
    rows = list(csv.DictReader([ln for ln in lines if not ln.startswith("#")]))
    have = set(rows[0]) if rows else set(
        next(csv.reader([ln for ln in lines if not ln.startswith("#")]), []))
    missing = [c for c in required if c not in have]
    if missing:
        raise ConfigError(f"missing columns {missing}")
    return rows


def _profile_svg(lines, name):
    rows = _table(lines, ["t", "sup_norm"])
    t = np.array([float(r["t"]) for r in rows]) if rows else np.zeros(0)
    v = np.array([float(r["sup_norm"]) for r in rows]) if rows else np.zeros(0)
    keep = (t > 0) & (v > 0)
    notes = []
    series = [("sup norm", t, v, False)]
    if keep.sum() >= 2:
        slope, icpt = np.polyfit(np.log(t[keep]), np.log(v[keep]), 1)
        notes.append(f"fitted slope = {slope:.4f}")
        series.append(("fit", t[keep], np.exp(icpt) * t[keep] ** slope, True))
    return svg_line_plot(series, title=name, xlabel="t", ylabel="sup norm", logx=True, logy=True,
                         notes=notes)


def _modulus_svg(lines, name):
    rows = _table(lines, ["r", "omega", "fit"])
    r = np.array([float(x["r"]) for x in rows])
    w = np.array([float(x["omega"]) for x in rows])
    fit = np.array([float(x["fit"]) for x in rows])
    notes = []
    keep = (r > 0) & (w > 0)
    if keep.sum() >= 2:
        g = -np.polyfit(np.log(np.abs(np.log2(r[keep]))), np.log(w[keep]), 1)[0]
        notes.append(f"fitted exponent = {g:.4f}")
    return svg_line_plot([("modulus", r, w, False), ("theory C/|log2 r|^(alpha-1)", r, fit, True)],
                         title=name, xlabel="r", ylabel="omega(r)", logx=True, logy=True, notes=notes)


def _report_svg(text, name):
    rep = EstimateReport.from_csv(text)
    idx = np.arange(len(rep.rows), dtype=float)
    lhs = np.array([r.lhs for r in rep.rows])
    rhs = np.array([r.rhs for r in rep.rows])
    npass = sum(r.passed for r in rep.rows)
    notes = [f"{npass}/{len(rep.rows)} rows pass"] if rep.rows else ["no rows"]
    series = [("lhs", idx, lhs, False), ("rhs", idx, rhs, True)] if rep.rows else []
    positive = rep.rows and np.all(lhs > 0) and np.all(rhs > 0)
    return svg_line_plot(series, title=f"{name} ({rep.name})" if rep.name else name, xlabel="row",
                         ylabel="value", logy=bool(positive), notes=notes)


def plot_csv(source, out=None):
    """Render a CSV file (path) to SVG; write to ``out`` if given and return the text."""
    text = Path(source).read_text()
    lines = text.splitlines()
    if not lines:
        raise ConfigError("empty CSV file")
    head = lines[0]
    name = Path(source).stem
    try:
        if head == REPORT_HEADER:
            svg = _report_svg(text, name)
        elif head.startswith("# levysmooth gradient-profile"):
            svg = _profile_svg(lines, name)
        elif head.startswith("# levysmooth modulus"):
            svg = _modulus_svg(lines, name)
        else:
            raise ConfigError(f"unrecognized CSV header {head!r}")
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"malformed value in {source}: {exc}") from exc
    if out is not None:
        Path(out).write_text(svg)
    return svg
