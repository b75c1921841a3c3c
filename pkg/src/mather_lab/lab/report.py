"""Write reports to disk: ``report.json``, ``rows.csv`` and a log-log ``scaling.svg``."""

from __future__ import annotations

import csv
import math
from pathlib import Path
from xml.sax.saxutils import escape

from .experiments import ScalingReport

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")


def write_rows_csv(report: ScalingReport, path) -> None:
    keys = []
    for row in report.rows:
        for k in row:
            if k not in keys:
                keys.append(k)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(keys)
        for row in report.rows:
            w.writerow(["" if row.get(k) is None else _fmt(row.get(k)) for k in keys])


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v


def loglog_svg(series: dict, xlabel: str, title: str, width: int = 640, height: int = 420) -> str:
    """Minimal log-log line chart; ``series`` maps a label to ``(xs, ys)``."""
    pts = [(x, y) for xs, ys in series.values() for x, y in zip(xs, ys)
           if x is not None and y is not None and x > 0 and y > 0]
    margin = 60
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
           f'<rect width="{width}" height="{height}" fill="white"/>',
           f'<text x="{width / 2}" y="20" text-anchor="middle">{escape(title)}</text>']
    if not pts:
        out.append(f'<text x="{width / 2}" y="{height / 2}" text-anchor="middle">no positive data</text>')
        out.append("</svg>")
        return "\n".join(out) + "\n"
    lx = [math.log10(x) for x, _ in pts]
    ly = [math.log10(y) for _, y in pts]
    x0, x1 = min(lx), max(lx)
    y0, y1 = min(ly), max(ly)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5

    def px(v):
        return margin + (math.log10(v) - x0) / (x1 - x0) * (width - 2 * margin)

    def py(v):
        return height - margin - (math.log10(v) - y0) / (y1 - y0) * (height - 2 * margin)

    out.append(f'<rect x="{margin}" y="{margin}" width="{width - 2 * margin}" height="{height - 2 * margin}" '
               f'fill="none" stroke="black"/>')
    for d in range(math.floor(x0), math.ceil(x1) + 1):
        if x0 <= d <= x1:
            X = px(10.0**d)
            out.append(f'<line x1="{X:.2f}" y1="{height - margin}" x2="{X:.2f}" y2="{height - margin + 5}" stroke="black"/>')
            out.append(f'<text x="{X:.2f}" y="{height - margin + 18}" text-anchor="middle">1e{d}</text>')
    for d in range(math.floor(y0), math.ceil(y1) + 1):
        if y0 <= d <= y1:
            Y = py(10.0**d)
            out.append(f'<line x1="{margin - 5}" y1="{Y:.2f}" x2="{margin}" y2="{Y:.2f}" stroke="black"/>')
            out.append(f'<text x="{margin - 8}" y="{Y + 4:.2f}" text-anchor="end">1e{d}</text>')
    out.append(f'<text x="{width / 2}" y="{height - 15}" text-anchor="middle">{escape(xlabel)}</text>')
    for i, (label, (xs, ys)) in enumerate(series.items()):
        colour = PALETTE[i % len(PALETTE)]
        good = [(x, y) for x, y in zip(xs, ys) if x is not None and y is not None and x > 0 and y > 0]
        if good:
            path = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in good)
            out.append(f'<polyline points="{path}" fill="none" stroke="{colour}" stroke-width="1.5"/>')
            out.extend(f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="3" fill="{colour}"/>' for x, y in good)
        out.append(f'<text x="{width - margin - 4}" y="{margin + 16 + 14 * i}" text-anchor="end" '
                   f'fill="{colour}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_report(report: ScalingReport, outdir) -> dict:
    """Write the three output files; returns their paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = {"json": outdir / "report.json", "csv": outdir / "rows.csv", "svg": outdir / "scaling.svg"}
    paths["json"].write_text(report.to_json() + "\n")
    write_rows_csv(report, paths["csv"])
    xkey = report.plot.get("x")
    series = {}
    for ykey in report.plot.get("y", []):
        xs = [r.get(xkey) for r in report.rows]
        ys = [r.get(ykey) for r in report.rows]
        series[ykey] = (xs, ys)
    paths["svg"].write_text(loglog_svg(series, xkey or "", report.experiment))
    return paths
