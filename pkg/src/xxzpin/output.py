"""CSV and SVG writers with deterministic formatting."""

from __future__ import annotations

import csv
import io
import math
from xml.sax.saxutils import escape, quoteattr

__all__ = ["fmt", "csv_text", "write_text", "svg_lines"]

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f")


def fmt(value) -> str:
    """12 significant digits for floats; integers and strings pass through."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        out = f"{value:.12g}"
        return "0" if out == "-0" else out
    return str(value)


def csv_text(header: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def write_text(path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def svg_lines(
    series: list[tuple[str, list[float], list[float]]],
    xlabel: str = "",
    ylabel: str = "",
    title: str = "",
    width: int = 640,
    height: int = 480,
) -> str:
    """Axes plus one polyline per (label, xs, ys) series; NaN points are skipped."""
    pts = [(x, y) for _, xs, ys in series for x, y in zip(xs, ys) if math.isfinite(x) and math.isfinite(y)]
    if pts:
        x0, x1 = min(p[0] for p in pts), max(p[0] for p in pts)
        y0, y1 = min(p[1] for p in pts), max(p[1] for p in pts)
    else:
        x0 = y0 = 0.0
        x1 = y1 = 1.0
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    left, right, top, bottom = 70, 20, 30, 50
    pw, ph = width - left - right, height - top - bottom

    def sx(x):
        return left + (x - x0) / (x1 - x0) * pw

    def sy(y):
        return top + (y1 - y) / (y1 - y0) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for i in range(5):
        xv = x0 + (x1 - x0) * i / 4
        yv = y0 + (y1 - y0) * i / 4
        out.append(
            f'<text x="{sx(xv):.2f}" y="{top + ph + 18}" font-size="11" text-anchor="middle">{fmt(round(xv, 4))}</text>'
        )
        out.append(
            f'<text x="{left - 6}" y="{sy(yv) + 4:.2f}" font-size="11" text-anchor="end">{fmt(round(yv, 4))}</text>'
        )
    if xlabel:
        out.append(f'<text x="{left + pw / 2:.1f}" y="{height - 10}" font-size="13" text-anchor="middle">{escape(xlabel)}</text>')
    if ylabel:
        out.append(
            f'<text x="16" y="{top + ph / 2:.1f}" font-size="13" text-anchor="middle" '
            f'transform="rotate(-90 16 {top + ph / 2:.1f})">{escape(ylabel)}</text>'
        )
    if title:
        out.append(f'<text x="{left + pw / 2:.1f}" y="18" font-size="13" text-anchor="middle">{escape(title)}</text>')
    for i, (label, xs, ys) in enumerate(series):
        coords = " ".join(
            f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, ys) if math.isfinite(x) and math.isfinite(y)
        )
        color = PALETTE[i % len(PALETTE)]
        out.append(
            f'<polyline data-label={quoteattr(str(label))} fill="none" stroke="{color}" '
            f'stroke-width="1.2" points="{coords}"/>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
