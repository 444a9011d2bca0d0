"""CSV and SVG writers for result tables.

Both writers are byte-deterministic: numbers are printed with fixed
precision and nothing time- or host-dependent is emitted.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from numbers import Real
from pathlib import Path
from typing import Sequence

from .experiments import ResultTable

SIG_DIGITS = 12

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
           "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")


def format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, int):
        return str(value)
    if isinstance(value, Real):
        v = float(value)
        return "0" if v == 0 else format(v, f".{SIG_DIGITS}g")
    return str(value)


def render_csv(table: ResultTable) -> str:
    buf = io.StringIO()
    for key in sorted(table.provenance):
        val = table.provenance[key]
        text = val if isinstance(val, str) else json.dumps(val, sort_keys=True, default=str)
        buf.write(f"# {key}: {text}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([format_cell(v) for v in row])
    return buf.getvalue()


def write_csv(table: ResultTable, path) -> Path:
    path = Path(path)
    try:
        path.write_text(render_csv(table), encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


@dataclass(frozen=True)
class Series:
    """Which columns of a table make up one or more polylines.

    Rows matching ``where`` are split into one polyline per distinct value
    of the ``group`` columns.
    """

    x: str
    y: str
    group: tuple[str, ...] = ()
    where: dict = field(default_factory=dict)
    label: str | None = None

    def columns(self) -> list[str]:
        return [self.x, self.y, *self.group, *self.where]


def _is_number(v) -> bool:
    return isinstance(v, Real) and not isinstance(v, bool) and math.isfinite(float(v))


def _polylines(table: ResultTable, series: Sequence[Series]):
    lines = []
    for s in series:
        groups: dict[tuple, list] = {}
        for row in table.select(**s.where):
            x, y = row[s.x], row[s.y]
            if not (_is_number(x) and _is_number(y)):
                continue
            key = tuple(row[g] for g in s.group)
            groups.setdefault(key, []).append((float(x), float(y)))
        for key, pts in groups.items():
            name = s.label or s.y
            if s.group:
                name += " (" + ", ".join(f"{g}={format_cell(v)}" for g, v in zip(s.group, key)) + ")"
            lines.append((name, sorted(pts)))
    return lines


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        lo, hi = lo - 0.5, hi + 0.5
    raw = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=10 * mag)
    first = math.floor(lo / step) * step
    ticks = []
    t = first
    while t <= hi + 1e-9 * step:
        ticks.append(round(t, 10))
        t += step
    if ticks[-1] < hi:
        ticks.append(round(t, 10))
    return ticks


def render_svg(table: ResultTable, series: Series | Sequence[Series], title: str = "",
               xlabel: str | None = None, ylabel: str | None = None) -> str:
    series = [series] if isinstance(series, Series) else list(series)
    missing = sorted({c for s in series for c in s.columns() if c not in table.columns})
    if missing:
        raise KeyError(f"table has no column(s): {', '.join(missing)}")
    lines = _polylines(table, series)
    xs = [p[0] for _, pts in lines for p in pts] or [0.0, 1.0]
    ys = [p[1] for _, pts in lines for p in pts] or [0.0, 1.0]
    xt, yt = _ticks(min(xs), max(xs)), _ticks(min(ys), max(ys))
    x0, x1, y0, y1 = xt[0], xt[-1], yt[0], yt[-1]

    width, height = 720, 450
    left, right, top, bottom = 70, 200, 40, 60
    pw, ph = width - left - right, height - top - bottom

    def px(x):
        return left + (x - x0) / (x1 - x0) * pw

    def py(y):
        return top + ph - (y - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<text x="{left + pw / 2:.2f}" y="22" text-anchor="middle" font-size="14">{_esc(title)}</text>',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for t in xt:
        out.append(f'<line x1="{px(t):.2f}" y1="{top + ph}" x2="{px(t):.2f}" y2="{top + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{px(t):.2f}" y="{top + ph + 18}" text-anchor="middle">{format_cell(t)}</text>')
    for t in yt:
        out.append(f'<line x1="{left - 5}" y1="{py(t):.2f}" x2="{left}" y2="{py(t):.2f}" stroke="black"/>')
        out.append(f'<text x="{left - 8}" y="{py(t) + 4:.2f}" text-anchor="end">{format_cell(t)}</text>')
    out.append(f'<text x="{left + pw / 2:.2f}" y="{height - 15}" text-anchor="middle">'
               f'{_esc(xlabel or series[0].x)}</text>')
    out.append(f'<text x="18" y="{top + ph / 2:.2f}" text-anchor="middle" '
               f'transform="rotate(-90 18 {top + ph / 2:.2f})">{_esc(ylabel or series[0].y)}</text>')
    for i, (name, pts) in enumerate(lines):
        color = PALETTE[i % len(PALETTE)]
        coords = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in pts)
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{coords}"/>')
        ly = top + 10 + 18 * i
        out.append(f'<line x1="{left + pw + 12}" y1="{ly}" x2="{left + pw + 32}" y2="{ly}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{left + pw + 38}" y="{ly + 4}">{_esc(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg_plot(table: ResultTable, series: Series | Sequence[Series], path, **labels) -> Path:
    """Render ``series`` of ``table`` as a standalone SVG line plot at ``path``."""
    path = Path(path)
    text = render_svg(table, series, **labels)
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def _esc(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
