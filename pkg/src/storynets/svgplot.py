"""Minimal hand-rolled SVG charts.

Every function is a pure mapping from data to markup: fixed-precision
coordinates, no timestamps, no randomness, so rerunning a pipeline yields
byte-identical figures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

PALETTE = ("#4878a8", "#e49444", "#5fa052", "#b65d60", "#857aab", "#8c6d57")
TERCILE_COLORS = {"weak": "#2166ac", "moderate": "#9a9a9a", "strong": "#b2182b"}

_FONT = "font-family=\"Helvetica, Arial, sans-serif\""


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def _text(x: float, y: float, s: str, size: int = 11, anchor: str = "middle",
          extra: str = "") -> str:
    return (f'<text x="{_fmt(x)}" y="{_fmt(y)}" font-size="{size}" '
            f'text-anchor="{anchor}" {_FONT} {extra}>{escape(s)}</text>')


def _nice_ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / max(n - 1, 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    start = math.floor(lo / step) * step
    ticks = []
    t = start
    while t <= hi + step * 1e-9:
        if t >= lo - step * 1e-9:
            ticks.append(round(t, 10))
        t += step
    return ticks


def _tick_label(t: float) -> str:
    return f"{t:g}"


@dataclass(frozen=True)
class BarSeries:
    name: str
    values: tuple[float, ...]
    errors: tuple[float, ...] | None = None


def _svg(width: float, height: float, body: list[str]) -> str:
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(width)}" '
        f'height="{_fmt(height)}" viewBox="0 0 {_fmt(width)} {_fmt(height)}">',
        f'<rect width="{_fmt(width)}" height="{_fmt(height)}" fill="#ffffff"/>',
        *body,
        "</svg>",
    ]
    return "\n".join(parts) + "\n"


def write_svg(path: str | Path, content: str) -> None:
    Path(path).write_text(content, encoding="utf-8")


def grouped_bar_chart(
    categories: Sequence[str],
    series: Sequence[BarSeries],
    title: str = "",
    y_label: str = "",
) -> str:
    """Vertical grouped bars with optional symmetric error whiskers."""
    if not categories or not series:
        raise ValueError("categories and series must be non-empty")
    for s in series:
        if len(s.values) != len(categories):
            raise ValueError(f"series {s.name!r} length mismatch")
        if s.errors is not None and len(s.errors) != len(categories):
            raise ValueError(f"series {s.name!r} error length mismatch")

    left, right, top, bottom = 64.0, 20.0, 46.0, 86.0
    group_w = max(34.0 * len(series), 56.0)
    plot_w = group_w * len(categories)
    plot_h = 300.0
    width = left + plot_w + right
    height = top + plot_h + bottom

    lo = 0.0
    hi = 0.0
    for s in series:
        for i, v in enumerate(s.values):
            err = s.errors[i] if s.errors else 0.0
            lo = min(lo, v - err)
            hi = max(hi, v + err)
    ticks = _nice_ticks(lo, hi)
    lo, hi = min(ticks[0], lo), max(ticks[-1], hi)

    def ypix(v: float) -> float:
        return top + plot_h * (1.0 - (v - lo) / (hi - lo))

    body: list[str] = []
    if title:
        body.append(_text(width / 2, 22, title, size=14,
                          extra='font-weight="bold"'))
    for t in ticks:
        y = ypix(t)
        body.append(f'<line x1="{_fmt(left)}" y1="{_fmt(y)}" '
                    f'x2="{_fmt(left + plot_w)}" y2="{_fmt(y)}" '
                    f'stroke="#dddddd" stroke-width="1"/>')
        body.append(_text(left - 8, y + 4, _tick_label(t), size=10, anchor="end"))
    zero_y = ypix(max(lo, min(0.0, hi)))

    bar_w = (group_w - 10.0) / len(series)
    for ci, cat in enumerate(categories):
        gx = left + ci * group_w + 5.0
        for si, s in enumerate(series):
            v = s.values[ci]
            x = gx + si * bar_w
            y0, y1 = sorted((ypix(v), zero_y))
            color = PALETTE[si % len(PALETTE)]
            body.append(f'<rect x="{_fmt(x)}" y="{_fmt(y0)}" '
                        f'width="{_fmt(bar_w - 2.0)}" '
                        f'height="{_fmt(max(y1 - y0, 0.5))}" fill="{color}"/>')
            if s.errors:
                err = s.errors[ci]
                cx = x + (bar_w - 2.0) / 2.0
                ya, yb = ypix(v + err), ypix(v - err)
                body.append(f'<line x1="{_fmt(cx)}" y1="{_fmt(ya)}" '
                            f'x2="{_fmt(cx)}" y2="{_fmt(yb)}" '
                            f'stroke="#333333" stroke-width="1.5"/>')
                for ye in (ya, yb):
                    body.append(f'<line x1="{_fmt(cx - 4)}" y1="{_fmt(ye)}" '
                                f'x2="{_fmt(cx + 4)}" y2="{_fmt(ye)}" '
                                f'stroke="#333333" stroke-width="1.5"/>')
        lx = left + ci * group_w + group_w / 2.0
        ly = top + plot_h + 14.0
        body.append(_text(0, 0, cat, size=10, anchor="end",
                          extra=f'transform="translate({_fmt(lx)},{_fmt(ly)}) '
                                f'rotate(-40)"'))
    body.append(f'<line x1="{_fmt(left)}" y1="{_fmt(zero_y)}" '
                f'x2="{_fmt(left + plot_w)}" y2="{_fmt(zero_y)}" '
                f'stroke="#333333" stroke-width="1"/>')
    if y_label:
        body.append(_text(0, 0, y_label, size=11,
                          extra=f'transform="translate(16,{_fmt(top + plot_h / 2)}) '
                                f'rotate(-90)"'))
    for si, s in enumerate(series):
        lx = left + 12 + si * 150.0
        ly = height - 14.0
        color = PALETTE[si % len(PALETTE)]
        body.append(f'<rect x="{_fmt(lx)}" y="{_fmt(ly - 9)}" width="12" '
                    f'height="12" fill="{color}"/>')
        body.append(_text(lx + 18, ly + 1, s.name, size=11, anchor="start"))
    return _svg(width, height, body)


def confusion_heatmap(matrix: Sequence[Sequence[float]],
                      class_names: Sequence[str], title: str = "") -> str:
    n = len(matrix)
    if any(len(row) != n for row in matrix) or len(class_names) != n:
        raise ValueError("matrix must be square and match class_names")
    cell = 84.0
    left, top = 110.0, 70.0
    width = left + n * cell + 30.0
    height = top + n * cell + 50.0
    peak = max(max(row) for row in matrix) or 1.0

    body: list[str] = []
    if title:
        body.append(_text(width / 2, 24, title, size=14,
                          extra='font-weight="bold"'))
    for i, row in enumerate(matrix):
        for j, v in enumerate(row):
            frac = v / peak
            # white -> deep blue ramp
            r = round(255 - 183 * frac)
            g = round(255 - 138 * frac)
            b = round(255 - 87 * frac)
            x = left + j * cell
            y = top + i * cell
            body.append(f'<rect x="{_fmt(x)}" y="{_fmt(y)}" '
                        f'width="{_fmt(cell)}" height="{_fmt(cell)}" '
                        f'fill="rgb({r},{g},{b})" stroke="#ffffff"/>')
            text_color = "#ffffff" if frac > 0.6 else "#222222"
            body.append(_text(x + cell / 2, y + cell / 2 + 5, f"{v:g}",
                              size=14, extra=f'fill="{text_color}"'))
    for i, name in enumerate(class_names):
        body.append(_text(left - 10, top + i * cell + cell / 2 + 4, name,
                          size=11, anchor="end"))
        body.append(_text(left + i * cell + cell / 2, top + n * cell + 18,
                          name, size=11))
    body.append(_text(left - 72, top + n * cell / 2, "true", size=11,
                      extra=f'transform="rotate(-90 {_fmt(left - 72)} '
                            f'{_fmt(top + n * cell / 2)})"'))
    body.append(_text(left + n * cell / 2, top + n * cell + 38, "predicted",
                      size=11))
    return _svg(width, height, body)


def horizontal_importance_chart(
    feature_names: Sequence[str],
    per_class: Sequence[Sequence[float]],
    class_names: Sequence[str],
    order: Sequence[int],
    title: str = "",
) -> str:
    """Per-class |SHAP| means as horizontal grouped bars, ranked order."""
    n_feat = len(feature_names)
    n_cls = len(class_names)
    row_h = 16.0 * n_cls + 8.0
    left, top = 150.0, 52.0
    plot_w = 430.0
    width = left + plot_w + 30.0
    height = top + row_h * n_feat + 60.0
    peak = max((max(row) for row in per_class), default=0.0) or 1.0

    body: list[str] = []
    if title:
        body.append(_text(width / 2, 24, title, size=14,
                          extra='font-weight="bold"'))
    for rank, j in enumerate(order):
        y = top + rank * row_h
        body.append(_text(left - 8, y + row_h / 2 + 4, feature_names[j],
                          size=11, anchor="end"))
        for k in range(n_cls):
            v = per_class[j][k]
            bw = plot_w * v / peak
            by = y + 4 + k * 16.0
            color = PALETTE[k % len(PALETTE)]
            body.append(f'<rect x="{_fmt(left)}" y="{_fmt(by)}" '
                        f'width="{_fmt(max(bw, 0.5))}" height="12" '
                        f'fill="{color}"/>')
    body.append(f'<line x1="{_fmt(left)}" y1="{_fmt(top)}" '
                f'x2="{_fmt(left)}" y2="{_fmt(top + row_h * n_feat)}" '
                f'stroke="#333333"/>')
    body.append(_text(left + plot_w / 2, height - 34, "mean |SHAP| (margin scale)",
                      size=11))
    for k, name in enumerate(class_names):
        lx = left + 12 + k * 150.0
        ly = height - 12.0
        body.append(f'<rect x="{_fmt(lx)}" y="{_fmt(ly - 9)}" width="12" '
                    f'height="12" fill="{PALETTE[k % len(PALETTE)]}"/>')
        body.append(_text(lx + 18, ly + 1, name, size=11, anchor="start"))
    return _svg(width, height, body)


def beeswarm_chart(
    feature_names: Sequence[str],
    points_by_feature: Sequence[Sequence[tuple[float, str]]],
    title: str = "",
) -> str:
    """Rows of (shap_value, tercile-colored) dots, one row per feature."""
    if len(points_by_feature) != len(feature_names):
        raise ValueError("points_by_feature length mismatch")
    row_h = 34.0
    left, top = 150.0, 52.0
    plot_w = 460.0
    width = left + plot_w + 30.0
    height = top + row_h * len(feature_names) + 64.0

    span = 0.0
    for pts in points_by_feature:
        for v, _ in pts:
            span = max(span, abs(v))
    span = span or 1.0

    def xpix(v: float) -> float:
        return left + plot_w * (0.5 + v / (2.0 * span))

    body: list[str] = []
    if title:
        body.append(_text(width / 2, 24, title, size=14,
                          extra='font-weight="bold"'))
    mid = xpix(0.0)
    body.append(f'<line x1="{_fmt(mid)}" y1="{_fmt(top - 6)}" '
                f'x2="{_fmt(mid)}" y2="{_fmt(top + row_h * len(feature_names))}" '
                f'stroke="#bbbbbb" stroke-dasharray="4 3"/>')
    for fi, name in enumerate(feature_names):
        yc = top + fi * row_h + row_h / 2.0
        body.append(_text(left - 8, yc + 4, name, size=11, anchor="end"))
        pts = sorted(points_by_feature[fi])
        for i, (v, tercile) in enumerate(pts):
            # deterministic vertical spread, densest near the row center
            jitter = ((i * 7) % 13 - 6) * (row_h / 16.0)
            color = TERCILE_COLORS.get(tercile, "#555555")
            body.append(f'<circle cx="{_fmt(xpix(v))}" cy="{_fmt(yc + jitter)}" '
                        f'r="2.4" fill="{color}" fill-opacity="0.75"/>')
    body.append(_text(left + plot_w / 2, height - 40,
                      "SHAP value (margin scale)", size=11))
    lx = left
    for label in ("weak", "moderate", "strong"):
        body.append(f'<circle cx="{_fmt(lx + 6)}" cy="{_fmt(height - 16)}" '
                    f'r="5" fill="{TERCILE_COLORS[label]}"/>')
        body.append(_text(lx + 16, height - 12, f"{label} feature value",
                          size=11, anchor="start"))
        lx += 150.0
    return _svg(width, height, body)
