"""Minimal self-contained SVG line charts; no plotting dependencies."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

WIDTH = 720
HEIGHT = 460
MARGIN_LEFT = 70
MARGIN_RIGHT = 24
MARGIN_TOP = 40
MARGIN_BOTTOM = 56


@dataclass(frozen=True)
class Series:
    label: str
    x: Sequence[float]
    y: Sequence[float]
    color: str = "#1f77b4"
    dashed: bool = False


def _ticks(lo: float, hi: float, count: int = 6) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    step = (hi - lo) / (count - 1)
    return [lo + i * step for i in range(count)]


def _fmt(v: float) -> str:
    return f"{v:.4g}"


def line_chart(series: Sequence[Series], x_label: str, y_label: str, title: str = "") -> str:
    """Render series as one SVG document string with axes, ticks, and a legend."""
    xs = [float(v) for s in series for v in s.x]
    ys = [float(v) for s in series for v in s.y]
    if not xs:
        raise ValueError("nothing to plot")
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    pad = 0.05 * (y_hi - y_lo) or 0.05
    y_lo -= pad
    y_hi += pad

    plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM

    def px(x: float) -> float:
        return MARGIN_LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w

    def py(y: float) -> float:
        return MARGIN_TOP + (y_hi - y) / (y_hi - y_lo) * plot_h

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    if title:
        out.append(
            f'<text x="{WIDTH / 2:.1f}" y="22" text-anchor="middle" '
            f'font-family="sans-serif" font-size="15">{title}</text>'
        )

    # axes, grid, tick labels
    for xt in _ticks(x_lo, x_hi):
        X = px(xt)
        out.append(
            f'<line x1="{X:.2f}" y1="{MARGIN_TOP}" x2="{X:.2f}" '
            f'y2="{MARGIN_TOP + plot_h}" stroke="#dddddd" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{X:.2f}" y="{MARGIN_TOP + plot_h + 18}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="12">{_fmt(xt)}</text>'
        )
    for yt in _ticks(y_lo, y_hi):
        Y = py(yt)
        out.append(
            f'<line x1="{MARGIN_LEFT}" y1="{Y:.2f}" x2="{MARGIN_LEFT + plot_w}" '
            f'y2="{Y:.2f}" stroke="#dddddd" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{MARGIN_LEFT - 8}" y="{Y + 4:.2f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="12">{_fmt(yt)}</text>'
        )
    out.append(
        f'<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{plot_w}" height="{plot_h}" '
        f'fill="none" stroke="black" stroke-width="1"/>'
    )
    out.append(
        f'<text x="{MARGIN_LEFT + plot_w / 2:.1f}" y="{HEIGHT - 14}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13">{x_label}</text>'
    )
    out.append(
        f'<text x="18" y="{MARGIN_TOP + plot_h / 2:.1f}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13" '
        f'transform="rotate(-90 18 {MARGIN_TOP + plot_h / 2:.1f})">{y_label}</text>'
    )

    for s in series:
        points = " ".join(f"{px(float(x)):.2f},{py(float(y)):.2f}" for x, y in zip(s.x, s.y))
        dash = ' stroke-dasharray="7 5"' if s.dashed else ""
        out.append(
            f'<polyline fill="none" stroke="{s.color}" stroke-width="2"{dash} points="{points}"/>'
        )

    # legend, top right of the plot area
    lx = MARGIN_LEFT + plot_w - 230
    ly = MARGIN_TOP + 12
    out.append(
        f'<rect x="{lx - 10}" y="{ly - 12}" width="238" height="{20 * len(series) + 8}" '
        f'fill="white" stroke="#999999"/>'
    )
    for i, s in enumerate(series):
        Y = ly + 20 * i
        dash = ' stroke-dasharray="7 5"' if s.dashed else ""
        out.append(
            f'<line x1="{lx}" y1="{Y}" x2="{lx + 34}" y2="{Y}" stroke="{s.color}" '
            f'stroke-width="2"{dash}/>'
        )
        out.append(
            f'<text x="{lx + 42}" y="{Y + 4}" font-family="sans-serif" font-size="12">{s.label}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
