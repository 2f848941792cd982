"""Dependency-light SVG polyline plots (fixed 800x600 viewBox)."""

from __future__ import annotations

import math

import numpy as np

__all__ = ["line_plot"]

WIDTH, HEIGHT = 800, 600
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 80, 24, 48, 60
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
MAX_POINTS = 1500


def _nice_step(span: float, target: int = 6) -> float:
    if span <= 0 or not math.isfinite(span):
        return 1.0
    raw = span / target
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 5.0, 10.0):
        if mag * mult >= raw:
            return mag * mult
    return mag * 10.0


def _ticks(lo: float, hi: float) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    step = _nice_step(hi - lo)
    first = math.ceil(lo / step) * step
    out = []
    v = first
    while v <= hi + 1e-12 * step:
        out.append(0.0 if abs(v) < 1e-12 * step else v)
        v += step
    return out


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def _thin(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if x.size <= MAX_POINTS:
        return x, y
    idx = np.unique(np.linspace(0, x.size - 1, MAX_POINTS).astype(int))
    return x[idx], y[idx]


def line_plot(
    path: str,
    series: list[tuple[str, np.ndarray, np.ndarray]],
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
    ylog: bool = False,
    y_floor: float = 1e-16,
) -> None:
    """Write a polyline plot; ``series`` is a list of (label, x, y)."""
    prepared = []
    for label, x, y in series:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if ylog:
            y = np.log10(np.maximum(y, y_floor))
        x, y = _thin(x, y)
        prepared.append((label, x, y))

    xs = np.concatenate([x for _, x, _ in prepared]) if prepared else np.array([0.0, 1.0])
    ys = np.concatenate([y for _, _, y in prepared]) if prepared else np.array([0.0, 1.0])
    x_lo, x_hi = float(np.min(xs)), float(np.max(xs))
    y_lo, y_hi = float(np.min(ys)), float(np.max(ys))
    if x_hi <= x_lo:
        x_hi = x_lo + 1.0
    if y_hi <= y_lo:
        y_hi = y_lo + 1.0
    # a little headroom so curves do not sit on the frame
    pad = 0.04 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad

    inner_w = WIDTH - MARGIN_L - MARGIN_R
    inner_h = HEIGHT - MARGIN_T - MARGIN_B

    def sx(v: float) -> float:
        return MARGIN_L + (v - x_lo) / (x_hi - x_lo) * inner_w

    def sy(v: float) -> float:
        return MARGIN_T + (y_hi - v) / (y_hi - y_lo) * inner_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" '
        f'font-family="Helvetica, Arial, sans-serif" font-size="14">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{inner_w}" height="{inner_h}" '
        'fill="none" stroke="#333" stroke-width="1"/>',
    ]
    if title:
        parts.append(
            f'<text x="{WIDTH / 2:.1f}" y="{MARGIN_T - 18}" text-anchor="middle" '
            f'font-size="17">{title}</text>'
        )

    for v in _ticks(x_lo, x_hi):
        px = sx(v)
        parts.append(
            f'<line x1="{px:.2f}" y1="{MARGIN_T + inner_h}" x2="{px:.2f}" '
            f'y2="{MARGIN_T + inner_h + 6}" stroke="#333"/>'
        )
        parts.append(
            f'<text x="{px:.2f}" y="{MARGIN_T + inner_h + 22}" '
            f'text-anchor="middle">{_fmt(v)}</text>'
        )
    if ylog:
        y_ticks = [v for v in range(math.ceil(y_lo), math.floor(y_hi) + 1)]
        y_label = lambda v: f"1e{int(v)}"  # noqa: E731 - tiny local formatter
    else:
        y_ticks = _ticks(y_lo, y_hi)
        y_label = _fmt
    for v in y_ticks:
        py = sy(v)
        parts.append(
            f'<line x1="{MARGIN_L - 6}" y1="{py:.2f}" x2="{MARGIN_L}" '
            f'y2="{py:.2f}" stroke="#333"/>'
        )
        parts.append(
            f'<text x="{MARGIN_L - 10}" y="{py + 5:.2f}" text-anchor="end">{y_label(v)}</text>'
        )
    if xlabel:
        parts.append(
            f'<text x="{MARGIN_L + inner_w / 2:.1f}" y="{HEIGHT - 14}" '
            f'text-anchor="middle">{xlabel}</text>'
        )
    if ylabel:
        cy = MARGIN_T + inner_h / 2
        parts.append(
            f'<text x="22" y="{cy:.1f}" text-anchor="middle" '
            f'transform="rotate(-90 22 {cy:.1f})">{ylabel}</text>'
        )

    for i, (label, x, y) in enumerate(prepared):
        color = PALETTE[i % len(PALETTE)]
        points = " ".join(f"{sx(px):.2f},{sy(py):.2f}" for px, py in zip(x, y))
        parts.append(
            f'<polyline points="{points}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
        parts.append(
            f'<text x="{WIDTH - MARGIN_R - 8}" y="{MARGIN_T + 20 + 18 * i}" '
            f'text-anchor="end" fill="{color}">{label}</text>'
        )
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")
