"""Deterministic SVG output: the outcome landscape of a sweep and the radial
history of a single run."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import IO

import numpy as np

from .dynamics import RunRecord, replay
from .ring import Ring
from .structure import status_codes
from .sweep import SweepGrid
from .thresholds import Label

PALETTE = {
    "GreenTotal": "#1b7837",
    "GreenAE": "#7fbf7b",
    "RedTotal": "#b2182b",
    "RedAE": "#ef8a62",
    "Static": "#bdbdbd",
    "Unfinished": "#762a83",
    "Mixed": "url(#hatch)",
    "Error": "#000000",
}
GREEN, RED = (0x1b, 0x78, 0x37), (0xb2, 0x18, 0x2b)
MAX_ARCS = 10_000


def _fmt(v: float) -> str:
    s = f"{v:.3f}".rstrip("0").rstrip(".")
    return "0" if s == "-0" else s


def _write(svg: str, out: str | Path | IO[str]) -> None:
    if isinstance(out, (str, Path)):
        Path(out).write_text(svg, encoding="utf-8")
    else:
        out.write(svg)


def _header(width: int, height: int) -> list[str]:
    return [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
            f'<rect width="{width}" height="{height}" fill="white"/>']


# -- landscape ----------------------------------------------------------------------

def render_landscape(grid: SweepGrid, out: str | Path | IO[str]) -> str:
    """Majority outcome per cell with tau_r across and tau_g upward.

    Threshold lines are dashed, the domination boundary is solid black, and cells
    whose prediction is undecided get a purple outline.
    """
    size, left, top = 512, 60, 40
    legend_w = 170
    width, height = left + size + legend_w, top + size + 60
    cfg, t = grid.config, grid.thresholds

    r0, r1 = (float(v) for v in cfg.tau_r_span)
    g0, g1 = (float(v) for v in cfg.tau_g_span)

    def px(tr: float) -> float:
        return left + (tr - r0) / (r1 - r0) * size

    def py(tg: float) -> float:
        return top + (g1 - tg) / (g1 - g0) * size

    parts = _header(width, height)
    parts.append('<defs><pattern id="hatch" width="6" height="6" patternUnits="userSpaceOnUse">'
                 '<rect width="6" height="6" fill="#f0f0f0"/>'
                 '<path d="M0,6 L6,0" stroke="#555" stroke-width="1"/></pattern></defs>')
    cell = size / cfg.grid
    outlines = []
    for c in grid.cells:
        x = px(float(c.tau_r)) - cell / 2
        y = py(float(c.tau_g)) - cell / 2
        fill = PALETTE.get(c.majority, "#000000")
        parts.append(f'<rect x="{_fmt(x)}" y="{_fmt(y)}" width="{_fmt(cell)}" '
                     f'height="{_fmt(cell)}" fill="{fill}"/>')
        try:
            undecided = not Label(c.predicted).decided
        except ValueError:
            undecided = False
        if undecided:
            outlines.append(f'<rect x="{_fmt(x + 1)}" y="{_fmt(y + 1)}" width="{_fmt(cell - 2)}" '
                            f'height="{_fmt(cell - 2)}" fill="none" stroke="#9c27b0" '
                            f'stroke-width="1.5"/>')
    parts.extend(outlines)

    rho = cfg.rho
    vertical = [("kr", t.kappa_r), ("mu_r", t.mu_r), ("1/2", 0.5), ("(1-rho)/2", (1 - rho) / 2),
                ("1-rho/2", 1 - rho / 2)]
    horizontal = [("kg", t.kappa_g), ("mu_g", t.mu_g), ("1/2", 0.5), ("rho/2", rho / 2),
                  ("(1+rho)/2", (1 + rho) / 2)]
    for name, v in vertical:
        if r0 < v < r1:
            parts.append(f'<line x1="{_fmt(px(v))}" y1="{top}" x2="{_fmt(px(v))}" '
                         f'y2="{top + size}" stroke="#222" stroke-width="0.8" '
                         f'stroke-dasharray="4,3"/>')
            parts.append(f'<text x="{_fmt(px(v))}" y="{top - 4}" text-anchor="middle" '
                         f'font-size="9">{name}</text>')
    for name, v in horizontal:
        if g0 < v < g1:
            parts.append(f'<line x1="{left}" y1="{_fmt(py(v))}" x2="{left + size}" '
                         f'y2="{_fmt(py(v))}" stroke="#222" stroke-width="0.8" '
                         f'stroke-dasharray="4,3"/>')
            parts.append(f'<text x="{left + size + 3}" y="{_fmt(py(v) + 3)}" '
                         f'font-size="9">{name}</text>')
    inside = [(a, b) for a, b in grid.boundary if r0 <= a <= r1 and g0 <= b <= g1]
    if inside:
        pts = " ".join(f"{_fmt(px(a))},{_fmt(py(b))}" for a, b in inside)
        parts.append(f'<polyline points="{pts}" fill="none" stroke="black" stroke-width="1.6"/>')

    parts.append(f'<rect x="{left}" y="{top}" width="{size}" height="{size}" fill="none" '
                 f'stroke="black"/>')
    for k in range(5):
        vr, vg = r0 + (r1 - r0) * k / 4, g0 + (g1 - g0) * k / 4
        parts.append(f'<text x="{_fmt(px(vr))}" y="{top + size + 14}" '
                     f'text-anchor="middle">{vr:.4g}</text>')
        parts.append(f'<text x="{left - 6}" y="{_fmt(py(vg) + 4)}" '
                     f'text-anchor="end">{vg:.4g}</text>')
    parts.append(f'<text x="{left + size / 2}" y="{top + size + 30}" '
                 f'text-anchor="middle">tau_r</text>')
    parts.append(f'<text x="16" y="{top + size / 2}" text-anchor="middle" '
                 f'transform="rotate(-90 16 {top + size / 2})">tau_g</text>')
    parts.append(f'<text x="{left}" y="{top + size + 50}">rho={rho:g} w={cfg.w} n={cfg.n} '
                 f'dynamic={cfg.dynamic} grid={cfg.grid} reps={cfg.reps}</text>')

    lx = left + size + 60
    for k, name in enumerate(PALETTE):
        y = top + 10 + 20 * k
        parts.append(f'<rect x="{lx}" y="{y}" width="14" height="14" fill="{PALETTE[name]}" '
                     f'stroke="#333" stroke-width="0.5"/>')
        parts.append(f'<text x="{lx + 20}" y="{y + 11}">{name}</text>')
    y = top + 10 + 20 * len(PALETTE)
    parts.append(f'<rect x="{lx}" y="{y}" width="14" height="14" fill="none" stroke="#9c27b0" '
                 f'stroke-width="1.5"/><text x="{lx + 20}" y="{y + 11}">undecided</text>')
    parts.append(f'<line x1="{lx}" y1="{y + 30}" x2="{lx + 14}" y2="{y + 30}" stroke="black" '
                 f'stroke-width="1.6"/><text x="{lx + 20}" y="{y + 34}">domination</text>')
    parts.append("</svg>\n")
    svg = "\n".join(parts)
    _write(svg, out)
    return svg


# -- ring history -------------------------------------------------------------------

@dataclass
class RingLayers:
    initial: np.ndarray          # colours at time 0
    unhappy: np.ndarray          # bool, unhappy at time 0
    final: np.ndarray            # colours after replaying every recorded event
    event_bins: np.ndarray       # (time bins, angle bins) int8: -1 empty, else last colour
    steps: int


def ring_layers(record: RunRecord, time_bins: int = 200, angle_bins: int = 1000) -> RingLayers:
    n = record.n
    ring = Ring(record.initial_colors.copy(), record.w)
    unhappy = status_codes(ring, record.scenario) != 0
    bins = np.full((time_bins, min(n, angle_bins)), -1, dtype=np.int8)
    if record.events_recorded and len(record.event_time):
        final = replay(record.initial_colors, record.event_node, record.event_color)
        t = record.event_time - record.event_time[0]
        tb = np.minimum(t * time_bins // (int(t[-1]) + 1), time_bins - 1)
        ab = record.event_node * bins.shape[1] // n
        # keep the latest event per cell
        flat = tb * bins.shape[1] + ab
        rev = flat[::-1]
        cells, first = np.unique(rev, return_index=True)
        last = len(flat) - 1 - first
        bins.flat[cells] = record.event_color[last].astype(np.int8)
    else:
        final = record.final_colors.copy()
    return RingLayers(record.initial_colors.copy(), unhappy, final, bins, record.steps)


def _blend(frac: float) -> str:
    rgb = [round(r + (g - r) * frac) for g, r in zip(GREEN, RED)]
    return "#%02x%02x%02x" % tuple(rgb)


def _grey(frac: float) -> str | None:
    """Darker for a larger unhappy share; None (blank) when nobody is unhappy."""
    if frac <= 0:
        return None
    v = round(200 - 170 * float(frac))
    return "#%02x%02x%02x" % (v, v, v)


def _arc(cx: float, cy: float, r0: float, r1: float, a0: float, a1: float, fill: str) -> str:
    if a1 - a0 >= 2 * math.pi - 1e-9:
        mid, wid = (r0 + r1) / 2, r1 - r0
        return (f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="{_fmt(mid)}" fill="none" '
                f'stroke="{fill}" stroke-width="{_fmt(wid)}"/>')
    large = 1 if a1 - a0 > math.pi else 0
    c0, s0, c1, s1 = math.cos(a0), math.sin(a0), math.cos(a1), math.sin(a1)
    return (f'<path d="M{_fmt(cx + r1 * c0)},{_fmt(cy + r1 * s0)} '
            f'A{_fmt(r1)},{_fmt(r1)} 0 {large} 1 {_fmt(cx + r1 * c1)},{_fmt(cy + r1 * s1)} '
            f'L{_fmt(cx + r0 * c1)},{_fmt(cy + r0 * s1)} '
            f'A{_fmt(r0)},{_fmt(r0)} 0 {large} 0 {_fmt(cx + r0 * c0)},{_fmt(cy + r0 * s0)} Z" '
            f'fill="{fill}"/>')


def _annulus(values: np.ndarray, cx, cy, r0, r1, color_of) -> list[str]:
    """Arcs for a per-node layer, merging equal neighbours. values may be float
    fractions after aggregation."""
    m = len(values)
    step = 2 * math.pi / m
    out = []
    k = 0
    while k < m:
        e = k
        while e + 1 < m and values[e + 1] == values[k]:
            e += 1
        fill = color_of(values[k])
        if fill is not None:
            a0 = -math.pi / 2 + k * step
            a1 = -math.pi / 2 + (e + 1) * step
            out.append(_arc(cx, cy, r0, r1, a0, a1, fill))
        k = e + 1
    return out


def _aggregate(values: np.ndarray, bins: int) -> np.ndarray:
    """Mean of values over `bins` equal arcs, rounded to 1/100 so runs merge."""
    n = len(values)
    if n <= bins:
        return values.astype(float)
    edges = (np.arange(bins + 1) * n) // bins
    sums = np.add.reduceat(values.astype(float), edges[:-1])
    return np.round(sums / np.diff(edges), 2)


def render_ring(record: RunRecord, out: str | Path | IO[str]) -> str:
    """Radial history: initial colours inside, then the initially unhappy nodes,
    then recorded changes with time running outward, then the final colours.

    Rings longer than 10^4 nodes are drawn with arcs averaged over equal blocks.
    """
    if not record.events_recorded:
        raise ValueError("the run record has no event log; rerun with events on")
    layers = ring_layers(record)
    size = 720
    cx = cy = size / 2
    parts = _header(size, size + 30)
    bins = min(record.n, MAX_ARCS)
    color = lambda v: _blend(float(v))  # noqa: E731

    init = _aggregate(layers.initial, bins)
    parts += _annulus(init, cx, cy, 90, 130, color)
    unh = _aggregate(layers.unhappy, bins)
    parts += _annulus(unh, cx, cy, 134, 146, _grey)

    r0, r1 = 152, 300
    dr = (r1 - r0) / layers.event_bins.shape[0]
    for ti, row in enumerate(layers.event_bins):
        if (row >= 0).any():
            parts += _annulus(row, cx, cy, r0 + ti * dr, r0 + (ti + 1) * dr,
                              lambda v: None if v < 0 else _blend(float(v)))

    fin = _aggregate(layers.final, bins)
    parts += _annulus(fin, cx, cy, 306, 346, color)
    s = record.scenario
    parts.append(f'<text x="10" y="{size + 20}">{s} w={record.w} n={record.n} '
                 f'dynamic={record.dynamic} steps={record.steps} '
                 f'end={record.termination.value}</text>')
    parts.append("</svg>\n")
    svg = "\n".join(parts)
    _write(svg, out)
    return svg
