"""Deterministic SVG chart rendering.

Every renderer is a pure function of (spec, data): no timestamps, no
randomness, fixed float formatting, so identical inputs produce
byte-identical SVG. Empty datasets render a labeled placeholder instead of
failing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import ChartDataError


class ChartKind(Enum):
    HISTOGRAM = "Histogram"
    TRAJECTORY_OVERLAY = "TrajectoryOverlay"
    FAILURE_TIMELINE = "FailureTimeline"
    TIME_SERIES = "TimeSeries"
    HEXBIN_WIND = "HexbinWind"
    SCATTER_MATRIX = "ScatterMatrix"
    PARALLEL_COORDINATES = "ParallelCoordinates"
    SCREE_PLOT = "ScreePlot"
    HEAT_MAP = "HeatMap"


@dataclass(frozen=True)
class ChartSpec:
    kind: ChartKind
    data: dict
    width: int = 640
    height: int = 420
    title: str = ""
    alpha: float = 0.15
    palette: tuple[str, ...] = (
        "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
        "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
    )


MARGIN = 42.0


def _fmt(x: float) -> str:
    if x == 0:
        return "0"
    text = f"{float(x):.6g}"
    return text


def _esc(text: str) -> str:
    return (str(text).replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
            .replace('"', "&quot;"))


class _Svg:
    def __init__(self, width: int, height: int):
        self.width = width
        self.height = height
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}">',
            f'<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>',
        ]

    def line(self, x1, y1, x2, y2, stroke="#333333", width=1.0, opacity=1.0):
        self.parts.append(
            f'<line x1="{_fmt(x1)}" y1="{_fmt(y1)}" x2="{_fmt(x2)}" y2="{_fmt(y2)}" '
            f'stroke="{stroke}" stroke-width="{_fmt(width)}" stroke-opacity="{_fmt(opacity)}"/>'
        )

    def rect(self, x, y, w, h, fill="#1f77b4", opacity=1.0, stroke="none"):
        self.parts.append(
            f'<rect x="{_fmt(x)}" y="{_fmt(y)}" width="{_fmt(w)}" height="{_fmt(h)}" '
            f'fill="{fill}" fill-opacity="{_fmt(opacity)}" stroke="{stroke}"/>'
        )

    def circle(self, cx, cy, r, fill="#1f77b4", opacity=1.0):
        self.parts.append(
            f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="{_fmt(r)}" '
            f'fill="{fill}" fill-opacity="{_fmt(opacity)}"/>'
        )

    def polyline(self, points, stroke="#1f77b4", width=1.0, opacity=1.0):
        coords = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in points)
        self.parts.append(
            f'<polyline points="{coords}" fill="none" stroke="{stroke}" '
            f'stroke-width="{_fmt(width)}" stroke-opacity="{_fmt(opacity)}"/>'
        )

    def polygon(self, points, fill="#1f77b4", opacity=1.0, stroke="#666666"):
        coords = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in points)
        self.parts.append(
            f'<polygon points="{coords}" fill="{fill}" fill-opacity="{_fmt(opacity)}" '
            f'stroke="{stroke}" stroke-width="0.5"/>'
        )

    def text(self, x, y, content, size=11, anchor="start", fill="#222222", rotate=None):
        transform = ""
        if rotate is not None:
            transform = f' transform="rotate({_fmt(rotate)} {_fmt(x)} {_fmt(y)})"'
        self.parts.append(
            f'<text x="{_fmt(x)}" y="{_fmt(y)}" font-family="sans-serif" font-size="{size}" '
            f'text-anchor="{anchor}" fill="{fill}"{transform}>{_esc(content)}</text>'
        )

    def render(self) -> str:
        return "\n".join(self.parts + ["</svg>"]) + "\n"


class _Scale:
    """Linear data-to-pixel mapping for one axis."""

    def __init__(self, lo: float, hi: float, pix_lo: float, pix_hi: float):
        if hi <= lo:
            hi = lo + 1.0
        self.lo, self.hi = lo, hi
        self.pix_lo, self.pix_hi = pix_lo, pix_hi

    def __call__(self, v: float) -> float:
        frac = (v - self.lo) / (self.hi - self.lo)
        return self.pix_lo + frac * (self.pix_hi - self.pix_lo)


def _frame(svg: _Svg, spec: ChartSpec):
    if spec.title:
        svg.text(spec.width / 2, 18, spec.title, size=13, anchor="middle")
    svg.line(MARGIN, spec.height - MARGIN, spec.width - 12, spec.height - MARGIN, stroke="#444444")
    svg.line(MARGIN, 26, MARGIN, spec.height - MARGIN, stroke="#444444")


def _heat_color(value: float) -> str:
    """White-to-blue ramp for a value in [0, 1]."""
    v = max(0.0, min(1.0, value))
    r = round(255 - 204 * v)
    g = round(255 - 136 * v)
    b = 255
    return f"#{r:02x}{g:02x}{b:02x}"


def _placeholder(spec: ChartSpec) -> str:
    svg = _Svg(spec.width, spec.height)
    if spec.title:
        svg.text(spec.width / 2, 18, spec.title, size=13, anchor="middle")
    svg.text(spec.width / 2, spec.height / 2, "no data", size=16, anchor="middle", fill="#888888")
    return svg.render()


def _need(data: dict, key: str, kind: ChartKind):
    if key not in data:
        raise ChartDataError(f"{kind.value} chart needs data[{key!r}]")
    return data[key]


def hexbin_counts(points, gridsize: int = 12):
    """Partition 2-D points into a hexagonal grid.

    Uses the two-offset-lattice assignment: each point goes to the nearest
    center of either the integer lattice or the half-offset lattice under
    the metric dx^2 + 3*dy^2, which tiles the plane hexagonally. Returns
    [(center_x, center_y, count)] in data coordinates, sorted by center.
    """
    pts = list(points)
    if not pts:
        return []
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    xmin, xmax = min(xs), max(xs)
    ymin, ymax = min(ys), max(ys)
    sx = (xmax - xmin) / gridsize or 1.0
    sy = (ymax - ymin) / gridsize or 1.0
    cells: dict[tuple[int, int, int], int] = {}
    for x, y in pts:
        px = (x - xmin) / sx
        py = (y - ymin) / sy
        ix1, iy1 = round(px), round(py)
        ix2, iy2 = math.floor(px), math.floor(py)
        d1 = (px - ix1) ** 2 + 3.0 * (py - iy1) ** 2
        d2 = (px - ix2 - 0.5) ** 2 + 3.0 * (py - iy2 - 0.5) ** 2
        key = (0, ix1, iy1) if d1 <= d2 else (1, ix2, iy2)
        cells[key] = cells.get(key, 0) + 1
    out = []
    for (lattice, i, j), count in cells.items():
        off = 0.5 if lattice else 0.0
        out.append((xmin + (i + off) * sx, ymin + (j + off) * sy, count))
    out.sort(key=lambda c: (c[0], c[1]))
    return out


def _render_histogram(spec: ChartSpec) -> str:
    labels = _need(spec.data, "labels", spec.kind)
    counts = _need(spec.data, "counts", spec.kind)
    if len(labels) != len(counts):
        raise ChartDataError("histogram labels and counts differ in length")
    if not labels:
        return _placeholder(spec)
    highlight = set(spec.data.get("highlight", ()))
    svg = _Svg(spec.width, spec.height)
    _frame(svg, spec)
    top = max(max(counts), 1)
    ys = _Scale(0, top, spec.height - MARGIN, 30)
    n = len(labels)
    slot = (spec.width - MARGIN - 12) / n
    for i, (label, count) in enumerate(zip(labels, counts)):
        x = MARGIN + i * slot
        color = "#d62728" if label in highlight else "#1f77b4"
        svg.rect(x + slot * 0.1, ys(count), slot * 0.8, ys(0) - ys(count), fill=color, opacity=0.85)
        if n <= 30:
            svg.text(x + slot / 2, spec.height - MARGIN + 13, label, size=9,
                     anchor="middle", rotate=45 if len(str(label)) > 4 else None)
    svg.text(MARGIN - 6, ys(top) + 4, _fmt(top), size=9, anchor="end")
    svg.text(MARGIN - 6, ys(0) + 4, "0", size=9, anchor="end")
    return svg.render()


def _render_trajectory_overlay(spec: ChartSpec) -> str:
    trajs = _need(spec.data, "trajectories", spec.kind)
    if not trajs:
        return _placeholder(spec)
    bw, bh = spec.data.get("bounds", (200, 200))
    svg = _Svg(spec.width, spec.height)
    if spec.title:
        svg.text(spec.width / 2, 18, spec.title, size=13, anchor="middle")
    xs = _Scale(0, bw, MARGIN, spec.width - 12)
    ys = _Scale(0, bh, 26, spec.height - 12)
    for x, y in spec.data.get("roads", ()):
        svg.rect(xs(x), ys(y), xs(1) - xs(0), ys(1) - ys(0), fill="#cccccc", opacity=0.8)
    for seq in trajs:
        if not seq:
            raise ChartDataError("trajectory overlay contains an empty path")
        pix = [(xs(x), ys(y)) for x, y in seq]
        svg.polyline(pix, stroke="#1f77b4", width=1.4, opacity=spec.alpha)
        svg.circle(pix[0][0], pix[0][1], 2.4, fill="#1f77b4", opacity=spec.alpha)
        svg.rect(pix[-1][0] - 2.2, pix[-1][1] - 2.2, 4.4, 4.4, fill="#1f77b4", opacity=spec.alpha)
    mean_path = spec.data.get("mean")
    if mean_path:
        svg.polyline([(xs(x), ys(y)) for x, y in mean_path], stroke="#d62728", width=2.0)
    return svg.render()


def _render_failure_timeline(spec: ChartSpec) -> str:
    rows = _need(spec.data, "rows", spec.kind)
    if not rows:
        return _placeholder(spec)
    t0 = spec.data.get("t_min", min((min(ts) for _, ts in rows if ts), default=0.0))
    t1 = spec.data.get("t_max", max((max(ts) for _, ts in rows if ts), default=1.0))
    svg = _Svg(spec.width, spec.height)
    if spec.title:
        svg.text(spec.width / 2, 18, spec.title, size=13, anchor="middle")
    xs = _Scale(t0, t1, MARGIN + 40, spec.width - 12)
    band = (spec.height - 40 - 12) / len(rows)
    for i, (label, ticks) in enumerate(rows):
        cy = 40 + i * band + band / 2
        svg.line(xs(t0), cy, xs(t1), cy, stroke="#dddddd")
        svg.text(MARGIN + 32, cy + 4, label, size=10, anchor="end")
        for t in ticks:
            svg.line(xs(t), cy - band * 0.35, xs(t), cy + band * 0.35,
                     stroke="#d62728", width=1.2)
    return svg.render()


def _render_time_series(spec: ChartSpec) -> str:
    points = _need(spec.data, "points", spec.kind)
    if not points:
        return _placeholder(spec)
    svg = _Svg(spec.width, spec.height)
    _frame(svg, spec)
    txs = [p[0] for p in points]
    tys = [p[1] for p in points]
    smoothed = spec.data.get("smoothed") or []
    all_y = tys + [p[1] for p in smoothed]
    xs = _Scale(min(txs), max(txs), MARGIN, spec.width - 12)
    ys = _Scale(min(min(all_y), 0.0), max(all_y), spec.height - MARGIN, 30)
    svg.polyline([(xs(t), ys(v)) for t, v in points], stroke="#777777", width=1.0)
    if smoothed:
        svg.polyline([(xs(t), ys(v)) for t, v in smoothed], stroke="#d62728", width=1.8)
    svg.text(MARGIN - 6, ys(max(all_y)) + 4, _fmt(max(all_y)), size=9, anchor="end")
    svg.text(MARGIN - 6, ys(0) + 4, "0", size=9, anchor="end")
    return svg.render()


def _render_hexbin(spec: ChartSpec) -> str:
    points = _need(spec.data, "points", spec.kind)
    if not points:
        return _placeholder(spec)
    gridsize = spec.data.get("gridsize", 12)
    cells = hexbin_counts(points, gridsize)
    top = max(c[2] for c in cells)
    xs_vals = [p[0] for p in points]
    ys_vals = [p[1] for p in points]
    svg = _Svg(spec.width, spec.height)
    _frame(svg, spec)
    xs = _Scale(min(xs_vals), max(xs_vals), MARGIN, spec.width - 12)
    ys = _Scale(min(ys_vals), max(ys_vals), spec.height - MARGIN, 30)
    span_x = (max(xs_vals) - min(xs_vals)) or 1.0
    span_y = (max(ys_vals) - min(ys_vals)) or 1.0
    rx = abs(xs(span_x / gridsize) - xs(0)) * 0.62
    ry = abs(ys(span_y / gridsize) - ys(0)) * 0.62
    for cx, cy, count in cells:
        px, py = xs(cx), ys(cy)
        verts = []
        for step in range(6):
            ang = math.radians(60 * step + 30)
            verts.append((px + rx * math.cos(ang), py + ry * math.sin(ang)))
        svg.polygon(verts, fill=_heat_color(count / top), opacity=0.9)
    svg.text(spec.width - 12, 22, f"max bin: {top}", size=10, anchor="end")
    svg.text(MARGIN - 6, ys(min(ys_vals)) + 4, _fmt(min(ys_vals)), size=9, anchor="end")
    svg.text(MARGIN - 6, ys(max(ys_vals)) + 4, _fmt(max(ys_vals)), size=9, anchor="end")
    return svg.render()


def _render_scatter_matrix(spec: ChartSpec) -> str:
    matrix = _need(spec.data, "matrix", spec.kind)
    if not len(matrix):
        return _placeholder(spec)
    rows = [list(map(float, row)) for row in matrix]
    dims = min(spec.data.get("dims", 5), len(rows[0]))
    colors = spec.data.get("colors") or [0] * len(rows)
    svg = _Svg(spec.width, spec.height)
    if spec.title:
        svg.text(spec.width / 2, 16, spec.title, size=13, anchor="middle")
    pad = 26.0
    cell_w = (spec.width - pad * 2) / dims
    cell_h = (spec.height - pad * 2) / dims
    mins = [min(r[d] for r in rows) for d in range(dims)]
    maxs = [max(r[d] for r in rows) for d in range(dims)]
    for i in range(dims):
        for j in range(dims):
            ox = pad + j * cell_w
            oy = pad + i * cell_h
            svg.rect(ox, oy, cell_w, cell_h, fill="none", stroke="#bbbbbb")
            if i == j:
                svg.text(ox + cell_w / 2, oy + cell_h / 2 + 4, f"dim {i + 1}",
                         size=10, anchor="middle")
                continue
            xsc = _Scale(mins[j], maxs[j], ox + 2, ox + cell_w - 2)
            ysc = _Scale(mins[i], maxs[i], oy + cell_h - 2, oy + 2)
            for row, color_idx in zip(rows, colors):
                color = spec.palette[int(color_idx) % len(spec.palette)]
                svg.circle(xsc(row[j]), ysc(row[i]), 1.4, fill=color, opacity=0.7)
    return svg.render()


def _render_parallel_coordinates(spec: ChartSpec) -> str:
    rows = _need(spec.data, "rows", spec.kind)
    if not len(rows):
        return _placeholder(spec)
    rows = [list(map(float, row)) for row in rows]
    d = len(rows[0])
    labels = spec.data.get("axis_labels") or [f"v{i + 1}" for i in range(d)]
    colors = spec.data.get("colors") or [0] * len(rows)
    svg = _Svg(spec.width, spec.height)
    if spec.title:
        svg.text(spec.width / 2, 16, spec.title, size=13, anchor="middle")
    mins = [min(r[i] for r in rows) for i in range(d)]
    maxs = [max(r[i] for r in rows) for i in range(d)]
    axis_x = [MARGIN + i * (spec.width - MARGIN - 20) / max(d - 1, 1) for i in range(d)]
    for i in range(d):
        svg.line(axis_x[i], 30, axis_x[i], spec.height - 30, stroke="#999999")
        svg.text(axis_x[i], spec.height - 14, labels[i], size=9, anchor="middle")
    for row, color_idx in zip(rows, colors):
        pts = []
        for i in range(d):
            span = maxs[i] - mins[i]
            frac = 0.5 if span == 0 else (row[i] - mins[i]) / span
            pts.append((axis_x[i], (spec.height - 30) - frac * (spec.height - 60)))
        color = spec.palette[int(color_idx) % len(spec.palette)]
        svg.polyline(pts, stroke=color, width=0.8, opacity=max(spec.alpha, 0.25))
    return svg.render()


def _render_scree(spec: ChartSpec) -> str:
    ratios = list(_need(spec.data, "ratios", spec.kind))
    cumulative = list(_need(spec.data, "cumulative", spec.kind))
    if not ratios:
        return _placeholder(spec)
    if len(cumulative) != len(ratios):
        raise ChartDataError("scree ratios and cumulative differ in length")
    svg = _Svg(spec.width, spec.height)
    _frame(svg, spec)
    n = len(ratios)
    xsc = _Scale(0, n, MARGIN, spec.width - 12)
    ysc = _Scale(0.0, 1.0, spec.height - MARGIN, 30)
    slot = xsc(1) - xsc(0)
    for i, ratio in enumerate(ratios):
        svg.rect(xsc(i) + slot * 0.15, ysc(ratio), slot * 0.7, ysc(0) - ysc(ratio),
                 fill="#1f77b4", opacity=0.85)
    svg.polyline([(xsc(i) + slot / 2, ysc(c)) for i, c in enumerate(cumulative)],
                 stroke="#d62728", width=1.6)
    for tick in (0.0, 0.5, 1.0):
        svg.text(MARGIN - 6, ysc(tick) + 4, _fmt(tick), size=9, anchor="end")
    return svg.render()


def _render_heat_map(spec: ChartSpec) -> str:
    values = _need(spec.data, "values", spec.kind)
    if not len(values):
        return _placeholder(spec)
    grid = [list(map(float, row)) for row in values]
    n_rows, n_cols = len(grid), len(grid[0])
    if any(len(row) != n_cols for row in grid):
        raise ChartDataError("heat map rows differ in length")
    row_labels = spec.data.get("row_labels") or [str(i) for i in range(n_rows)]
    col_labels = spec.data.get("col_labels") or [str(j) for j in range(n_cols)]
    svg = _Svg(spec.width, spec.height)
    if spec.title:
        svg.text(spec.width / 2, 16, spec.title, size=13, anchor="middle")
    top = max(max(row) for row in grid) or 1.0
    ox, oy = MARGIN + 18, 34.0
    cell_w = (spec.width - ox - 16) / n_cols
    cell_h = (spec.height - oy - 30) / n_rows
    for i, row in enumerate(grid):
        for j, value in enumerate(row):
            svg.rect(ox + j * cell_w, oy + i * cell_h, cell_w, cell_h,
                     fill=_heat_color(value / top), stroke="#ffffff")
            svg.text(ox + j * cell_w + cell_w / 2, oy + i * cell_h + cell_h / 2 + 3,
                     f"{value:.2f}", size=8, anchor="middle")
        svg.text(ox - 4, oy + i * cell_h + cell_h / 2 + 3, row_labels[i], size=9, anchor="end")
    for j in range(n_cols):
        svg.text(ox + j * cell_w + cell_w / 2, spec.height - 12, col_labels[j],
                 size=9, anchor="middle")
    return svg.render()


_RENDERERS = {
    ChartKind.HISTOGRAM: _render_histogram,
    ChartKind.TRAJECTORY_OVERLAY: _render_trajectory_overlay,
    ChartKind.FAILURE_TIMELINE: _render_failure_timeline,
    ChartKind.TIME_SERIES: _render_time_series,
    ChartKind.HEXBIN_WIND: _render_hexbin,
    ChartKind.SCATTER_MATRIX: _render_scatter_matrix,
    ChartKind.PARALLEL_COORDINATES: _render_parallel_coordinates,
    ChartKind.SCREE_PLOT: _render_scree,
    ChartKind.HEAT_MAP: _render_heat_map,
}


def render_chart(spec: ChartSpec) -> str:
    """Render a chart spec to an SVG document string."""
    renderer = _RENDERERS.get(spec.kind)
    if renderer is None:
        raise ChartDataError(f"unknown chart kind {spec.kind!r}")
    return renderer(spec)


def save_chart(path, spec: ChartSpec) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(render_chart(spec))
