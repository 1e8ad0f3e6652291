"""CSV, SVG, and manifest emission.

Everything written here is a pure function of the data passed in, so reruns
with the same seed produce byte-identical files (the manifest is the one
exception: it records wall-clock timestamps on purpose). SVG is generated
directly rather than through a plotting library to keep the bytes stable
and the coordinates machine-checkable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .metrics import HistogramSet, MetricsSeries


def _fmt(value: float) -> str:
    """Format a float with 12 significant digits (round-trip stable)."""
    return f"{float(value):.12g}"


def emit_timeseries_csv(series: MetricsSeries, path) -> Path:
    """Write the sampled metrics as CSV: step,P_O,P_A,mean_dissonance."""
    if len(series) == 0:
        raise ValueError("cannot emit an empty metrics series")
    series.validate()
    lines = ["step,P_O,P_A,mean_dissonance"]
    for i in range(len(series)):
        lines.append(f"{int(series.steps[i])},{_fmt(series.p_o[i])},"
                     f"{_fmt(series.p_a[i])},{_fmt(series.mean_dissonance[i])}")
    path = Path(path)
    path.write_text("\n".join(lines) + "\n")
    return path


def parse_timeseries_csv(path) -> MetricsSeries:
    """Read back a timeseries CSV (round-trip check and plotting helper)."""
    lines = Path(path).read_text().strip().splitlines()
    if not lines or lines[0] != "step,P_O,P_A,mean_dissonance":
        raise ValueError(f"{path}: not a timeseries CSV")
    steps, p_o, p_a, diss = [], [], [], []
    for line in lines[1:]:
        s, a, b, d = line.split(",")
        steps.append(int(s))
        p_o.append(float(a))
        p_a.append(float(b))
        diss.append(float(d))
    return MetricsSeries(steps=np.asarray(steps, np.int64), p_o=np.asarray(p_o),
                         p_a=np.asarray(p_a), mean_dissonance=np.asarray(diss))


def emit_sweep_csv(result, path) -> Path:
    """Write cell-averaged sweep results: alpha,beta,mean_P_O,mean_P_A."""
    lines = ["alpha,beta,mean_P_O,mean_P_A"]
    for ai, a in enumerate(result.alpha_values):
        for bi, b in enumerate(result.beta_values):
            lines.append(f"{_fmt(a)},{_fmt(b)},{_fmt(result.mean_p_o[ai, bi])},"
                         f"{_fmt(result.mean_p_a[ai, bi])}")
    path = Path(path)
    path.write_text("\n".join(lines) + "\n")
    return path


def emit_histograms_csv(hists: HistogramSet, path) -> Path:
    """Write the snapshot histograms, one row per bin."""
    lines = ["bin_lo,bin_hi,latte_group_a,latte_group_b,group_a_latte,ingroup,outgroup"]
    edges = hists.bin_edges
    for i in range(len(edges) - 1):
        lines.append(",".join([
            _fmt(edges[i]), _fmt(edges[i + 1]),
            str(int(hists.latte_group_a[i])), str(int(hists.latte_group_b[i])),
            str(int(hists.group_a_latte[i])),
            str(int(hists.ingroup[i])), str(int(hists.outgroup[i])),
        ]))
    path = Path(path)
    path.write_text("\n".join(lines) + "\n")
    return path


# ---------------------------------------------------------------------------
# SVG primitives

_WIDTH = 640
_HEIGHT = 420
_MARGIN_L = 70
_MARGIN_R = 30
_MARGIN_T = 40
_MARGIN_B = 55


def _svg_header(width=_WIDTH, height=_HEIGHT) -> list:
    return [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}">',
            f'<rect width="{width}" height="{height}" fill="white"/>']


def _axis_ticks(lo: float, hi: float, count: int = 5) -> list:
    if hi == lo:
        return [lo]
    return [lo + (hi - lo) * k / (count - 1) for k in range(count)]


def _axes(parts: list, x_lo, x_hi, y_lo, y_hi, xlabel: str, ylabel: str, title: str):
    x0, x1 = _MARGIN_L, _WIDTH - _MARGIN_R
    y0, y1 = _HEIGHT - _MARGIN_B, _MARGIN_T
    parts.append(f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>')
    parts.append(f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>')
    for tx in _axis_ticks(x_lo, x_hi):
        px = x0 + (x1 - x0) * ((tx - x_lo) / (x_hi - x_lo) if x_hi != x_lo else 0.5)
        parts.append(f'<line x1="{px:.2f}" y1="{y0}" x2="{px:.2f}" y2="{y0 + 5}" stroke="black"/>')
        parts.append(f'<text x="{px:.2f}" y="{y0 + 20}" font-size="12" '
                     f'text-anchor="middle">{tx:.3g}</text>')
    for ty in _axis_ticks(y_lo, y_hi):
        py = y0 - (y0 - y1) * ((ty - y_lo) / (y_hi - y_lo) if y_hi != y_lo else 0.5)
        parts.append(f'<line x1="{x0 - 5}" y1="{py:.2f}" x2="{x0}" y2="{py:.2f}" stroke="black"/>')
        parts.append(f'<text x="{x0 - 8}" y="{py + 4:.2f}" font-size="12" '
                     f'text-anchor="end">{ty:.3g}</text>')
    parts.append(f'<text x="{(x0 + x1) / 2:.1f}" y="{_HEIGHT - 12}" font-size="14" '
                 f'text-anchor="middle">{xlabel}</text>')
    parts.append(f'<text x="18" y="{(y0 + y1) / 2:.1f}" font-size="14" text-anchor="middle" '
                 f'transform="rotate(-90 18 {(y0 + y1) / 2:.1f})">{ylabel}</text>')
    parts.append(f'<text x="{(x0 + x1) / 2:.1f}" y="24" font-size="15" '
                 f'text-anchor="middle">{title}</text>')


def line_plot_svg(xs: Sequence[float], ys: Sequence[float], path, *,
                  title: str, xlabel: str, ylabel: str,
                  y_range: tuple | None = None) -> Path:
    """Single-series line plot with labelled axes."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.size == 0 or xs.size != ys.size:
        raise ValueError("line plot needs matching non-empty x and y data")
    x_lo, x_hi = float(xs.min()), float(xs.max())
    if y_range is not None:
        y_lo, y_hi = y_range
    else:
        y_lo, y_hi = float(ys.min()), float(ys.max())
        if y_lo == y_hi:
            y_lo, y_hi = y_lo - 0.5, y_hi + 0.5
    x0, x1 = _MARGIN_L, _WIDTH - _MARGIN_R
    y0, y1 = _HEIGHT - _MARGIN_B, _MARGIN_T
    parts = _svg_header()
    _axes(parts, x_lo, x_hi, y_lo, y_hi, xlabel, ylabel, title)
    pts = []
    for x, y in zip(xs, ys):
        px = x0 + (x1 - x0) * ((x - x_lo) / (x_hi - x_lo) if x_hi != x_lo else 0.5)
        py = y0 - (y0 - y1) * (y - y_lo) / (y_hi - y_lo)
        pts.append(f"{px:.2f},{py:.2f}")
    parts.append(f'<polyline points="{" ".join(pts)}" fill="none" '
                 f'stroke="#1f77b4" stroke-width="1.5"/>')
    parts.append("</svg>")
    path = Path(path)
    path.write_text("\n".join(parts) + "\n")
    return path


_SERIES_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


def histogram_svg(bin_edges: Sequence[float], series: list, path, *,
                  title: str, xlabel: str, ylabel: str = "count") -> Path:
    """Bar chart over fixed bins; `series` is a list of (label, counts) pairs."""
    edges = np.asarray(bin_edges, dtype=np.float64)
    if edges.size < 3:
        raise ValueError("histogram needs at least 2 bins")
    if not series:
        raise ValueError("histogram needs at least one series")
    n_bins = edges.size - 1
    for label, counts in series:
        if len(counts) != n_bins:
            raise ValueError(f"series {label!r} has {len(counts)} bins, expected {n_bins}")
    x_lo, x_hi = float(edges[0]), float(edges[-1])
    y_hi = max(1.0, float(max(max(counts) for _, counts in series)))
    x0, x1 = _MARGIN_L, _WIDTH - _MARGIN_R
    y0, y1 = _HEIGHT - _MARGIN_B, _MARGIN_T
    parts = _svg_header()
    _axes(parts, x_lo, x_hi, 0.0, y_hi, xlabel, ylabel, title)
    n_series = len(series)
    for si, (label, counts) in enumerate(series):
        color = _SERIES_COLORS[si % len(_SERIES_COLORS)]
        for b in range(n_bins):
            left = x0 + (x1 - x0) * (edges[b] - x_lo) / (x_hi - x_lo)
            right = x0 + (x1 - x0) * (edges[b + 1] - x_lo) / (x_hi - x_lo)
            slot = (right - left) / n_series
            bx = left + si * slot
            h = (y0 - y1) * counts[b] / y_hi
            parts.append(f'<rect class="bar" x="{bx:.2f}" y="{y0 - h:.2f}" '
                         f'width="{max(slot - 1.0, 0.5):.2f}" height="{h:.2f}" '
                         f'fill="{color}" fill-opacity="0.8"/>')
        parts.append(f'<rect x="{x1 - 150}" y="{y1 + 18 * si}" width="12" height="12" fill="{color}"/>')
        parts.append(f'<text x="{x1 - 133}" y="{y1 + 18 * si + 10}" font-size="12">{label}</text>')
    parts.append("</svg>")
    path = Path(path)
    path.write_text("\n".join(parts) + "\n")
    return path


# Perceptually ordered anchor colors (dark violet to yellow).
_CMAP_ANCHORS = ((68, 1, 84), (59, 82, 139), (33, 145, 140), (94, 201, 98), (253, 231, 37))


def _colormap(t: float) -> str:
    t = min(1.0, max(0.0, t))
    pos = t * (len(_CMAP_ANCHORS) - 1)
    i = min(int(pos), len(_CMAP_ANCHORS) - 2)
    frac = pos - i
    c0, c1 = _CMAP_ANCHORS[i], _CMAP_ANCHORS[i + 1]
    r, g, b = (round(a + (bb - a) * frac) for a, bb in zip(c0, c1))
    return f"#{r:02x}{g:02x}{b:02x}"


def heatmap_svg(alpha_values: Sequence[float], beta_values: Sequence[float],
                grid: np.ndarray, path, *, title: str,
                vmin: float = 0.0, vmax: float = 2.0) -> Path:
    """Grid heatmap (alpha on y, beta on x) with a fixed [vmin, vmax] color scale."""
    grid = np.asarray(grid, dtype=np.float64)
    n_a, n_b = len(alpha_values), len(beta_values)
    if grid.shape != (n_a, n_b):
        raise ValueError(f"grid shape {grid.shape} does not match {(n_a, n_b)}")
    x0, x1 = _MARGIN_L, _WIDTH - _MARGIN_R - 70  # reserve room for the scale bar
    y0, y1 = _HEIGHT - _MARGIN_B, _MARGIN_T
    cell_w = (x1 - x0) / n_b
    cell_h = (y0 - y1) / n_a
    parts = _svg_header()
    for ai in range(n_a):
        for bi in range(n_b):
            t = (grid[ai, bi] - vmin) / (vmax - vmin) if vmax > vmin else 0.0
            cx = x0 + bi * cell_w
            # alpha increases upward
            cy = y0 - (ai + 1) * cell_h
            parts.append(f'<rect class="cell" x="{cx:.2f}" y="{cy:.2f}" '
                         f'width="{cell_w:.2f}" height="{cell_h:.2f}" '
                         f'fill="{_colormap(t)}"/>')
    for bi, b in enumerate(beta_values):
        px = x0 + (bi + 0.5) * cell_w
        parts.append(f'<text x="{px:.2f}" y="{y0 + 16}" font-size="11" '
                     f'text-anchor="middle">{b:.3g}</text>')
    for ai, a in enumerate(alpha_values):
        py = y0 - (ai + 0.5) * cell_h
        parts.append(f'<text x="{x0 - 6}" y="{py + 4:.2f}" font-size="11" '
                     f'text-anchor="end">{a:.3g}</text>')
    parts.append(f'<text x="{(x0 + x1) / 2:.1f}" y="{_HEIGHT - 12}" font-size="14" '
                 f'text-anchor="middle">coherence strength</text>')
    parts.append(f'<text x="18" y="{(y0 + y1) / 2:.1f}" font-size="14" text-anchor="middle" '
                 f'transform="rotate(-90 18 {(y0 + y1) / 2:.1f})">social influence</text>')
    parts.append(f'<text x="{(x0 + x1) / 2:.1f}" y="24" font-size="15" '
                 f'text-anchor="middle">{title}</text>')
    # color scale bar
    bar_x = x1 + 20
    bar_w = 16
    n_seg = 32
    seg_h = (y0 - y1) / n_seg
    for k in range(n_seg):
        t = (k + 0.5) / n_seg
        sy = y0 - (k + 1) * seg_h
        parts.append(f'<rect class="scale" x="{bar_x}" y="{sy:.2f}" width="{bar_w}" '
                     f'height="{seg_h + 0.5:.2f}" fill="{_colormap(t)}"/>')
    for frac in (0.0, 0.5, 1.0):
        sy = y0 - (y0 - y1) * frac
        parts.append(f'<text x="{bar_x + bar_w + 4}" y="{sy + 4:.2f}" '
                     f'font-size="11">{vmin + (vmax - vmin) * frac:.3g}</text>')
    parts.append("</svg>")
    path = Path(path)
    path.write_text("\n".join(parts) + "\n")
    return path


# ---------------------------------------------------------------------------
# Run manifest

@dataclass
class RunManifest:
    """Reproducibility record written next to every output set."""

    command: str
    config: dict
    seed: int
    version: str
    started: str
    finished: str
    files: list = field(default_factory=list)

    def write(self, path) -> Path:
        path = Path(path)
        payload = {
            "command": self.command,
            "config": self.config,
            "seed": self.seed,
            "tool_version": self.version,
            "started": self.started,
            "finished": self.finished,
            "files": sorted(self.files),
        }
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        return path
