"""Dependency-free SVG plots.

The figures here are box plots of per-ordering mean accuracies, one box per
classifier cell, with an optional star marking the accuracy reached by the
trained affine encoding. Output is plain SVG text built deterministically,
so two runs over the same numbers produce byte-identical files.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class BoxGroup:
    """One box: a label, the values it summarizes, an optional star marker."""

    label: str
    values: np.ndarray
    marker: float | None = None


def five_number(values):
    """Min, quartiles, max with linear interpolation."""
    q = np.percentile(np.asarray(values, dtype=float), [0, 25, 50, 75, 100], method="linear")
    return {"min": q[0], "q1": q[1], "median": q[2], "q3": q[3], "max": q[4]}


def _nice_ticks(lo, hi, target=6):
    span = hi - lo
    raw = span / max(target - 1, 1)
    magnitude = 10.0 ** np.floor(np.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        step = mult * magnitude
        if step >= raw:
            break
    first = np.ceil(lo / step) * step
    ticks = np.arange(first, hi + step / 2, step)
    return [float(t) for t in ticks]


def _fmt(v):
    return f"{v:.2f}".rstrip("0").rstrip(".") if "." in f"{v:.2f}" else f"{v:.2f}"


def emit_boxplot_svg(groups, title="", y_label="accuracy", width=640, height=420, path=None):
    """Render box-and-whisker groups to an SVG string (and optionally a file).

    Whiskers span the full range, the box the interquartile range, and a
    horizontal bar marks the median. A group's ``marker`` is drawn as a star.
    """
    if not groups:
        raise ValueError("nothing to plot")
    margin_l, margin_r, margin_t, margin_b = 64, 16, 40 if title else 16, 72
    plot_w = width - margin_l - margin_r
    plot_h = height - margin_t - margin_b

    all_vals = np.concatenate([np.asarray(g.values, dtype=float).ravel() for g in groups])
    marks = [g.marker for g in groups if g.marker is not None]
    lo = min(all_vals.min(), min(marks) if marks else np.inf)
    hi = max(all_vals.max(), max(marks) if marks else -np.inf)
    pad = max((hi - lo) * 0.08, 1e-3)
    lo, hi = lo - pad, hi + pad

    def ypix(v):
        return margin_t + (hi - v) / (hi - lo) * plot_h

    n = len(groups)
    slot = plot_w / n
    box_w = slot * 0.42

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" font-family="sans-serif">',
           f'<rect width="{width}" height="{height}" fill="white"/>']
    if title:
        out.append(f'<text x="{width / 2:.1f}" y="24" font-size="15" text-anchor="middle">'
                   f'{_escape(title)}</text>')

    for tick in _nice_ticks(lo, hi):
        y = ypix(tick)
        out.append(f'<line x1="{margin_l}" y1="{y:.2f}" x2="{width - margin_r}" y2="{y:.2f}" '
                   f'stroke="#dddddd" stroke-width="1"/>')
        out.append(f'<text x="{margin_l - 8}" y="{y + 4:.2f}" font-size="11" '
                   f'text-anchor="end">{_fmt(tick)}</text>')
    out.append(f'<line x1="{margin_l}" y1="{margin_t}" x2="{margin_l}" '
               f'y2="{margin_t + plot_h}" stroke="black" stroke-width="1"/>')
    out.append(f'<line x1="{margin_l}" y1="{margin_t + plot_h}" x2="{width - margin_r}" '
               f'y2="{margin_t + plot_h}" stroke="black" stroke-width="1"/>')
    out.append(f'<text x="16" y="{margin_t + plot_h / 2:.1f}" font-size="12" text-anchor="middle" '
               f'transform="rotate(-90 16 {margin_t + plot_h / 2:.1f})">{_escape(y_label)}</text>')

    for i, group in enumerate(groups):
        cx = margin_l + slot * (i + 0.5)
        stats = five_number(group.values)
        y_min, y_q1 = ypix(stats["min"]), ypix(stats["q1"])
        y_med, y_q3, y_max = ypix(stats["median"]), ypix(stats["q3"]), ypix(stats["max"])
        cap = box_w * 0.5
        out.append(f'<line x1="{cx:.2f}" y1="{y_max:.2f}" x2="{cx:.2f}" y2="{y_q3:.2f}" '
                   f'stroke="black" stroke-width="1"/>')
        out.append(f'<line x1="{cx:.2f}" y1="{y_q1:.2f}" x2="{cx:.2f}" y2="{y_min:.2f}" '
                   f'stroke="black" stroke-width="1"/>')
        for y_cap in (y_max, y_min):
            out.append(f'<line x1="{cx - cap / 2:.2f}" y1="{y_cap:.2f}" x2="{cx + cap / 2:.2f}" '
                       f'y2="{y_cap:.2f}" stroke="black" stroke-width="1"/>')
        out.append(f'<rect x="{cx - box_w / 2:.2f}" y="{y_q3:.2f}" width="{box_w:.2f}" '
                   f'height="{max(y_q1 - y_q3, 0.5):.2f}" fill="#9ecae1" stroke="black" '
                   f'stroke-width="1"/>')
        out.append(f'<line x1="{cx - box_w / 2:.2f}" y1="{y_med:.2f}" x2="{cx + box_w / 2:.2f}" '
                   f'y2="{y_med:.2f}" stroke="black" stroke-width="1.5"/>')
        if group.marker is not None:
            out.append(f'<text x="{cx:.2f}" y="{ypix(group.marker) + 5:.2f}" font-size="16" '
                       f'text-anchor="middle" fill="#d62728">&#9733;</text>')
        out.append(f'<text x="{cx:.2f}" y="{margin_t + plot_h + 16:.2f}" font-size="11" '
                   f'text-anchor="middle">{_escape(group.label)}</text>')

    out.append("</svg>")
    text = "\n".join(out) + "\n"
    if path is not None:
        with open(path, "w") as handle:
            handle.write(text)
    return text


def _escape(text):
    return (str(text).replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;"))
