"""Deterministic SVG scatter plots with decision-region shading.

Pure string assembly: fixed palette, colors assigned by sorted label,
coordinates rounded to two decimals, no timestamps -- identical inputs
produce identical bytes.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .classify import DecisionGrid

# Colorblind-leaning palette; cycled when labels outnumber it.
PALETTE = (
    "#4477aa",
    "#ee6677",
    "#228833",
    "#ccbb44",
    "#66ccee",
    "#aa3377",
    "#bbbbbb",
    "#222255",
    "#225555",
    "#552255",
    "#665533",
    "#8855ee",
)

_MARKER_RADIUS = 4.0


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def color_order(labels: Sequence) -> dict:
    """Fixed label -> color assignment: sorted labels, palette order."""
    ordered = sorted({str(l) for l in labels})
    return {label: PALETTE[i % len(PALETTE)] for i, label in enumerate(ordered)}


def emit_svg(
    points_2d,
    labels: Sequence,
    grid: DecisionGrid | None = None,
    legend: Sequence | None = None,
    markers: Sequence[str] | None = None,
    title: str | None = None,
    width: int = 640,
    height: int = 480,
) -> str:
    """Render points (and optionally shaded decision regions) as SVG text.

    ``markers`` holds one of "circle", "square", "open" per point;
    open markers are white with a black contour, for samples foreign to
    the training set.  ``legend`` overrides which labels get legend
    entries (default: every distinct label, sorted).
    """
    points = np.asarray(points_2d, dtype=np.float64).reshape(-1, 2)
    labels = [str(l) for l in labels]
    if len(points) != len(labels):
        raise ValueError("one label per point required")
    if markers is None:
        markers = ["circle"] * len(points)
    markers = list(markers)
    if len(markers) != len(points):
        raise ValueError("one marker per point required")

    legend_labels = sorted(
        {str(l) for l in legend}
        if legend is not None
        else set(labels) | ({str(l) for l in grid.labels.ravel()} if grid is not None else set())
    )
    colors = color_order(
        list(legend_labels)
        + labels
        + ([str(l) for l in grid.labels.ravel()] if grid is not None else [])
    )

    if grid is not None:
        xmin, xmax, ymin, ymax = grid.bounds
    elif len(points):
        xmin, xmax = float(points[:, 0].min()), float(points[:, 0].max())
        ymin, ymax = float(points[:, 1].min()), float(points[:, 1].max())
        pad_x = (xmax - xmin) * 0.05 or 1.0
        pad_y = (ymax - ymin) * 0.05 or 1.0
        xmin, xmax = xmin - pad_x, xmax + pad_x
        ymin, ymax = ymin - pad_y, ymax + pad_y
    else:
        xmin, xmax, ymin, ymax = -1.0, 1.0, -1.0, 1.0

    margin = 10.0
    legend_width = 150.0 if legend_labels else 0.0
    plot_w = width - 2 * margin - legend_width
    plot_h = height - 2 * margin

    def to_px(x: float, y: float) -> tuple[float, float]:
        px = margin + (x - xmin) / (xmax - xmin) * plot_w
        py = margin + (ymax - y) / (ymax - ymin) * plot_h
        return px, py

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>',
    ]
    if title:
        parts.append(
            f'<text x="{_fmt(margin)}" y="{_fmt(margin + 4)}" font-family="sans-serif" '
            f'font-size="12" fill="#000000">{_xml_escape(title)}</text>'
        )

    if grid is not None:
        ny, nx = grid.shape
        cell_w = plot_w / nx
        cell_h = plot_h / ny
        parts.append('<g fill-opacity="0.25" stroke="none">')
        for iy in range(ny):
            for ix in range(nx):
                label = str(grid.labels[iy, ix])
                cx = xmin + (ix + 0.5) * (xmax - xmin) / nx
                cy = ymin + (iy + 0.5) * (ymax - ymin) / ny
                px, py = to_px(cx, cy)
                parts.append(
                    f'<rect x="{_fmt(px - cell_w / 2)}" y="{_fmt(py - cell_h / 2)}" '
                    f'width="{_fmt(cell_w)}" height="{_fmt(cell_h)}" '
                    f'fill="{colors[label]}"/>'
                )
        parts.append("</g>")

    parts.append(
        f'<rect x="{_fmt(margin)}" y="{_fmt(margin)}" width="{_fmt(plot_w)}" '
        f'height="{_fmt(plot_h)}" fill="none" stroke="#444444"/>'
    )

    for (x, y), label, marker in zip(points, labels, markers):
        px, py = to_px(float(x), float(y))
        if marker == "open":
            parts.append(
                f'<circle cx="{_fmt(px)}" cy="{_fmt(py)}" r="{_fmt(_MARKER_RADIUS)}" '
                f'fill="#ffffff" stroke="#000000" stroke-width="1.2"/>'
            )
        elif marker == "square":
            half = _MARKER_RADIUS
            parts.append(
                f'<rect x="{_fmt(px - half)}" y="{_fmt(py - half)}" '
                f'width="{_fmt(2 * half)}" height="{_fmt(2 * half)}" '
                f'fill="{colors[label]}" stroke="#333333" stroke-width="0.5"/>'
            )
        else:
            parts.append(
                f'<circle cx="{_fmt(px)}" cy="{_fmt(py)}" r="{_fmt(_MARKER_RADIUS)}" '
                f'fill="{colors[label]}" stroke="#333333" stroke-width="0.5"/>'
            )

    if legend_labels:
        lx = width - margin - legend_width + 10
        ly = margin + 10
        parts.append('<g class="legend" font-family="sans-serif" font-size="11">')
        for i, label in enumerate(legend_labels):
            yy = ly + i * 18
            parts.append(
                f'<rect x="{_fmt(lx)}" y="{_fmt(yy)}" width="12" height="12" '
                f'fill="{colors[label]}"/>'
            )
            parts.append(
                f'<text x="{_fmt(lx + 18)}" y="{_fmt(yy + 10)}" fill="#000000">'
                f"{_xml_escape(label)}</text>"
            )
        parts.append("</g>")

    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _xml_escape(text: str) -> str:
    return (
        text.replace("&", "&amp;")
        .replace("<", "&lt;")
        .replace(">", "&gt;")
        .replace('"', "&quot;")
    )
