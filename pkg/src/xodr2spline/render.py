"""Deterministic SVG rendering of a converted road."""

from __future__ import annotations

import math

import numpy as np

from .errors import TooShortError


def _f(v: float) -> str:
    return format(float(v), ".9g")


def render_svg(result, oob_position: tuple[float, float] | None = None, size: int = 800) -> str:
    """SVG with the spline polyline, one dot per control point and an optional OOB marker.

    The drawing is y-up (world frame); the view box is the spline/control
    bounding box grown by 5% on every side.
    """
    spline = np.asarray(result.spline_points, dtype=float)[:, :2]
    if len(spline) < 2:
        raise TooShortError("rendering needs at least two spline points", getattr(result, "source_road_id", None))
    control = result.control_array()[:, :2]
    pts = np.vstack([spline, control] + ([np.array([oob_position])] if oob_position is not None else []))
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    span = np.maximum(hi - lo, 1.0)
    lo = lo - 0.05 * span
    span = span * 1.1
    diag = math.hypot(*span)
    stroke = diag / 400.0
    radius = diag / 250.0

    aspect = span[1] / span[0]
    width, height = (size, max(1, round(size * aspect))) if aspect <= 1 else (max(1, round(size / aspect)), size)
    # y is flipped by the group transform, so the view box starts at -max_y
    view = f"{_f(lo[0])} {_f(-(lo[1] + span[1]))} {_f(span[0])} {_f(span[1])}"
    road_id = getattr(result, "source_road_id", "")

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="{view}">',
        f"<title>road {road_id}</title>",
        '<g transform="scale(1,-1)">',
        '<polyline fill="none" stroke="#d4a20c" stroke-width="{}" points="{}"/>'.format(
            _f(stroke), " ".join(f"{_f(x)},{_f(y)}" for x, y in spline)
        ),
    ]
    for x, y in control:
        lines.append(f'<circle cx="{_f(x)}" cy="{_f(y)}" r="{_f(radius)}" fill="#c0392b"/>')
    if oob_position is not None:
        ox, oy = oob_position
        side = 3 * radius
        lines.append(
            f'<rect class="oob" x="{_f(ox - side / 2)}" y="{_f(oy - side / 2)}" width="{_f(side)}" '
            f'height="{_f(side)}" fill="none" stroke="#1f3bd1" stroke-width="{_f(stroke)}"/>'
        )
    lines += ["</g>", "</svg>", ""]
    return "\n".join(lines)
