"""Reference-line evaluation, elevation, lane widths and lateral offsets."""

from __future__ import annotations

import bisect
import math
import warnings
from typing import NamedTuple

import numpy as np

from .errors import GeometryWarning, NoLaneSectionError, NonFiniteError, OutOfRangeError
from .ingest import Arc, GeometrySegment, Lane, Line, ParamPoly3, Poly3, Road, Spiral

RANGE_SLACK = 1e-9
SPIRAL_TOL = 1e-9
_MAX_PANELS = 1 << 16

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


class Pose(NamedTuple):
    x: float
    y: float
    hdg: float


def normalize_angle(a: float) -> float:
    """Map ``a`` into (-pi, pi]."""
    a = math.remainder(a, 2.0 * math.pi)
    return math.pi if a == -math.pi else a


# ---------------------------------------------------------------------------
# primitives
# ---------------------------------------------------------------------------


def _sinc(h: float) -> float:
    return 1.0 if h == 0.0 else math.sin(h) / h


def _gl_integrate(f, a: float, b: float, panels: int) -> np.ndarray:
    """Composite Gauss-Legendre integral of vector-valued ``f`` over [a, b]."""
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    u = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    w = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    return f(u) @ w


def _spiral_offset(hdg: float, k0: float, k1: float, length: float, ds: float) -> tuple[float, float]:
    rate = (k1 - k0) / length

    def integrand(u):
        theta = hdg + k0 * u + 0.5 * rate * u * u
        return np.stack((np.cos(theta), np.sin(theta)))

    # roughly one panel per half radian of turning to start with
    turn = abs(k0) * ds + 0.5 * abs(rate) * ds * ds
    panels = max(1, int(math.ceil(turn / 0.5)))
    prev = _gl_integrate(integrand, 0.0, ds, panels)
    while panels < _MAX_PANELS:
        panels *= 2
        cur = _gl_integrate(integrand, 0.0, ds, panels)
        if math.hypot(*(cur - prev)) <= SPIRAL_TOL:
            return float(cur[0]), float(cur[1])
        prev = cur
    return float(prev[0]), float(prev[1])


def _cubic(a, b, c, d, x):
    return a + x * (b + x * (c + x * d))


def _cubic_slope(b, c, d, x):
    return b + x * (2.0 * c + x * 3.0 * d)


def _poly3_u_at(shape: Poly3, ds: float) -> float:
    """Local u coordinate whose curve arc length from u=0 equals ``ds``."""

    def arc(u):
        return _gl_integrate(
            lambda x: np.sqrt(1.0 + _cubic_slope(shape.b, shape.c, shape.d, x) ** 2)[None, :], 0.0, u, 8
        )[0]

    u = ds
    for _ in range(50):
        step = (arc(u) - ds) / math.sqrt(1.0 + _cubic_slope(shape.b, shape.c, shape.d, u) ** 2)
        u -= step
        if abs(step) < 1e-13 * max(1.0, abs(u)):
            break
    return u


def _local_to_global(seg: GeometrySegment, u: float, v: float) -> tuple[float, float]:
    c, s = math.cos(seg.hdg), math.sin(seg.hdg)
    return seg.x + c * u - s * v, seg.y + s * u + c * v


def eval_reference_line(seg: GeometrySegment, ds: float) -> Pose:
    """Pose on ``seg`` at local arc length ``ds``."""
    if not (0.0 <= ds <= seg.length + RANGE_SLACK) or math.isnan(ds):
        raise OutOfRangeError(f"ds={ds} outside [0, {seg.length}] on {seg.kind} at s={seg.s}")
    ds = min(ds, seg.length)
    shape = seg.shape

    if ds == 0.0 and isinstance(shape, (Line, Arc, Spiral)):
        return Pose(seg.x, seg.y, seg.hdg)
    if isinstance(shape, Line):
        pose = Pose(seg.x + ds * math.cos(seg.hdg), seg.y + ds * math.sin(seg.hdg), seg.hdg)
    elif isinstance(shape, Arc):
        k = shape.curvature
        # chord form stays accurate as k -> 0
        half = 0.5 * k * ds
        chord = ds * _sinc(half)
        mid = seg.hdg + half
        pose = Pose(seg.x + chord * math.cos(mid), seg.y + chord * math.sin(mid), seg.hdg + k * ds)
    elif isinstance(shape, Spiral):
        k0, k1 = shape.curv_start, shape.curv_end
        dx, dy = _spiral_offset(seg.hdg, k0, k1, seg.length, ds)
        hdg = seg.hdg + k0 * ds + 0.5 * (k1 - k0) * ds * ds / seg.length
        pose = Pose(seg.x + dx, seg.y + dy, hdg)
    elif isinstance(shape, Poly3):
        u = _poly3_u_at(shape, ds)
        v = _cubic(shape.a, shape.b, shape.c, shape.d, u)
        x, y = _local_to_global(seg, u, v)
        pose = Pose(x, y, seg.hdg + math.atan(_cubic_slope(shape.b, shape.c, shape.d, u)))
    elif isinstance(shape, ParamPoly3):
        p = ds if shape.p_range == "arcLength" else ds / seg.length
        u = _cubic(shape.aU, shape.bU, shape.cU, shape.dU, p)
        v = _cubic(shape.aV, shape.bV, shape.cV, shape.dV, p)
        du = _cubic_slope(shape.bU, shape.cU, shape.dU, p)
        dv = _cubic_slope(shape.bV, shape.cV, shape.dV, p)
        x, y = _local_to_global(seg, u, v)
        pose = Pose(x, y, seg.hdg + math.atan2(dv, du))
    else:  # pragma: no cover - parse_xodr only builds the shapes above
        raise TypeError(f"unsupported shape {shape!r}")

    if not all(math.isfinite(c) for c in pose):
        raise NonFiniteError(f"non-finite pose on {seg.kind} at s={seg.s}, ds={ds}")
    return pose


def segment_end(seg: GeometrySegment) -> Pose:
    return eval_reference_line(seg, seg.length)


def pose_at(road: Road, s: float) -> Pose:
    """Reference-line pose at road arc length ``s`` (clamped to the plan view)."""
    plan = road.plan_view
    i = max(0, bisect.bisect_right([g.s for g in plan], s) - 1)
    seg = plan[i]
    return eval_reference_line(seg, min(max(s - seg.s, 0.0), seg.length))


def continuity_gaps(road: Road, pos_tol: float = 1e-3, hdg_tol: float = 1e-3) -> list[tuple[int, float, float]]:
    """Joints where a segment's end pose does not meet the next start pose.

    Returns ``(index, position_gap, heading_gap)`` for each offending joint and
    emits a :class:`GeometryWarning` per joint.
    """
    gaps = []
    for i, (a, b) in enumerate(zip(road.plan_view, road.plan_view[1:])):
        end = segment_end(a)
        dpos = math.hypot(end.x - b.x, end.y - b.y)
        dhdg = abs(normalize_angle(end.hdg - b.hdg))
        if dpos > pos_tol or dhdg > hdg_tol:
            gaps.append((i, dpos, dhdg))
            warnings.warn(
                f"road {road.id!r}: discontinuity after segment {i} ({dpos:.3g} m, {dhdg:.3g} rad)",
                GeometryWarning,
                stacklevel=2,
            )
    return gaps


# ---------------------------------------------------------------------------
# elevation, width, lane offset
# ---------------------------------------------------------------------------


def elevation_at(road: Road, s: float) -> float:
    """Cubic elevation a + b*ds + c*ds^2 + d*ds^3 with ds measured from the active record.

    Before the first record the first cubic is used; past the last record the
    last cubic keeps extrapolating. An empty profile means a flat road at 0.
    """
    prof = road.elevation_profile
    if not prof:
        return 0.0
    i = max(0, bisect.bisect_right([e.s for e in prof], s) - 1)
    e = prof[i]
    ds = s - e.s
    return e.a + e.b * ds + e.c * ds**2 + e.d * ds**3


def _section_at(road: Road, s: float):
    sections = road.lane_sections
    if not sections:
        raise NoLaneSectionError("road has no lane section", road.id)
    i = max(0, bisect.bisect_right([ls.s for ls in sections], s) - 1)
    return sections[i]


def lane_width(lane: Lane, ds: float, road_id: str = "") -> float:
    """Width of ``lane`` at ``ds`` past its lane-section start, clamped at 0."""
    if not lane.widths:
        return 0.0
    i = max(0, bisect.bisect_right([w.s_offset for w in lane.widths], ds) - 1)
    w = lane.widths[i]
    x = ds - w.s_offset
    value = w.a + w.b * x + w.c * x**2 + w.d * x**3
    if value < 0.0:
        warnings.warn(
            f"road {road_id!r}: lane {lane.id} width {value:.6g} < 0 at ds={ds:.6g}, clamped",
            GeometryWarning,
            stacklevel=3,
        )
        return 0.0
    return value


def _counted(lanes_, lanes: str):
    if lanes == "all":
        return lanes_
    if lanes == "driving":
        return [lane for lane in lanes_ if lane.lane_type == "driving"]
    raise ValueError(f"unknown lane filter {lanes!r}")


def lane_offset_at(road: Road, s: float, side: str, lanes: str = "all") -> float:
    """Accumulated width of the counted lanes on ``side`` ('left' or 'right')."""
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    sec = _section_at(road, s)
    ds = s - sec.s
    side_lanes = sec.left if side == "left" else sec.right
    return sum(lane_width(lane, ds, road.id) for lane in _counted(side_lanes, lanes))


def road_width_at(road: Road, s: float, lanes: str = "all") -> float:
    return lane_offset_at(road, s, "left", lanes) + lane_offset_at(road, s, "right", lanes)


def lateral_offset_point(pose: Pose, t: float) -> tuple[float, float]:
    """Point ``t`` metres to the left of ``pose`` (negative t goes right)."""
    return pose.x - t * math.sin(pose.hdg), pose.y + t * math.cos(pose.hdg)
