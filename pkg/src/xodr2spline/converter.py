"""Lane-boundary sampling, centerline averaging and Catmull-Rom interpolation."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import (
    DegenerateKnotsError,
    EmptyBoundaryError,
    EmptyPlanViewError,
    GeometryWarning,
    TooFewPointsError,
)
from .geometry import (
    Pose,
    elevation_at,
    lane_offset_at,
    lateral_offset_point,
    pose_at,
    road_width_at,
    segment_end,
)
from .ingest import Road, RoadNetwork

MIN_POINTS = 4
DEDUP_EPSILON = 1e-6


class BoundaryPoint(NamedTuple):
    x: float
    y: float
    z: float
    width: float
    s: float


class ControlPoint(NamedTuple):
    x: float
    y: float
    z: float
    width: float


@dataclass(frozen=True)
class ConversionConfig:
    alpha: float = 0.5
    points_per_segment: int = 1
    sampling: str = "starts"
    lanes: str = "all"
    side: str = "both"
    dedup_epsilon: float = DEDUP_EPSILON

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.points_per_segment < 1:
            raise ValueError("points_per_segment must be a positive integer")
        if self.side not in ("both", "left", "right"):
            raise ValueError(f"side must be both, left or right, got {self.side!r}")
        parse_sampling(self.sampling)


@dataclass(frozen=True)
class SplineResult:
    control_points: tuple[ControlPoint, ...]
    spline_points: np.ndarray  # (n, 3)
    alpha: float
    points_per_segment: int
    source_road_id: str

    def control_array(self) -> np.ndarray:
        return np.array(self.control_points, dtype=float).reshape(-1, 4)

    def to_json(self) -> dict:
        return {
            "road_id": self.source_road_id,
            "alpha": self.alpha,
            "points_per_segment": self.points_per_segment,
            "control_points": [list(p) for p in self.control_points],
            "spline_points": self.spline_points.tolist(),
        }


# ---------------------------------------------------------------------------
# boundary extraction
# ---------------------------------------------------------------------------


def parse_sampling(sampling: str) -> float | None:
    """Return None for ``starts`` or the step length for ``step:<d>``."""
    if sampling == "starts":
        return None
    if sampling.startswith("step:"):
        try:
            step = float(sampling[5:])
        except ValueError:
            step = float("nan")
        if step > 0 and math.isfinite(step):
            return step
    raise ValueError(f"sampling must be 'starts' or 'step:<metres>', got {sampling!r}")


def sample_stations(road: Road, sampling: str = "starts") -> list[tuple[float, Pose]]:
    """Reference-line stations ``(s, pose)`` used to build boundary points.

    ``starts`` takes every geometry element's stored start pose plus the end
    of the last element; ``step:<d>`` walks the reference line every d metres
    and always includes the end.
    """
    plan = road.plan_view
    if not plan:
        raise EmptyPlanViewError("road has an empty planView", road.id)
    step = parse_sampling(sampling)
    end_s = road.end_s
    if step is None:
        stations = [(g.s, Pose(g.x, g.y, g.hdg)) for g in plan]
    else:
        start = plan[0].s
        n = int(math.floor((end_s - start) / step + 1e-9))
        stations = [(start + i * step, pose_at(road, start + i * step)) for i in range(n + 1)]
        if end_s - stations[-1][0] <= 1e-9:
            stations.pop()
    stations.append((end_s, segment_end(plan[-1])))
    return stations


def extract_road_geometry(
    network: RoadNetwork | Road, side: str, sampling: str = "starts", lanes: str = "all"
) -> list[BoundaryPoint]:
    """Boundary points of the outermost counted lane on ``side`` for every road, in document order."""
    roads = network.roads if isinstance(network, RoadNetwork) else (network,)
    sign = {"left": 1.0, "right": -1.0}.get(side)
    if sign is None:
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    points = []
    for road in roads:
        for s, pose in sample_stations(road, sampling):
            offset = lane_offset_at(road, s, side, lanes)
            x, y = lateral_offset_point(pose, sign * offset)
            points.append(BoundaryPoint(x, y, elevation_at(road, s), road_width_at(road, s, lanes), s))
    return points


def _dedup(points: Sequence, eps: float) -> list:
    out = []
    for p in points:
        if out and math.hypot(p[0] - out[-1][0], p[1] - out[-1][1]) <= eps:
            continue
        out.append(p)
    return out


def compute_centerline(
    right: Sequence[BoundaryPoint], left: Sequence[BoundaryPoint], dedup_epsilon: float = DEDUP_EPSILON
) -> list[ControlPoint]:
    """Pairwise mean of index-aligned right/left boundary samples."""
    if not right or not left:
        raise EmptyBoundaryError("centerline needs non-empty right and left boundaries")
    if len(right) != len(left):
        warnings.warn(
            f"boundary lengths differ ({len(right)} right, {len(left)} left); truncating",
            GeometryWarning,
            stacklevel=2,
        )
    mids = [
        ControlPoint((r.x + l.x) / 2, (r.y + l.y) / 2, (r.z + l.z) / 2, (r.width + l.width) / 2)
        for r, l in zip(right, left)
    ]
    return _dedup(mids, dedup_epsilon)


# ---------------------------------------------------------------------------
# Catmull-Rom
# ---------------------------------------------------------------------------


def _uniform_segments(P0, P1, P2, P3, t):
    # C(t) = 1/2 [2P1 + (-P0+P2)t + (2P0-5P1+4P2-P3)t^2 + (-P0+3P1-3P2+P3)t^3]
    c0 = 2.0 * P1
    c1 = -P0 + P2
    c2 = 2.0 * P0 - 5.0 * P1 + 4.0 * P2 - P3
    c3 = -P0 + 3.0 * P1 - 3.0 * P2 + P3
    t = t[None, :, None]
    return 0.5 * (c0[:, None] + t * (c1[:, None] + t * (c2[:, None] + t * c3[:, None])))


def _knot_segments(P0, P1, P2, P3, tau, alpha):
    def knot(a, b):
        d2 = (b[:, 0] - a[:, 0]) ** 2 + (b[:, 1] - a[:, 1]) ** 2
        return np.power(d2, 0.5 * alpha)

    d01, d12, d23 = knot(P0, P1), knot(P1, P2), knot(P2, P3)
    if np.any(d01 == 0) or np.any(d12 == 0) or np.any(d23 == 0):
        raise DegenerateKnotsError("coincident control points give zero knot spacing")
    t0 = np.zeros_like(d01)
    t1 = t0 + d01
    t2 = t1 + d12
    t3 = t2 + d23
    t0, t1, t2, t3 = (k[:, None, None] for k in (t0, t1, t2, t3))
    t = t1 + tau[None, :, None] * (t2 - t1)
    P0, P1, P2, P3 = (p[:, None, :] for p in (P0, P1, P2, P3))

    A1 = (t1 - t) / (t1 - t0) * P0 + (t - t0) / (t1 - t0) * P1
    A2 = (t2 - t) / (t2 - t1) * P1 + (t - t1) / (t2 - t1) * P2
    A3 = (t3 - t) / (t3 - t2) * P2 + (t - t2) / (t3 - t2) * P3
    B1 = (t2 - t) / (t2 - t0) * A1 + (t - t0) / (t2 - t0) * A2
    B2 = (t3 - t) / (t3 - t1) * A2 + (t - t1) / (t3 - t1) * A3
    return (t2 - t) / (t2 - t1) * B1 + (t - t1) / (t2 - t1) * B2


def eval_window(P0, P1, P2, P3, t, alpha: float = 0.0) -> np.ndarray:
    """Evaluate the P1->P2 span of one control window at parameters ``t`` in [0, 1].

    Points may be 2D or 3D; knot spacing only uses the first two coordinates.
    Returns an array of shape ``(len(t), dim)``.
    """
    P = [np.asarray(p, dtype=float)[None, :] for p in (P0, P1, P2, P3)]
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if alpha == 0.0:
        return _uniform_segments(*P, t)[0]
    return _knot_segments(*P, t, alpha)[0]


def _as_xyz(points) -> np.ndarray:
    arr = np.asarray([tuple(p) for p in points], dtype=float)
    if arr.ndim != 2 or arr.shape[1] < 2:
        raise ValueError("control points must be a sequence of (x, y[, z, ...]) tuples")
    if arr.shape[1] == 2:
        arr = np.column_stack([arr, np.zeros(len(arr))])
    return arr[:, :3]


def catmull_rom_spline(
    points,
    alpha: float = 0.5,
    points_per_segment: int = 1,
    dedup_epsilon: float = DEDUP_EPSILON,
) -> np.ndarray:
    """Interpolate ``points`` with a Catmull-Rom chain and return (x, y, z) samples.

    Each span P_i -> P_{i+1} contributes ``points_per_segment`` samples at
    t = j/points_per_segment (j = 1..points_per_segment); the first control
    point is emitted once up front. Reflected phantom points extend the chain
    so the first and last spans are covered too.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    if points_per_segment < 1:
        raise ValueError("points_per_segment must be a positive integer")
    P = np.asarray(_dedup(_as_xyz(points), dedup_epsilon), dtype=float).reshape(-1, 3)
    if len(P) < MIN_POINTS:
        raise TooFewPointsError(f"{len(P)} control points, need at least {MIN_POINTS}")

    ext = np.vstack([2.0 * P[0] - P[1], P, 2.0 * P[-1] - P[-2]])
    P0, P1, P2, P3 = ext[:-3], ext[1:-2], ext[2:-1], ext[3:]
    tau = np.arange(1, points_per_segment + 1, dtype=float) / points_per_segment
    if alpha == 0.0:
        spans = _uniform_segments(P0, P1, P2, P3, tau)
    else:
        spans = _knot_segments(P0, P1, P2, P3, tau, alpha)
    # C(0) of the first span is P[0] by construction
    return np.vstack([P[:1], spans.reshape(-1, 3)])


def generate_spline(network: RoadNetwork | Road, config: ConversionConfig | None = None) -> SplineResult:
    """Convert one road into control points and Catmull-Rom spline points."""
    config = config or ConversionConfig()
    if isinstance(network, RoadNetwork):
        if len(network.roads) != 1:
            raise ValueError("generate_spline converts one road at a time; iterate network.roads")
        road = network.roads[0]
    else:
        road = network

    right = extract_road_geometry(road, "right", config.sampling, config.lanes)
    left = extract_road_geometry(road, "left", config.sampling, config.lanes)
    if len(right) < MIN_POINTS or len(left) < MIN_POINTS:
        raise TooFewPointsError(
            f"{min(len(right), len(left))} boundary samples, need at least {MIN_POINTS}", road.id
        )
    if config.side == "both":
        control = compute_centerline(right, left, config.dedup_epsilon)
    else:
        boundary = right if config.side == "right" else left
        control = _dedup([ControlPoint(p.x, p.y, p.z, p.width) for p in boundary], config.dedup_epsilon)
    try:
        spline = catmull_rom_spline(control, config.alpha, config.points_per_segment, config.dedup_epsilon)
    except (TooFewPointsError, DegenerateKnotsError) as exc:
        raise type(exc)(str(exc), road.id) from None
    return SplineResult(tuple(control), spline, config.alpha, config.points_per_segment, road.id)
