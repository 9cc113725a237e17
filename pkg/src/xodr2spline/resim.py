"""Closed-loop re-simulation of a converted road.

A kinematic bicycle follows the spline with pure-pursuit steering. The run
passes when the vehicle's progress reaches the final control point and fails
as soon as its lateral deviation from the tracked lane center exceeds the
allowed half width. Steering angles use the mathematical convention:
positive steers left (counter-clockwise).
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import normalize_angle
from .validate import ValidityReport, check_validity

REACHED_END = "ReachedEnd"
OUT_OF_BOUNDS = "OutOfBounds"
STALLED = "Stalled"
INVALID_ROAD = "InvalidRoad"

STEER_LIMIT_DEG = 25.0
STALL_STEPS = 200

TRACE_COLUMNS = ("t", "x", "y", "heading", "steer_deg", "lateral_dev")


@dataclass(frozen=True)
class VehicleConfig:
    wheelbase: float = 2.5
    speed: float = 8.0
    lookahead: float = 6.0
    max_steer: float = 25.0  # degrees
    track_half_width: float = 1.0
    dt: float = 0.05

    def __post_init__(self):
        for name in ("wheelbase", "speed", "lookahead", "max_steer", "track_half_width", "dt"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.max_steer > STEER_LIMIT_DEG:
            raise ValueError(f"max_steer {self.max_steer} exceeds the {STEER_LIMIT_DEG} degree steering range")


@dataclass(frozen=True)
class SimOutcome:
    passed: bool
    reason: str
    oob_position: tuple[float, float] | None
    steps: int
    max_lateral_deviation: float
    trace: np.ndarray = field(default_factory=lambda: np.zeros((0, 6)), repr=False, compare=False)

    @property
    def sim_time(self) -> float:
        return float(self.trace[-1, 0]) if len(self.trace) else 0.0

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "reason": self.reason,
            "oob_position": list(self.oob_position) if self.oob_position is not None else None,
            "steps": self.steps,
            "max_lateral_deviation": self.max_lateral_deviation,
        }

    def trace_csv(self, fmt: str = "{:.9g}") -> str:
        buf = io.StringIO()
        buf.write(",".join(TRACE_COLUMNS) + "\n")
        for row in self.trace:
            buf.write(",".join(fmt.format(float(v)) for v in row) + "\n")
        return buf.getvalue()


class _Path:
    """Polyline with cumulative arc length and a per-vertex half width."""

    def __init__(self, xy: np.ndarray, half_width: np.ndarray):
        keep = np.ones(len(xy), dtype=bool)
        keep[1:] = np.hypot(*(xy[1:] - xy[:-1]).T) > 0
        self.xy = xy[keep]
        self.half_width = half_width[keep]
        seg = self.xy[1:] - self.xy[:-1]
        self.seg_len = np.hypot(seg[:, 0], seg[:, 1])
        self.dirs = seg / self.seg_len[:, None]
        self.s = np.concatenate([[0.0], np.cumsum(self.seg_len)])
        self.total = float(self.s[-1])

    def point_at(self, s: float) -> tuple[float, float]:
        if s >= self.total:
            # straight extension past the end keeps the lookahead target defined
            d = self.dirs[-1]
            extra = s - self.total
            return float(self.xy[-1, 0] + extra * d[0]), float(self.xy[-1, 1] + extra * d[1])
        i = int(np.searchsorted(self.s, s, side="right")) - 1
        i = min(max(i, 0), len(self.seg_len) - 1)
        u = s - self.s[i]
        return float(self.xy[i, 0] + u * self.dirs[i, 0]), float(self.xy[i, 1] + u * self.dirs[i, 1])

    def half_width_at(self, s: float) -> float:
        return float(np.interp(s, self.s, self.half_width))

    def project(self, x: float, y: float, first: int, last: int) -> tuple[float, float]:
        """Closest ``(arc_length, distance)`` over segments first..last; the final segment extends as a ray."""
        a = self.xy[first : last + 1]
        d = self.dirs[first : last + 1]
        L = self.seg_len[first : last + 1]
        u = (x - a[:, 0]) * d[:, 0] + (y - a[:, 1]) * d[:, 1]
        hi = np.where(np.arange(first, last + 1) == len(self.seg_len) - 1, np.inf, L)
        u = np.clip(u, 0.0, hi)
        px = a[:, 0] + u * d[:, 0]
        py = a[:, 1] + u * d[:, 1]
        dist = np.hypot(x - px, y - py)
        k = int(np.argmin(dist))
        return float(self.s[first + k] + u[k]), float(dist[k])


def _widths_along_spline(result) -> np.ndarray:
    control = result.control_array()
    n_spline = len(result.spline_points)
    pps = result.points_per_segment
    if n_spline == 1 + (len(control) - 1) * pps:
        pos = np.arange(n_spline) / pps
    else:
        pos = np.linspace(0.0, len(control) - 1, n_spline)
    return np.interp(pos, np.arange(len(control)), control[:, 3])


def _lane_path(result, cfg: VehicleConfig, lane: str) -> _Path:
    xy = np.asarray(result.spline_points, dtype=float)[:, :2]
    width = _widths_along_spline(result)
    if lane == "center":
        return _Path(xy, np.maximum(width / 2.0, cfg.track_half_width))
    if lane != "right":
        raise ValueError(f"lane must be 'center' or 'right', got {lane!r}")
    tangent = np.gradient(xy, axis=0)
    tangent /= np.maximum(np.hypot(tangent[:, 0], tangent[:, 1]), 1e-300)[:, None]
    # right-hand normal of the travel direction
    normal = np.column_stack([tangent[:, 1], -tangent[:, 0]])
    shifted = xy + normal * (width / 4.0)[:, None]
    return _Path(shifted, np.maximum(width / 4.0, cfg.track_half_width))


def simulate(
    result,
    cfg: VehicleConfig | None = None,
    lane: str = "center",
    validity: ValidityReport | None = None,
) -> SimOutcome:
    """Drive ``result`` (a SplineResult) and report the outcome with its trace."""
    cfg = cfg or VehicleConfig()
    if validity is None:
        validity = check_validity(result)
    if not validity.valid:
        return SimOutcome(False, INVALID_ROAD, None, 0, 0.0)

    path = _lane_path(result, cfg, lane)
    if len(path.seg_len) == 0:
        return SimOutcome(False, INVALID_ROAD, None, 0, 0.0)

    L, v, dt = cfg.wheelbase, cfg.speed, cfg.dt
    max_steer = math.radians(cfg.max_steer)
    x, y = float(path.xy[0, 0]), float(path.xy[0, 1])
    theta = math.atan2(path.dirs[0, 1], path.dirs[0, 0])
    progress, dev, seg = 0.0, 0.0, 0
    reach = cfg.lookahead + 2.0 * v * dt + 1.0
    max_steps = int(math.ceil(3.0 * path.total / (v * dt))) + 1000

    rows = []
    max_dev = 0.0
    still = 0
    step = 0
    reason = STALLED
    oob = None
    while True:
        # pure pursuit toward the lookahead point, in the vehicle frame
        tx, ty = path.point_at(progress + cfg.lookahead)
        c, s = math.cos(theta), math.sin(theta)
        lx = c * (tx - x) + s * (ty - y)
        ly = -s * (tx - x) + c * (ty - y)
        ld2 = lx * lx + ly * ly
        delta = math.atan(2.0 * L * ly / ld2) if ld2 > 0 else 0.0
        delta = min(max(delta, -max_steer), max_steer)
        rows.append((step * dt, x, y, normalize_angle(theta), math.degrees(delta), dev))

        if progress >= path.total:
            reason = REACHED_END
            break
        if dev > path.half_width_at(progress):
            reason = OUT_OF_BOUNDS
            oob = (x, y)
            break
        if still >= STALL_STEPS or step >= max_steps:
            break

        x += v * math.cos(theta) * dt
        y += v * math.sin(theta) * dt
        theta += v / L * math.tan(delta) * dt
        step += 1

        last = int(np.searchsorted(path.s, progress + reach, side="right"))
        last = min(max(last, seg), len(path.seg_len) - 1)
        s_proj, dev = path.project(x, y, seg, last)
        max_dev = max(max_dev, dev)
        if s_proj > progress + 1e-9:
            still = 0
        else:
            still += 1
        progress = max(progress, s_proj)
        seg = min(int(np.searchsorted(path.s, progress, side="right")) - 1, len(path.seg_len) - 1)

    return SimOutcome(reason == REACHED_END, reason, oob, step, max_dev, np.array(rows, dtype=float))
