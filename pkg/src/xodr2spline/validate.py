"""Static road-validity checks run before a converted road is simulated."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import TooShortError

DISTINCT_ENDPOINTS = "DistinctEndpoints"
BOUNDING_BOX = "BoundingBox"
SELF_INTERSECTION = "SelfIntersection"

ORIENT_EPS = 1e-9


@dataclass(frozen=True)
class ValidityReport:
    valid: bool
    endpoint_distance: float
    bbox_width: float
    bbox_height: float
    self_intersections: int
    failed_criteria: tuple[str, ...] = ()

    def to_json(self) -> dict:
        d = asdict(self)
        d["failed_criteria"] = list(self.failed_criteria)
        return d


def _drop_repeats(pts: np.ndarray) -> np.ndarray:
    if len(pts) < 2:
        return pts
    keep = np.ones(len(pts), dtype=bool)
    keep[1:] = np.any(pts[1:] != pts[:-1], axis=1)
    return pts[keep]


def self_intersects(polyline, eps: float = ORIENT_EPS) -> int:
    """Number of non-adjacent segment pairs that cross at an interior point.

    Touching, collinear overlap and crossings through a vertex are not
    counted: every orientation involved must clear ``eps``.
    """
    pts = np.asarray(polyline, dtype=float)
    if len(pts) < 2:
        return 0
    pts = _drop_repeats(pts.reshape(len(pts), -1)[:, :2])
    a, b = pts[:-1], pts[1:]
    n = len(a)
    if n < 3:
        return 0
    d = b - a
    count = 0
    for i in range(n - 2):
        aj, bj, dj = a[i + 2 :], b[i + 2 :], d[i + 2 :]
        o1 = d[i, 0] * (aj[:, 1] - a[i, 1]) - d[i, 1] * (aj[:, 0] - a[i, 0])
        o2 = d[i, 0] * (bj[:, 1] - a[i, 1]) - d[i, 1] * (bj[:, 0] - a[i, 0])
        o3 = dj[:, 0] * (a[i, 1] - aj[:, 1]) - dj[:, 1] * (a[i, 0] - aj[:, 0])
        o4 = dj[:, 0] * (b[i, 1] - aj[:, 1]) - dj[:, 1] * (b[i, 0] - aj[:, 0])
        straddle_j = ((o1 > eps) & (o2 < -eps)) | ((o1 < -eps) & (o2 > eps))
        straddle_i = ((o3 > eps) & (o4 < -eps)) | ((o3 < -eps) & (o4 > eps))
        count += int(np.count_nonzero(straddle_j & straddle_i))
    return count


def check_validity(result, bbox_limit: float = 250.0, endpoint_epsilon: float = 1.0) -> ValidityReport:
    """Apply the distinct-endpoint, bounding-box and no-crossing criteria.

    ``result`` is a SplineResult or an (n, >=2) array of spline points.
    """
    pts = getattr(result, "spline_points", result)
    pts = np.asarray(pts, dtype=float)
    if pts.ndim != 2 or len(pts) < 2:
        raise TooShortError("validity check needs at least two spline points", getattr(result, "source_road_id", None))
    xy = pts[:, :2]
    endpoint_distance = float(math.hypot(*(xy[-1] - xy[0])))
    width, height = (float(v) for v in xy.max(axis=0) - xy.min(axis=0))
    crossings = self_intersects(xy)

    failed = []
    if endpoint_distance <= endpoint_epsilon:
        failed.append(DISTINCT_ENDPOINTS)
    if width > bbox_limit or height > bbox_limit:
        failed.append(BOUNDING_BOX)
    if crossings:
        failed.append(SELF_INTERSECTION)
    return ValidityReport(not failed, endpoint_distance, width, height, crossings, tuple(failed))
