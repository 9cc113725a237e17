"""Conversion quality: normalized mean distance accuracy and R^2."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import EmptyInputError, LengthMismatchError, ZeroVarianceError


@dataclass(frozen=True)
class FidelityReport:
    accuracy_percent: float
    r_squared: float | None  # None when every axis has zero variance
    avg_distance: float
    max_possible_error: float
    n_original: int
    n_spline: int

    def to_json(self) -> dict:
        return asdict(self)


def _xy(points, name) -> np.ndarray:
    arr = np.asarray(points, dtype=float)
    if arr.size == 0:
        raise EmptyInputError(f"{name} point list is empty")
    return arr.reshape(len(arr), -1)[:, :2]


def _index_partners(original: np.ndarray, spline: np.ndarray) -> np.ndarray:
    n, m = len(original), len(spline)
    if n == m:
        return np.arange(n)
    if n > 1 and (m - 1) % (n - 1) == 0:
        return np.arange(n) * ((m - 1) // (n - 1))
    raise LengthMismatchError(f"cannot index-pair {n} original points with {m} spline points")


def match(original, spline, pairing: str = "nearest") -> tuple[np.ndarray, np.ndarray]:
    """Partner spline point for every original point and the distance to it.

    ``nearest`` uses the closest spline point; ``index`` pairs control point i
    with the spline sample that ends its span.
    """
    o, s = _xy(original, "original"), _xy(spline, "spline")
    if pairing == "nearest":
        dist, idx = cKDTree(s).query(o)
        return np.asarray(idx), np.asarray(dist, dtype=float)
    if pairing == "index":
        idx = _index_partners(o, s)
        return idx, np.hypot(*(o - s[idx]).T)
    raise ValueError(f"pairing must be 'nearest' or 'index', got {pairing!r}")


def accuracy(original, spline, pairing: str = "nearest") -> tuple[float, float, float]:
    """Return ``(accuracy_percent, avg_distance, max_possible_error)``.

    The error scale is the diagonal of the original points' bounding box;
    accuracy is clamped to [0, 100].
    """
    o = _xy(original, "original")
    _, dist = match(o, spline, pairing)
    avg = float(dist.mean())
    span = o.max(axis=0) - o.min(axis=0)
    diag = float(math.hypot(span[0], span[1]))
    if diag == 0.0:
        return (100.0 if avg == 0.0 else 0.0), avg, diag
    return min(100.0, max(0.0, (1.0 - avg / diag) * 100.0)), avg, diag


def r_squared(original, predicted) -> float:
    """Coefficient of determination 1 - SS_res / SS_tot."""
    y = np.asarray(original, dtype=float).ravel()
    yhat = np.asarray(predicted, dtype=float).ravel()
    if y.shape != yhat.shape:
        raise LengthMismatchError(f"{len(y)} original vs {len(yhat)} predicted samples")
    if len(y) < 2:
        raise LengthMismatchError("r_squared needs at least two samples")
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    # spread below rounding noise of the mean counts as constant
    noise = len(y) * (4.0 * np.finfo(float).eps * float(np.max(np.abs(y)))) ** 2
    if ss_tot <= noise:
        raise ZeroVarianceError("original samples have zero variance")
    return 1.0 - float(np.sum((y - yhat) ** 2)) / ss_tot


def r_squared_2d(original, spline, pairing: str = "nearest") -> float | None:
    """Smallest per-axis R^2 over axes with variance; None if no axis qualifies."""
    o = _xy(original, "original")
    idx, _ = match(o, spline, pairing)
    partners = _xy(spline, "spline")[idx]
    values = []
    for axis in range(2):
        try:
            values.append(r_squared(o[:, axis], partners[:, axis]))
        except ZeroVarianceError:
            continue
    return min(values) if values else None


def score(original, spline, pairing: str = "nearest") -> FidelityReport:
    acc, avg, diag = accuracy(original, spline, pairing)
    r2 = r_squared_2d(original, spline, pairing) if len(original) >= 2 else None
    return FidelityReport(acc, r2, avg, diag, len(original), len(spline))


def score_result(result, pairing: str = "nearest") -> FidelityReport:
    """Score a SplineResult against its own control points."""
    return score(result.control_array()[:, :2], result.spline_points[:, :2], pairing)
