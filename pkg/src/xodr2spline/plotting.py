"""Matplotlib figures for conversion reports.

Figures are built on ``matplotlib.figure.Figure`` directly so they can be
produced from worker processes without touching pyplot state.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import numpy as np
from matplotlib.figure import Figure

SPLINE_COLOR = "#d4a20c"
POINT_COLOR = "#c0392b"
TRACE_COLOR = "#1f3bd1"

# Agg writes the Software key by default; dropping it keeps files stable across versions
_PNG_META = {"Software": None}


def plot_road(result, path, outcome=None, dpi: int = 100) -> Path:
    """Spline with its original control points, plus the driven trace if any."""
    fig = Figure(figsize=(6, 6))
    ax = fig.add_subplot(111)
    spline = np.asarray(result.spline_points)
    control = result.control_array()
    ax.plot(spline[:, 0], spline[:, 1], color=SPLINE_COLOR, lw=2, label="spline")
    ax.scatter(control[:, 0], control[:, 1], s=14, color=POINT_COLOR, zorder=3, label="control points")
    if outcome is not None and len(outcome.trace):
        ax.plot(outcome.trace[:, 1], outcome.trace[:, 2], color=TRACE_COLOR, lw=1, ls="--", label="vehicle")
        if outcome.oob_position is not None:
            ax.plot(*outcome.oob_position, marker="x", ms=10, mew=2, color=TRACE_COLOR, label="out of bounds")
    ax.set_aspect("equal", adjustable="datalim")
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    ax.set_title(f"road {result.source_road_id}")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=dpi, metadata=_PNG_META)
    return path


def plot_campaigns(summaries: Sequence, path, dpi: int = 100) -> Path:
    """Stacked pass/fail bars per campaign."""
    fig = Figure(figsize=(max(4.0, 0.6 * len(summaries) + 2), 4))
    ax = fig.add_subplot(111)
    names = [s.campaign_id for s in summaries]
    x = np.arange(len(names))
    passed = np.array([s.sim_pass for s in summaries])
    failed = np.array([s.sim_fail for s in summaries])
    errors = np.array([s.conversion_errors for s in summaries])
    ax.bar(x, passed, color="#4caf50", label="pass")
    ax.bar(x, failed, bottom=passed, color="#e53935", label="fail")
    ax.bar(x, errors, bottom=passed + failed, color="#9e9e9e", label="conversion error")
    ax.set_xticks(x)
    ax.set_xticklabels(names, rotation=45, ha="right", fontsize=8)
    ax.set_ylabel("roads")
    ax.legend(fontsize=8)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=dpi, metadata=_PNG_META)
    return path
