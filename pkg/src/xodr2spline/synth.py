"""Synthetic OpenDRIVE roads for fixtures, demos and batch benchmarks."""

from __future__ import annotations

import math
from pathlib import Path
from typing import Sequence

import numpy as np

from .geometry import segment_end
from .ingest import (
    Arc,
    ElevationSegment,
    GeometrySegment,
    Lane,
    LaneSection,
    Line,
    Road,
    RoadNetwork,
    Shape,
    Spiral,
    WidthPoly,
    dump_xodr,
)


def chain_road(
    road_id: str,
    pieces: Sequence[tuple[Shape, float]],
    start: tuple[float, float, float] = (0.0, 0.0, 0.0),
    left: Sequence[float] = (3.5,),
    right: Sequence[float] = (3.5,),
    elevation: Sequence[ElevationSegment] = (),
) -> Road:
    """Build a road whose segments join end-to-start.

    ``pieces`` is a list of ``(shape, length)``; ``left`` and ``right`` are
    constant lane widths ordered outward from the center lane.
    """
    x, y, hdg = start
    s = 0.0
    segments = []
    for shape, length in pieces:
        seg = GeometrySegment(s, x, y, hdg, float(length), shape)
        segments.append(seg)
        x, y, hdg = segment_end(seg)
        s += float(length)
    section = LaneSection(
        0.0,
        tuple(Lane(i + 1, "driving", (WidthPoly(0.0, w),)) for i, w in enumerate(left)),
        tuple(Lane(-(i + 1), "driving", (WidthPoly(0.0, w),)) for i, w in enumerate(right)),
    )
    return Road(road_id, s, tuple(segments), tuple(elevation), (section,))


def random_road(rng: np.random.Generator, road_id: str, max_extent: float = 200.0) -> Road:
    """A road of 4-8 line/arc/spiral pieces with 1-3 lanes per side.

    Pieces are kept short and gently curved so most roads fit inside
    ``max_extent`` and rarely cross themselves.
    """
    n = int(rng.integers(4, 9))
    budget = max_extent * 0.8
    lengths = rng.uniform(0.5, 1.5, n)
    lengths *= min(1.0, budget / lengths.sum()) * rng.uniform(0.4, 1.0)
    lengths = np.maximum(lengths * (budget / n), 2.0)
    pieces: list[tuple[Shape, float]] = []
    curv = 0.0
    for length in lengths:
        kind = rng.choice(["line", "arc", "spiral"])
        # total turning per piece stays under ~60 degrees
        kmax = min(0.05, 1.0 / length)
        if kind == "line":
            pieces.append((Line(), float(length)))
            curv = 0.0
        elif kind == "arc":
            curv = float(rng.uniform(-kmax, kmax))
            pieces.append((Arc(curv), float(length)))
        else:
            end = float(rng.uniform(-kmax, kmax))
            pieces.append((Spiral(curv, end), float(length)))
            curv = end
    left = tuple(float(w) for w in rng.uniform(2.75, 3.75, int(rng.integers(1, 4))))
    right = tuple(float(w) for w in rng.uniform(2.75, 3.75, int(rng.integers(1, 4))))
    elevation: tuple[ElevationSegment, ...] = ()
    if rng.random() < 0.5:
        total = float(lengths.sum())
        elevation = (
            ElevationSegment(0.0, float(rng.uniform(0, 10)), float(rng.uniform(-0.03, 0.03))),
            ElevationSegment(total / 2, float(rng.uniform(0, 10)), float(rng.uniform(-0.03, 0.03)), 1e-5),
        )
    start = (float(rng.uniform(-20, 20)), float(rng.uniform(-20, 20)), float(rng.uniform(-math.pi, math.pi)))
    return chain_road(road_id, pieces, start, left, right, elevation)


def write_corpus(out_dir, n_roads: int, seed: int = 0, campaigns: int = 1) -> list[Path]:
    """Write ``n_roads`` random single-road ``.xodr`` files, spread over campaign subdirectories."""
    rng = np.random.default_rng(seed)
    out = Path(out_dir)
    paths = []
    for i in range(n_roads):
        campaign = out / f"campaign_{i % campaigns + 1}" if campaigns > 1 else out
        campaign.mkdir(parents=True, exist_ok=True)
        road = random_road(rng, str(i))
        path = campaign / f"road_{i:05d}.xodr"
        path.write_text(dump_xodr(RoadNetwork((road,), path.stem)), encoding="utf-8")
        paths.append(path)
    return paths
