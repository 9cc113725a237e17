"""Exit criteria for the package, one test per criterion.

Each test carries an ``acceptance`` marker; the terminal summary prints one
PASS/FAIL line per criterion (see conftest.py).
"""

import filecmp
import math
import time
import warnings

import numpy as np
import pytest
from scipy.integrate import quad

from _builders import crossing, hairpin, loop, straight, through_xml
from xodr2spline.batch import BatchOptions, convert_batch
from xodr2spline.cli import main
from xodr2spline.converter import ConversionConfig, catmull_rom_spline, eval_window, generate_spline
from xodr2spline.fidelity import score_result
from xodr2spline.geometry import elevation_at, eval_reference_line
from xodr2spline.ingest import Arc, ElevationSegment, GeometrySegment, Line, Road, RoadNetwork, Spiral, dump_xodr, parse_xodr
from xodr2spline.resim import INVALID_ROAD, OUT_OF_BOUNDS, REACHED_END, simulate
from xodr2spline.synth import random_road, write_corpus
from xodr2spline.validate import BOUNDING_BOX, DISTINCT_ENDPOINTS, SELF_INTERSECTION, check_validity, self_intersects

acceptance = pytest.mark.acceptance


def literal_uniform(P0, P1, P2, P3, t):
    """Independent scalar evaluation of the four-term uniform polynomial."""
    return [
        0.5 * ((2 * b) + (-a + c) * t + (2 * a - 5 * b + 4 * c - d) * t**2 + (-a + 3 * b - 3 * c + d) * t**3)
        for a, b, c, d in zip(P0, P1, P2, P3)
    ]


def brute_crossings(pts, eps=1e-9):
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    def straddles(u, v):
        return (u > eps and v < -eps) or (u < -eps and v > eps)

    segs = list(zip(pts[:-1], pts[1:]))
    n = 0
    for i, (p, q) in enumerate(segs):
        for r, s in segs[i + 2 :]:
            if straddles(orient(p, q, r), orient(p, q, s)) and straddles(orient(r, s, p), orient(r, s, q)):
                n += 1
    return n


@acceptance("1: fidelity on 100+ synthetic roads")
def test_fidelity_reproduction():
    rng = np.random.default_rng(2024)
    roads = [random_road(rng, f"r{i:03d}") for i in range(120)]
    xml = dump_xodr(RoadNetwork(tuple(roads)))
    start = time.perf_counter()
    network = parse_xodr(xml)
    worst_acc, worst_r2 = 100.0, 1.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for road in network.roads:
            report = score_result(generate_spline(road))
            worst_acc = min(worst_acc, report.accuracy_percent)
            worst_r2 = min(worst_r2, report.r_squared)
    elapsed = time.perf_counter() - start
    assert len(network.roads) >= 100
    assert worst_acc >= 99.99
    assert worst_r2 >= 0.9999
    assert elapsed < 10.0


@acceptance("2: alpha=0 engine matches the literal polynomial")
def test_uniform_polynomial_exactness():
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(1000):
        P = rng.uniform(-500, 500, (4, 3))
        t = rng.uniform()
        worst = max(worst, np.max(np.abs(eval_window(*P, [t], alpha=0.0)[0] - literal_uniform(*P, t))))
        # middle span of a four-point chain uses the window verbatim
        pps = int(rng.integers(1, 6))
        out = catmull_rom_spline(P, alpha=0.0, points_per_segment=pps)
        middle = out[pps + 1 : 2 * pps + 1]
        expected = [literal_uniform(*P, k / pps) for k in range(1, pps + 1)]
        worst = max(worst, np.max(np.abs(middle - expected)))
    assert worst <= 1e-12


@acceptance("3: spline endpoint identities")
def test_endpoint_identities():
    rng = np.random.default_rng(12)
    for alpha in (0.0, 0.5):
        for _ in range(1000):
            P = rng.uniform(-500, 500, (4, 3))
            c0, c1 = eval_window(*P, [0.0, 1.0], alpha=alpha)
            assert np.max(np.abs(c0 - P[1])) <= 1e-12
            assert np.max(np.abs(c1 - P[2])) <= 1e-12


@acceptance("4: spiral and arc geometry oracles")
def test_geometry_oracles():
    rng = np.random.default_rng(13)
    worst_spiral = 0.0
    for _ in range(500):
        L = rng.uniform(1.0, 500.0)
        k0, k1 = rng.uniform(-0.05, 0.05, 2)
        x0, y0, h = rng.uniform(-1000, 1000), rng.uniform(-1000, 1000), rng.uniform(-math.pi, math.pi)
        end = eval_reference_line(GeometrySegment(0, x0, y0, h, L, Spiral(k0, k1)), L)

        def theta(u):
            return h + k0 * u + 0.5 * (k1 - k0) * u * u / L

        opts = dict(epsabs=1e-11, epsrel=1e-13, limit=500)
        ox = x0 + quad(lambda u: math.cos(theta(u)), 0, L, **opts)[0]
        oy = y0 + quad(lambda u: math.sin(theta(u)), 0, L, **opts)[0]
        worst_spiral = max(worst_spiral, math.hypot(end.x - ox, end.y - oy))
    assert worst_spiral <= 1e-6

    worst_arc = 0.0
    for _ in range(500):
        L = rng.uniform(1.0, 500.0)
        k = rng.choice([-1, 1]) * rng.uniform(1e-4, 0.05)
        x0, y0, h = rng.uniform(-1000, 1000), rng.uniform(-1000, 1000), rng.uniform(-math.pi, math.pi)
        end = eval_reference_line(GeometrySegment(0, x0, y0, h, L, Arc(k)), L)
        cx, cy = x0 - math.sin(h) / k, y0 + math.cos(h) / k
        ex, ey = cx + math.sin(h + k * L) / k, cy - math.cos(h + k * L) / k
        worst_arc = max(worst_arc, math.hypot(end.x - ex, end.y - ey))
    assert worst_arc <= 1e-9


@acceptance("5: elevation cubic and segment selection")
def test_elevation():
    def road(profile):
        return Road("e", 1000.0, (GeometrySegment(0, 0, 0, 0, 1000, Line()),), tuple(profile))

    assert abs(elevation_at(road([ElevationSegment(0, 1, 0.5, 0.25, 0.125)]), 2.0) - 4.0) <= 1e-12
    assert abs(elevation_at(road([ElevationSegment(10, 2, -1, 0, 0.01)]), 13.0) - (2 - 3 + 0.27)) <= 1e-12
    assert elevation_at(road([ElevationSegment(0, 7.5)]), 500.0) == 7.5

    rng = np.random.default_rng(14)
    for _ in range(200):
        starts = np.sort(rng.choice(np.arange(0, 1000, 0.5), rng.integers(1, 12), replace=False))
        profile = [ElevationSegment(float(s), *rng.uniform(-2, 2, 4) * [10, 1, 1e-2, 1e-4]) for s in starts]
        r = road(profile)
        for s in rng.uniform(0, 1000, 20).tolist() + starts.tolist():
            active = profile[0]
            for seg in profile:  # linear scan: last segment starting at or before s
                if seg.s <= s:
                    active = seg
            ds = s - active.s
            expected = active.a + active.b * ds + active.c * ds**2 + active.d * ds**3
            assert abs(elevation_at(r, s) - expected) <= 1e-12 * max(1.0, abs(expected))


def validity_fixture():
    rng = np.random.default_rng(15)
    labeled = []
    for i in range(10):
        h = rng.uniform(-math.pi, math.pi)
        labeled.append((loop(f"loop{i}", radius=rng.uniform(15, 60), pieces=int(rng.integers(4, 9)), hdg=h), {DISTINCT_ENDPOINTS}))
        labeled.append((straight(f"long{i}", length=rng.uniform(400, 600), hdg=h), {BOUNDING_BOX}))
        labeled.append((crossing(f"cross{i}", lead=rng.uniform(40, 80), radius=rng.uniform(10, 25), hdg=h), {SELF_INTERSECTION}))
        labeled.append((straight(f"ok{i}", length=rng.uniform(20, 200), hdg=h), set()))
    return labeled


@acceptance("6: validity classification and crossing oracle")
def test_validity():
    labeled = validity_fixture()
    assert len(labeled) == 40
    config = ConversionConfig(sampling="step:2")
    wrong = []
    for road, expected in labeled:
        report = check_validity(generate_spline(through_xml(road), config))
        if set(report.failed_criteria) != expected or report.valid != (not expected):
            wrong.append((road.id, report.failed_criteria))
    assert wrong == []

    rng = np.random.default_rng(16)
    for _ in range(1000):
        n = int(rng.integers(2, 30))
        if rng.uniform() < 0.5:
            pts = rng.integers(-4, 5, (n, 2)).astype(float)  # grid points exercise touching and collinear cases
        else:
            pts = rng.uniform(-100, 100, (n, 2))
        pts = pts[np.r_[True, np.any(pts[1:] != pts[:-1], axis=1)]]
        assert self_intersects(pts) == brute_crossings(pts.tolist())


@acceptance("7: local control under perturbation")
def test_local_control():
    rng = np.random.default_rng(17)
    for case in range(100):
        n = int(rng.integers(6, 15))
        pps = int(rng.integers(1, 5))
        alpha = (0.0, 0.5, 1.0)[case % 3]
        P = np.cumsum(rng.uniform(1, 10, (n, 3)), axis=0)
        k = int(rng.integers(2, n - 2))
        Q = P.copy()
        Q[k] += rng.uniform(-0.5, 0.5, 3)
        a = catmull_rom_spline(P, alpha=alpha, points_per_segment=pps)
        b = catmull_rom_spline(Q, alpha=alpha, points_per_segment=pps)
        # spans k-2 .. k+1 occupy rows (k-2)*pps+1 .. (k+2)*pps
        affected = np.zeros(len(a), dtype=bool)
        affected[(k - 2) * pps + 1 : (k + 2) * pps + 1] = True
        assert np.array_equal(a[~affected], b[~affected])
        assert not np.array_equal(a[affected], b[affected])


def resim_fixture():
    rng = np.random.default_rng(18)
    roads = []
    for i in range(8):
        roads.append((straight(f"wide{i}", length=rng.uniform(60, 240), hdg=rng.uniform(-math.pi, math.pi)), REACHED_END))
    for i in range(7):
        # curvature 0.25 .. 0.5 against the vehicle's limit of tan(25 deg) / 2.5 ~ 0.187
        radius = rng.uniform(2.0, 4.0)
        roads.append((hairpin(f"pin{i}", radius=radius, hdg=rng.uniform(-math.pi, math.pi)), OUT_OF_BOUNDS))
    for i in range(5):
        roads.append((loop(f"loop{i}", radius=rng.uniform(20, 50), hdg=rng.uniform(-math.pi, math.pi)), INVALID_ROAD))
    return roads


@acceptance("8: resim sanity on constructed roads")
def test_resim_sanity():
    fixture = resim_fixture()
    assert len(fixture) == 20
    assert 1 / 4.0 > math.tan(math.radians(25)) / 2.5
    config = ConversionConfig(sampling="step:1")
    disagreements = []
    for road, expected in fixture:
        outcome = simulate(generate_spline(through_xml(road), config))
        if outcome.reason != expected:
            disagreements.append((road.id, outcome.reason))
        if expected == REACHED_END:
            assert outcome.max_lateral_deviation < 0.1
        if expected == OUT_OF_BOUNDS:
            assert outcome.oob_position is not None
        steer = outcome.trace[:, 4] if len(outcome.trace) else np.zeros(0)
        assert np.all(np.abs(steer) <= 25.0)
    assert disagreements == []


@acceptance("9: batch determinism and throughput")
def test_batch_determinism(tmp_path):
    write_corpus(tmp_path / "in", 1000, seed=99, campaigns=4)
    start = time.perf_counter()
    for out in ("a", "b"):
        args = ["convert", "--input", str(tmp_path / "in"), "--output", str(tmp_path / out), "--validate"]
        assert main(args) == 0
    elapsed = time.perf_counter() - start

    cmp = filecmp.dircmp(tmp_path / "a", tmp_path / "b")
    pending, mismatched, files = [cmp], [], 0
    while pending:
        d = pending.pop()
        assert not d.left_only and not d.right_only
        _, diff, errors = filecmp.cmpfiles(d.left, d.right, d.common_files, shallow=False)
        mismatched += diff + errors
        files += len(d.common_files)
        pending.extend(d.subdirs.values())
    assert files >= 3 * 1000 + 2
    assert mismatched == []
    assert elapsed < 60.0
