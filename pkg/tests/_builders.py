"""Road constructions shared by the test modules."""

import math

from xodr2spline.ingest import Arc, Line, RoadNetwork, dump_xodr, parse_xodr
from xodr2spline.synth import chain_road


def through_xml(road):
    """Round-trip a road through OpenDRIVE text so tests exercise the parser too."""
    return parse_xodr(dump_xodr(RoadNetwork((road,), road.id)), road.id).roads[0]


def straight(road_id="straight", length=200.0, pieces=5, hdg=0.0, start=(0.0, 0.0), left=(4.0,), right=(4.0,)):
    step = length / pieces
    return chain_road(road_id, [(Line(), step)] * pieces, (start[0], start[1], hdg), left, right)


def loop(road_id="loop", radius=30.0, pieces=4, hdg=0.0, left=(2.0,), right=(2.0,)):
    arc = 2.0 * math.pi * radius / pieces
    return chain_road(road_id, [(Arc(1.0 / radius), arc)] * pieces, (0.0, 0.0, hdg), left, right)


def crossing(road_id="cross", lead=60.0, radius=15.0, tail=40.0, hdg=0.0):
    """Line, 270 degree left arc, then a line that cuts back across the lead-in."""
    return chain_road(
        road_id,
        [(Line(), lead), (Arc(1.0 / radius), 1.5 * math.pi * radius), (Line(), tail)],
        (0.0, 0.0, hdg),
    )


def hairpin(road_id="hairpin", radius=2.5, leg=30.0, hdg=0.0, half_lane=1.5):
    return chain_road(
        road_id,
        [(Line(), leg), (Arc(1.0 / radius), math.pi * radius), (Line(), leg)],
        (0.0, 0.0, hdg),
        (half_lane,),
        (half_lane,),
    )
