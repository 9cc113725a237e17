"""Loading scenario files and parsing the supported OpenDRIVE subset.

Supported elements: ``road{id,length}``, ``planView/geometry`` with one of
``line``, ``arc``, ``spiral``, ``poly3`` or ``paramPoly3``,
``elevationProfile/elevation`` and ``lanes/laneSection/{left,center,right}/lane/width``.
Anything else is skipped and counted in :attr:`RoadNetwork.skipped`.
"""

from __future__ import annotations

import json
import math
import os
import warnings
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union
from xml.parsers import expat

from .errors import (
    BadAttributeError,
    GeometryWarning,
    MalformedXmlError,
    MissingFieldError,
    MissingPlanViewError,
    NotTextError,
    UnknownGeometryError,
)

DEFAULT_JSON_POINTER = "/OpenDRIVE"
LENGTH_TOLERANCE = 1e-6


# ---------------------------------------------------------------------------
# Domain model
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Line:
    pass


@dataclass(frozen=True)
class Arc:
    curvature: float


@dataclass(frozen=True)
class Spiral:
    curv_start: float
    curv_end: float


@dataclass(frozen=True)
class Poly3:
    a: float
    b: float
    c: float
    d: float


@dataclass(frozen=True)
class ParamPoly3:
    aU: float
    bU: float
    cU: float
    dU: float
    aV: float
    bV: float
    cV: float
    dV: float
    p_range: str = "normalized"


Shape = Union[Line, Arc, Spiral, Poly3, ParamPoly3]


@dataclass(frozen=True)
class GeometrySegment:
    """One reference-line primitive starting at arc length ``s``."""

    s: float
    x: float
    y: float
    hdg: float
    length: float
    shape: Shape = field(default_factory=Line)

    @property
    def kind(self) -> str:
        return _SHAPE_TAGS[type(self.shape)]


@dataclass(frozen=True)
class ElevationSegment:
    s: float
    a: float
    b: float = 0.0
    c: float = 0.0
    d: float = 0.0


@dataclass(frozen=True)
class WidthPoly:
    s_offset: float
    a: float
    b: float = 0.0
    c: float = 0.0
    d: float = 0.0


@dataclass(frozen=True)
class Lane:
    id: int
    lane_type: str = "driving"
    widths: tuple[WidthPoly, ...] = ()


@dataclass(frozen=True)
class LaneSection:
    s: float
    left: tuple[Lane, ...] = ()
    right: tuple[Lane, ...] = ()


@dataclass(frozen=True)
class Road:
    id: str
    length: float
    plan_view: tuple[GeometrySegment, ...]
    elevation_profile: tuple[ElevationSegment, ...] = ()
    lane_sections: tuple[LaneSection, ...] = (LaneSection(0.0),)

    @property
    def end_s(self) -> float:
        last = self.plan_view[-1]
        return last.s + last.length


@dataclass(frozen=True)
class RoadNetwork:
    roads: tuple[Road, ...]
    source_id: str = ""
    skipped: int = 0

    def __post_init__(self):
        if not self.roads:
            raise MissingFieldError("OpenDRIVE document contains no road")
        ids = [r.id for r in self.roads]
        if len(set(ids)) != len(ids):
            dup = next(i for i in ids if ids.count(i) > 1)
            raise BadAttributeError("duplicate road id", road_id=dup)


_SHAPE_TAGS = {Line: "line", Arc: "arc", Spiral: "spiral", Poly3: "poly3", ParamPoly3: "paramPoly3"}


# ---------------------------------------------------------------------------
# Scenario loading
# ---------------------------------------------------------------------------


def resolve_pointer(doc, pointer: str):
    """Resolve an RFC 6901 JSON pointer against ``doc``.

    Raises MissingFieldError if any token does not resolve.
    """
    if pointer in ("", "/"):
        return doc if pointer == "" else _step(doc, "", pointer)
    if not pointer.startswith("/"):
        raise MissingFieldError(f"JSON pointer must start with '/': {pointer!r}")
    node = doc
    for token in pointer[1:].split("/"):
        node = _step(node, token.replace("~1", "/").replace("~0", "~"), pointer)
    return node


def _step(node, token, pointer):
    if isinstance(node, dict):
        if token in node:
            return node[token]
    elif isinstance(node, list) and token.isdigit():
        idx = int(token)
        if idx < len(node):
            return node[idx]
    raise MissingFieldError(f"JSON pointer {pointer!r} does not resolve at {token!r}")


def _sniff_format(source, fmt: str) -> str:
    if fmt != "auto":
        return fmt
    if isinstance(source, (str, os.PathLike)):
        suffix = Path(source).suffix.lower()
        if suffix == ".json":
            return "json"
        if suffix in (".xodr", ".xml"):
            return "xodr"
    raw = source if isinstance(source, (bytes, bytearray)) else Path(source).read_bytes()
    head = bytes(raw).lstrip()[:1]
    return "json" if head in (b"{", b"[") else "xodr"


def load_scenario(source, format: str = "auto", json_pointer: str = DEFAULT_JSON_POINTER) -> str:
    """Return the OpenDRIVE XML text held by ``source``.

    ``source`` is a path or raw bytes. For ``.xodr`` input the decoded text is
    returned untouched; for JSON scenarios the string at ``json_pointer`` is
    returned as embedded. File system errors propagate as ``OSError``.
    """
    if format not in ("auto", "xodr", "json"):
        raise ValueError(f"unknown scenario format {format!r}")
    fmt = _sniff_format(source, format)
    raw = bytes(source) if isinstance(source, (bytes, bytearray)) else Path(source).read_bytes()
    text = raw.decode("utf-8")
    if fmt == "xodr":
        return text
    value = resolve_pointer(json.loads(text), json_pointer)
    if not isinstance(value, str):
        raise NotTextError(
            f"JSON pointer {json_pointer!r} resolves to {type(value).__name__}, not text"
        )
    return value


# ---------------------------------------------------------------------------
# XML parsing
# ---------------------------------------------------------------------------


class _Node:
    __slots__ = ("tag", "attrib", "children", "line")

    def __init__(self, tag, attrib, line):
        self.tag = tag
        self.attrib = attrib
        self.children = []
        self.line = line

    def find(self, tag):
        for child in self.children:
            if child.tag == tag:
                return child
        return None

    def findall(self, tag):
        return [c for c in self.children if c.tag == tag]


def _build_tree(xml: str) -> _Node:
    # expat directly so every element keeps its source line
    parser = expat.ParserCreate()
    stack: list[_Node] = []
    root: list[_Node] = []

    def start(tag, attrib):
        node = _Node(tag, attrib, parser.CurrentLineNumber)
        if stack:
            stack[-1].children.append(node)
        else:
            root.append(node)
        stack.append(node)

    def end(tag):
        stack.pop()

    parser.StartElementHandler = start
    parser.EndElementHandler = end
    try:
        parser.Parse(xml, True)
    except expat.ExpatError as exc:
        raise MalformedXmlError(f"malformed XML: {expat.ErrorString(exc.code)}", line=exc.lineno) from None
    if not root:
        raise MalformedXmlError("empty XML document")
    return root[0]


def _num(node: _Node, name: str, road_id=None, default: float | None = None) -> float:
    raw = node.attrib.get(name)
    if raw is None:
        if default is not None:
            return default
        raise BadAttributeError(f"<{node.tag}> missing attribute {name!r}", road_id, node.line)
    try:
        value = float(raw.strip())
    except ValueError:
        raise BadAttributeError(
            f"<{node.tag}> attribute {name}={raw!r} is not a number", road_id, node.line
        ) from None
    if not math.isfinite(value):
        raise BadAttributeError(f"<{node.tag}> attribute {name}={raw!r} is not finite", road_id, node.line)
    return value


class _Counter:
    def __init__(self):
        self.n = 0

    def skip(self, nodes):
        self.n += len(nodes)


def _parse_shape(geom: _Node, road_id) -> Shape:
    for child in geom.children:
        tag = child.tag
        if tag == "line":
            return Line()
        if tag == "arc":
            return Arc(_num(child, "curvature", road_id))
        if tag == "spiral":
            return Spiral(_num(child, "curvStart", road_id), _num(child, "curvEnd", road_id))
        if tag == "poly3":
            return Poly3(*(_num(child, k, road_id) for k in "abcd"))
        if tag == "paramPoly3":
            coeffs = [_num(child, f"{k}{ax}", road_id) for ax in "UV" for k in "abcd"]
            p_range = child.attrib.get("pRange", "normalized")
            if p_range not in ("normalized", "arcLength"):
                raise BadAttributeError(f"unknown pRange {p_range!r}", road_id, child.line)
            return ParamPoly3(*coeffs, p_range=p_range)
    raise UnknownGeometryError("geometry element has no recognized shape child", road_id, geom.line)


def _check_increasing(values, what, road_id, line):
    for prev, cur in zip(values, values[1:]):
        if not cur > prev:
            raise BadAttributeError(f"{what} not strictly increasing in s", road_id, line)


def _parse_lane(node: _Node, road_id, counter: _Counter) -> Lane:
    raw_id = node.attrib.get("id")
    try:
        lane_id = int(raw_id)
    except (TypeError, ValueError):
        raise BadAttributeError(f"lane id {raw_id!r} is not an integer", road_id, node.line) from None
    widths = []
    for child in node.children:
        if child.tag == "width":
            widths.append(
                WidthPoly(
                    _num(child, "sOffset", road_id, 0.0),
                    *(_num(child, k, road_id, 0.0) for k in "abcd"),
                )
            )
        else:
            counter.skip([child])
    widths.sort(key=lambda w: w.s_offset)
    return Lane(lane_id, node.attrib.get("type", "driving"), tuple(widths))


def _parse_lane_section(node: _Node, road_id, counter: _Counter) -> LaneSection:
    sides = {"left": [], "right": []}
    for child in node.children:
        if child.tag in sides:
            for lane_node in child.children:
                if lane_node.tag != "lane":
                    counter.skip([lane_node])
                    continue
                sides[child.tag].append(_parse_lane(lane_node, road_id, counter))
        elif child.tag == "center":
            for lane_node in child.children:
                # the center lane carries no width; only its road marks, if any, are skipped
                counter.skip(lane_node.children)
        else:
            counter.skip([child])
    for side, sign in (("left", 1), ("right", -1)):
        ids = [lane.id for lane in sides[side]]
        if any(i * sign <= 0 for i in ids) or len(set(ids)) != len(ids):
            raise BadAttributeError(f"invalid {side} lane ids {ids}", road_id, node.line)
    left = tuple(sorted(sides["left"], key=lambda lane: lane.id))
    right = tuple(sorted(sides["right"], key=lambda lane: -lane.id))
    return LaneSection(_num(node, "s", road_id, 0.0), left, right)


def _parse_road(node: _Node, counter: _Counter) -> Road:
    road_id = node.attrib.get("id", "")
    plan = node.find("planView")
    if plan is None:
        raise MissingPlanViewError("road has no planView", road_id, node.line)

    segments = []
    for geom in plan.children:
        if geom.tag != "geometry":
            counter.skip([geom])
            continue
        length = _num(geom, "length", road_id)
        if not length > 0:
            raise BadAttributeError(f"geometry length {length} must be positive", road_id, geom.line)
        segments.append(
            GeometrySegment(
                s=_num(geom, "s", road_id),
                x=_num(geom, "x", road_id),
                y=_num(geom, "y", road_id),
                hdg=_num(geom, "hdg", road_id),
                length=length,
                shape=_parse_shape(geom, road_id),
            )
        )
    _check_increasing([g.s for g in segments], "planView geometry", road_id, plan.line)

    elevations = []
    lane_sections = []
    for child in node.children:
        if child.tag == "planView":
            continue
        if child.tag == "elevationProfile":
            for elev in child.children:
                if elev.tag != "elevation":
                    counter.skip([elev])
                    continue
                elevations.append(
                    ElevationSegment(_num(elev, "s", road_id), *(_num(elev, k, road_id, 0.0) for k in "abcd"))
                )
        elif child.tag == "lanes":
            for sub in child.children:
                if sub.tag == "laneSection":
                    lane_sections.append(_parse_lane_section(sub, road_id, counter))
                else:
                    counter.skip([sub])
        else:
            counter.skip([child])
    _check_increasing([e.s for e in elevations], "elevation profile", road_id, node.line)
    _check_increasing([ls.s for ls in lane_sections], "lane sections", road_id, node.line)
    if not lane_sections:
        warnings.warn(f"road {road_id!r} has no lanes; using an empty lane section", GeometryWarning, stacklevel=3)
        lane_sections.append(LaneSection(0.0))

    if "length" in node.attrib:
        length = _num(node, "length", road_id)
    else:
        length = max((g.s + g.length for g in segments), default=0.0)
    for g in segments:
        if g.s + g.length > length + LENGTH_TOLERANCE:
            warnings.warn(
                f"road {road_id!r}: geometry at s={g.s} extends past road length {length}",
                GeometryWarning,
                stacklevel=3,
            )
    return Road(road_id, length, tuple(segments), tuple(elevations), tuple(lane_sections))


def parse_xodr(xml: str, source_id: str = "") -> RoadNetwork:
    """Parse OpenDRIVE text into a :class:`RoadNetwork`."""
    root = _build_tree(xml)
    if root.tag != "OpenDRIVE":
        raise MalformedXmlError(f"root element is <{root.tag}>, expected <OpenDRIVE>", line=root.line)
    counter = _Counter()
    roads = []
    for child in root.children:
        if child.tag == "road":
            roads.append(_parse_road(child, counter))
        elif child.tag != "header":
            counter.skip([child])
    if counter.n:
        warnings.warn(f"{source_id or 'document'}: skipped {counter.n} unsupported elements", GeometryWarning, stacklevel=2)
    return RoadNetwork(tuple(roads), source_id, counter.n)


# ---------------------------------------------------------------------------
# Serialization of the supported subset (fixtures and round-trip checks)
# ---------------------------------------------------------------------------


def _fmt(value: float) -> str:
    return repr(float(value))


def _shape_element(parent: ET.Element, shape: Shape) -> None:
    tag = _SHAPE_TAGS[type(shape)]
    if isinstance(shape, Line):
        ET.SubElement(parent, tag)
    elif isinstance(shape, Arc):
        ET.SubElement(parent, tag, curvature=_fmt(shape.curvature))
    elif isinstance(shape, Spiral):
        ET.SubElement(parent, tag, curvStart=_fmt(shape.curv_start), curvEnd=_fmt(shape.curv_end))
    elif isinstance(shape, Poly3):
        ET.SubElement(parent, tag, {k: _fmt(getattr(shape, k)) for k in "abcd"})
    else:
        attrs = {f"{k}{ax}": _fmt(getattr(shape, f"{k}{ax}")) for ax in "UV" for k in "abcd"}
        attrs["pRange"] = shape.p_range
        ET.SubElement(parent, tag, attrs)


def _poly_attrs(poly) -> dict:
    return {k: _fmt(getattr(poly, k)) for k in "abcd"}


def dump_xodr(network: RoadNetwork) -> str:
    """Serialize ``network`` back to OpenDRIVE text (supported subset only)."""
    root = ET.Element("OpenDRIVE")
    ET.SubElement(root, "header", revMajor="1", revMinor="6")
    for road in network.roads:
        r = ET.SubElement(root, "road", id=road.id, length=_fmt(road.length), junction="-1")
        plan = ET.SubElement(r, "planView")
        for g in road.plan_view:
            geom = ET.SubElement(
                plan, "geometry", s=_fmt(g.s), x=_fmt(g.x), y=_fmt(g.y), hdg=_fmt(g.hdg), length=_fmt(g.length)
            )
            _shape_element(geom, g.shape)
        if road.elevation_profile:
            prof = ET.SubElement(r, "elevationProfile")
            for e in road.elevation_profile:
                ET.SubElement(prof, "elevation", s=_fmt(e.s), **_poly_attrs(e))
        lanes = ET.SubElement(r, "lanes")
        for sec in road.lane_sections:
            sec_el = ET.SubElement(lanes, "laneSection", s=_fmt(sec.s))
            for side, lane_list in (("left", sec.left), ("center", ()), ("right", sec.right)):
                side_el = ET.SubElement(sec_el, side)
                if side == "center":
                    ET.SubElement(side_el, "lane", id="0", type="none")
                for lane in lane_list:
                    lane_el = ET.SubElement(side_el, "lane", id=str(lane.id), type=lane.lane_type)
                    for w in lane.widths:
                        ET.SubElement(lane_el, "width", sOffset=_fmt(w.s_offset), **_poly_attrs(w))
    ET.indent(root)
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + ET.tostring(root, encoding="unicode") + "\n"
