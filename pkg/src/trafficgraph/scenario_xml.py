"""Parser for the supported scenario-file subset.

Reads the 2020a-style XML layout: a ``commonRoad`` root carrying
``benchmarkID`` and ``timeStepSize``, ``lanelet`` elements with point-list
bounds and topology references, and ``dynamicObstacle`` elements with a
rectangle shape, an initial state and a trajectory of states.  Scalar
speeds/accelerations are resolved against the state orientation into 2-D
vectors.  Anything outside the subset (traffic signs, planning problems,
non-rectangular obstacles, ...) is skipped with a warning.
"""
from __future__ import annotations

import logging
import xml.etree.ElementTree as ET
from collections import Counter
from typing import Optional

import numpy as np

from .errors import ScenarioParseError
from .geometry import Polyline
from .scenario import (
    AdjacentRef,
    DynamicObstacle,
    Lanelet,
    Scenario,
    VehicleState,
)

__all__ = ["parse_scenario"]

logger = logging.getLogger(__name__)


def parse_scenario(data) -> Scenario:
    """Parse scenario file content (bytes or str) into a Scenario."""
    if isinstance(data, str):
        data = data.encode("utf-8")
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        line, column = exc.position
        raise ScenarioParseError(
            f"malformed scenario XML at line {line}, column {column}: {exc}"
        ) from exc
    if root.tag != "commonRoad":
        raise ScenarioParseError(f"expected <commonRoad> root, got <{root.tag}>")
    scenario_id = root.get("benchmarkID")
    if not scenario_id:
        raise ScenarioParseError("missing benchmarkID attribute on root element")
    dt_text = root.get("timeStepSize")
    if dt_text is None:
        raise ScenarioParseError("missing timeStepSize attribute on root element")
    try:
        dt = float(dt_text)
    except ValueError as exc:
        raise ScenarioParseError(f"invalid timeStepSize {dt_text!r}") from exc

    lanelets = {}
    obstacles = {}
    skipped = Counter()
    for child in root:
        if child.tag == "lanelet":
            lanelet = _parse_lanelet(child)
            lanelets[lanelet.id] = lanelet
        elif child.tag == "dynamicObstacle":
            obstacle = _parse_obstacle(child)
            if obstacle is not None:
                obstacles[obstacle.id] = obstacle
        else:
            skipped[child.tag] += 1
    for tag, count in sorted(skipped.items()):
        logger.warning(
            "scenario %s: ignoring %d unsupported <%s> element(s)",
            scenario_id, count, tag,
        )
    return Scenario(id=scenario_id, dt=dt, lanelets=lanelets, obstacles=obstacles)


def _require_id(elem: ET.Element, what: str) -> int:
    raw = elem.get("id")
    if raw is None:
        raise ScenarioParseError(f"{what} element without id attribute")
    try:
        return int(raw)
    except ValueError as exc:
        raise ScenarioParseError(f"{what} id {raw!r} is not an integer") from exc


def _parse_point_list(elem: ET.Element, what: str) -> Polyline:
    points = []
    for point in elem.findall("point"):
        x = point.findtext("x")
        y = point.findtext("y")
        if x is None or y is None:
            raise ScenarioParseError(f"{what}: point without x/y coordinates")
        try:
            points.append((float(x), float(y)))
        except ValueError as exc:
            raise ScenarioParseError(f"{what}: non-numeric coordinate") from exc
    return Polyline(np.array(points, dtype=float).reshape(-1, 2))


def _parse_adjacent(elem: Optional[ET.Element], what: str):
    if elem is None:
        return ()
    raw = elem.get("ref")
    if raw is None:
        raise ScenarioParseError(f"{what}: adjacency without ref attribute")
    direction = elem.get("drivingDir", "same")
    if direction not in ("same", "opposite"):
        raise ScenarioParseError(f"{what}: invalid drivingDir {direction!r}")
    return (AdjacentRef(int(raw), direction == "same"),)


def _parse_lanelet(elem: ET.Element) -> Lanelet:
    lanelet_id = _require_id(elem, "lanelet")
    what = f"lanelet {lanelet_id}"
    left = elem.find("leftBound")
    right = elem.find("rightBound")
    if left is None or right is None:
        raise ScenarioParseError(f"{what}: missing leftBound/rightBound")
    return Lanelet(
        id=lanelet_id,
        left_bound=_parse_point_list(left, f"{what} leftBound"),
        right_bound=_parse_point_list(right, f"{what} rightBound"),
        predecessors=frozenset(
            int(p.get("ref")) for p in elem.findall("predecessor")
        ),
        successors=frozenset(
            int(s.get("ref")) for s in elem.findall("successor")
        ),
        adjacent_left=_parse_adjacent(elem.find("adjacentLeft"), what),
        adjacent_right=_parse_adjacent(elem.find("adjacentRight"), what),
    )


def _scalar(state: ET.Element, tag: str, what: str, required: bool = False):
    node = state.find(tag)
    if node is None:
        if required:
            raise ScenarioParseError(f"{what}: state missing <{tag}>")
        return None
    text = node.findtext("exact")
    if text is None:
        text = node.text
    if text is None or not text.strip():
        raise ScenarioParseError(f"{what}: <{tag}> has no value")
    try:
        return float(text)
    except ValueError as exc:
        raise ScenarioParseError(f"{what}: non-numeric <{tag}>") from exc


def _parse_state(elem: ET.Element, what: str) -> VehicleState:
    position = elem.find("position/point")
    if position is None:
        raise ScenarioParseError(f"{what}: state without <position><point>")
    x = position.findtext("x")
    y = position.findtext("y")
    if x is None or y is None:
        raise ScenarioParseError(f"{what}: state position without x/y")
    orientation = _scalar(elem, "orientation", what, required=True)
    timestep = _scalar(elem, "time", what, required=True)
    if timestep != int(timestep):
        raise ScenarioParseError(f"{what}: non-integer time {timestep}")
    speed = _scalar(elem, "velocity", what, required=True)
    heading = np.array([np.cos(orientation), np.sin(orientation)])
    accel = _scalar(elem, "acceleration", what)
    yaw_rate = _scalar(elem, "yawRate", what)
    return VehicleState(
        timestep=int(timestep),
        position=(float(x), float(y)),
        orientation=orientation,
        velocity=speed * heading,
        acceleration=None if accel is None else accel * heading,
        yaw_rate=yaw_rate,
    )


def _parse_obstacle(elem: ET.Element) -> Optional[DynamicObstacle]:
    obstacle_id = _require_id(elem, "dynamicObstacle")
    what = f"obstacle {obstacle_id}"
    rectangle = elem.find("shape/rectangle")
    if rectangle is None:
        logger.warning("%s: skipping non-rectangular obstacle", what)
        return None
    length = rectangle.findtext("length")
    width = rectangle.findtext("width")
    if length is None or width is None:
        raise ScenarioParseError(f"{what}: rectangle without length/width")
    initial = elem.find("initialState")
    if initial is None:
        raise ScenarioParseError(f"{what}: missing initialState")
    states = [_parse_state(initial, what)]
    trajectory = elem.find("trajectory")
    if trajectory is not None:
        states.extend(
            _parse_state(s, what) for s in trajectory.findall("state")
        )
    return DynamicObstacle(
        id=obstacle_id,
        length=float(length),
        width=float(width),
        trajectory=states,
    )
