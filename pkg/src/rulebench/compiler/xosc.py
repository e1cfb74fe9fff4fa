"""Deterministic OpenSCENARIO 1.0 emission for compiled scenes.

Every actor gets one entity declaration, a teleport + speed init, and one
follow-trajectory action whose polyline carries the sampled motion in
world coordinates (noted in the document comment). Output is byte-stable:
fixed header timestamp, fixed attribute order, 2-space indentation, LF
line endings, and %.3f float formatting.
"""

from __future__ import annotations

import math
import xml.etree.ElementTree as ET
from typing import Mapping, Sequence

from ..scene.doc import SceneDoc
from .assets import AssetSpec
from .placement import ScenePose
from .trajectory import Trajectory
from .weather import WeatherParams

FIXED_HEADER_DATE = "2024-01-01T00:00:00"
WORLD_FRAME_NOTE = " positions and trajectories are expressed in world coordinates "
_AUTHOR = "rulebench"


class EmitError(ValueError):
    pass


def _num(value: float) -> str:
    return f"{value:.3f}"


def _sun_elevation_rad(params: WeatherParams) -> float:
    return params.sun_altitude_deg * math.pi / 180.0


def _vehicle_entity(parent: ET.Element, name: str, asset: AssetSpec) -> None:
    vehicle = ET.SubElement(
        parent, "Vehicle", {"name": asset.asset, "vehicleCategory": asset.vehicle_category}
    )
    _bounding_box(vehicle, asset)
    ET.SubElement(
        vehicle,
        "Performance",
        {"maxSpeed": "69.444", "maxAcceleration": "5.0", "maxDeceleration": "9.0"},
    )
    axles = ET.SubElement(vehicle, "Axles")
    ET.SubElement(
        axles,
        "FrontAxle",
        {
            "maxSteering": "0.5",
            "wheelDiameter": "0.6",
            "trackWidth": _num(asset.width * 0.9),
            "positionX": _num(asset.length * 0.6),
            "positionZ": "0.3",
        },
    )
    ET.SubElement(
        axles,
        "RearAxle",
        {
            "maxSteering": "0.0",
            "wheelDiameter": "0.6",
            "trackWidth": _num(asset.width * 0.9),
            "positionX": "0.0",
            "positionZ": "0.3",
        },
    )
    _properties(vehicle, asset)


def _pedestrian_entity(parent: ET.Element, name: str, asset: AssetSpec) -> None:
    pedestrian = ET.SubElement(
        parent,
        "Pedestrian",
        {
            "model": asset.asset,
            "name": asset.asset,
            "mass": "80.0",
            "pedestrianCategory": "pedestrian",
        },
    )
    _bounding_box(pedestrian, asset)
    _properties(pedestrian, asset)


def _misc_entity(parent: ET.Element, name: str, asset: AssetSpec) -> None:
    misc = ET.SubElement(
        parent, "MiscObject", {"name": asset.asset, "mass": "50.0", "miscObjectCategory": "obstacle"}
    )
    _bounding_box(misc, asset)
    _properties(misc, asset)


def _bounding_box(parent: ET.Element, asset: AssetSpec) -> None:
    box = ET.SubElement(parent, "BoundingBox")
    ET.SubElement(box, "Center", {"x": "0.0", "y": "0.0", "z": _num(asset.height / 2.0)})
    ET.SubElement(
        box,
        "Dimensions",
        {"width": _num(asset.width), "length": _num(asset.length), "height": _num(asset.height)},
    )


def _properties(parent: ET.Element, asset: AssetSpec) -> None:
    properties = ET.SubElement(parent, "Properties")
    for key, value in asset.attributes:
        ET.SubElement(properties, "Property", {"name": key, "value": str(value).lower()})


def _world_position(parent: ET.Element, x: float, y: float, heading: float) -> None:
    position = ET.SubElement(parent, "Position")
    ET.SubElement(
        position, "WorldPosition", {"x": _num(x), "y": _num(y), "z": "0.0", "h": _num(heading)}
    )


def _simulation_time_condition(parent: ET.Element, name: str, value: float, rule: str) -> None:
    group = ET.SubElement(parent, "ConditionGroup")
    condition = ET.SubElement(
        group, "Condition", {"name": name, "delay": "0.0", "conditionEdge": "rising"}
    )
    by_value = ET.SubElement(condition, "ByValueCondition")
    ET.SubElement(by_value, "SimulationTimeCondition", {"value": _num(value), "rule": rule})


def emit_openscenario(
    doc: SceneDoc,
    poses: Sequence[ScenePose],
    trajectories: Sequence[Trajectory],
    weather: WeatherParams,
    assets: Mapping[str, AssetSpec],
    *,
    scenario_name: str,
    map_name: str,
    horizon: float,
) -> str:
    """Serialize one compiled scene; pure function of its inputs."""
    actor_ids = [actor.id for actor in doc.actors]
    pose_ids = [pose.actor_id for pose in poses]
    trajectory_ids = [trajectory.actor_id for trajectory in trajectories]
    if set(actor_ids) != set(pose_ids) or set(actor_ids) != set(trajectory_ids):
        raise EmitError(
            f"actor sets differ: doc={sorted(actor_ids)} poses={sorted(pose_ids)} "
            f"trajectories={sorted(trajectory_ids)}"
        )
    poses_by_id = {pose.actor_id: pose for pose in poses}
    trajectories_by_id = {trajectory.actor_id: trajectory for trajectory in trajectories}

    root = ET.Element("OpenSCENARIO")
    root.append(ET.Comment(WORLD_FRAME_NOTE))
    ET.SubElement(
        root,
        "FileHeader",
        {
            "revMajor": "1",
            "revMinor": "0",
            "date": FIXED_HEADER_DATE,
            "description": scenario_name,
            "author": _AUTHOR,
        },
    )
    ET.SubElement(root, "ParameterDeclarations")
    ET.SubElement(root, "CatalogLocations")
    road_network = ET.SubElement(root, "RoadNetwork")
    ET.SubElement(road_network, "LogicFile", {"filepath": map_name})

    entities = ET.SubElement(root, "Entities")
    for actor in doc.actors:
        asset = assets[actor.id]
        scenario_object = ET.SubElement(entities, "ScenarioObject", {"name": actor.id})
        if asset.category == "vehicle":
            _vehicle_entity(scenario_object, actor.id, asset)
        elif asset.category == "pedestrian":
            _pedestrian_entity(scenario_object, actor.id, asset)
        else:
            _misc_entity(scenario_object, actor.id, asset)

    storyboard = ET.SubElement(root, "Storyboard")
    init = ET.SubElement(storyboard, "Init")
    actions = ET.SubElement(init, "Actions")

    global_action = ET.SubElement(actions, "GlobalAction")
    environment_action = ET.SubElement(global_action, "EnvironmentAction")
    environment = ET.SubElement(environment_action, "Environment", {"name": "environment"})
    ET.SubElement(
        environment,
        "TimeOfDay",
        {"animation": "false", "dateTime": "2024-01-01T12:00:00"},
    )
    weather_el = ET.SubElement(environment, "Weather", {"cloudState": weather.cloud_state})
    ET.SubElement(
        weather_el,
        "Sun",
        {
            "intensity": "1.0" if weather.sun_altitude_deg > 0 else "0.2",
            "azimuth": "0.0",
            "elevation": _num(_sun_elevation_rad(weather)),
        },
    )
    ET.SubElement(weather_el, "Fog", {"visualRange": _num(weather.visibility_m)})
    ET.SubElement(
        weather_el,
        "Precipitation",
        {
            "precipitationType": weather.precipitation_type if weather.precipitation > 0 else "dry",
            "intensity": _num(weather.precipitation),
        },
    )
    ET.SubElement(
        environment,
        "RoadCondition",
        {"frictionScaleFactor": _num(1.0 - 0.4 * weather.wetness)},
    )

    for actor in doc.actors:
        pose = poses_by_id[actor.id]
        private = ET.SubElement(actions, "Private", {"entityRef": actor.id})
        teleport_wrap = ET.SubElement(private, "PrivateAction")
        teleport = ET.SubElement(teleport_wrap, "TeleportAction")
        _world_position(teleport, pose.x, pose.y, pose.heading)
        speed_wrap = ET.SubElement(private, "PrivateAction")
        longitudinal = ET.SubElement(speed_wrap, "LongitudinalAction")
        speed_action = ET.SubElement(longitudinal, "SpeedAction")
        ET.SubElement(
            speed_action,
            "SpeedActionDynamics",
            {"dynamicsShape": "step", "value": "0.0", "dynamicsDimension": "time"},
        )
        target = ET.SubElement(speed_action, "SpeedActionTarget")
        ET.SubElement(target, "AbsoluteTargetSpeed", {"value": _num(pose.speed_kmh / 3.6)})

    story = ET.SubElement(storyboard, "Story", {"name": f"story_{scenario_name}"})
    act = ET.SubElement(story, "Act", {"name": "act_main"})
    for actor in doc.actors:
        trajectory = trajectories_by_id[actor.id]
        group = ET.SubElement(
            act, "ManeuverGroup", {"name": f"mg_{actor.id}", "maximumExecutionCount": "1"}
        )
        actors_el = ET.SubElement(group, "Actors", {"selectTriggeringEntities": "false"})
        ET.SubElement(actors_el, "EntityRef", {"entityRef": actor.id})
        maneuver = ET.SubElement(group, "Maneuver", {"name": f"maneuver_{actor.id}"})
        event = ET.SubElement(
            maneuver, "Event", {"name": f"event_{actor.id}", "priority": "overwrite"}
        )
        action = ET.SubElement(event, "Action", {"name": f"follow_trajectory_{actor.id}"})
        private_action = ET.SubElement(action, "PrivateAction")
        routing = ET.SubElement(private_action, "RoutingAction")
        follow = ET.SubElement(routing, "FollowTrajectoryAction")
        trajectory_el = ET.SubElement(
            follow, "Trajectory", {"name": f"trajectory_{actor.id}", "closed": "false"}
        )
        shape = ET.SubElement(trajectory_el, "Shape")
        polyline = ET.SubElement(shape, "Polyline")
        for sample in trajectory.samples:
            vertex = ET.SubElement(polyline, "Vertex", {"time": _num(sample.t)})
            _world_position(vertex, sample.x, sample.y, sample.heading)
        time_ref = ET.SubElement(follow, "TimeReference")
        ET.SubElement(
            time_ref, "Timing", {"domainAbsoluteRelative": "absolute", "scale": "1.0", "offset": "0.0"}
        )
        ET.SubElement(follow, "TrajectoryFollowingMode", {"followingMode": "position"})
        start_trigger = ET.SubElement(event, "StartTrigger")
        _simulation_time_condition(start_trigger, f"start_{actor.id}", 0.0, "greaterThan")

    act_start = ET.SubElement(act, "StartTrigger")
    _simulation_time_condition(act_start, "act_start", 0.0, "greaterThan")
    act_stop = ET.SubElement(act, "StopTrigger")
    _simulation_time_condition(act_stop, "act_stop", horizon, "greaterThan")
    storyboard_stop = ET.SubElement(storyboard, "StopTrigger")
    _simulation_time_condition(storyboard_stop, "scenario_end", horizon, "greaterThan")

    ET.indent(root, space="  ")
    body = ET.tostring(root, encoding="unicode")
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + body + "\n"


def validate_openscenario(xml_text: str, expected_actor_ids: Sequence[str]) -> list[str]:
    """Structural checks for the emitted subset; [] when the document passes."""
    problems: list[str] = []
    try:
        root = ET.fromstring(xml_text)
    except ET.ParseError as exc:
        return [f"not well-formed XML: {exc}"]
    if root.tag != "OpenSCENARIO":
        return [f"root element is {root.tag!r}"]
    if root.find("FileHeader") is None:
        problems.append("missing FileHeader")

    expected = set(expected_actor_ids)
    objects = [el.get("name") for el in root.findall("./Entities/ScenarioObject")]
    if len(objects) != len(set(objects)):
        problems.append("duplicate ScenarioObject names")
    if set(objects) != expected:
        problems.append(f"entities {sorted(objects)} do not match actors {sorted(expected)}")

    if root.find("./Storyboard/Init/Actions/GlobalAction/EnvironmentAction") is None:
        problems.append("missing environment action")

    teleports = {
        el.get("entityRef")
        for el in root.findall("./Storyboard/Init/Actions/Private")
        if el.find("./PrivateAction/TeleportAction") is not None
    }
    if teleports != expected:
        problems.append("every actor needs exactly one teleport init")

    follow_actions: dict[str, int] = {}
    for group in root.findall("./Storyboard/Story/Act/ManeuverGroup"):
        refs = [el.get("entityRef") for el in group.findall("./Actors/EntityRef")]
        count = len(group.findall(".//FollowTrajectoryAction"))
        for ref in refs:
            follow_actions[ref] = follow_actions.get(ref, 0) + count
    if set(follow_actions) != expected or any(v != 1 for v in follow_actions.values()):
        problems.append("every actor needs exactly one follow-trajectory action")

    for polyline in root.findall(".//Polyline"):
        times = [float(v.get("time")) for v in polyline.findall("Vertex")]
        if not times:
            problems.append("empty trajectory polyline")
        elif any(b <= a for a, b in zip(times, times[1:])):
            problems.append("vertex times are not strictly increasing")

    return problems
