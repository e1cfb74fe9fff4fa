"""Static scene instantiation on a synthetic road network.

Actors are placed in reference order: landmark-anchored actors first, then
actors whose reference is already placed. A mutual reference pair roots at
the scene's road-type landmark. Relations resolve to lane-based poses
(front/behind along the lane, left/right as the adjacent lane or a lateral
offset, ``at`` on the reference itself); declared distances are honored
exactly, defaults come from the placement config. If bounding-shape
clearance fails, unconstrained degrees of freedom (default gaps only) are
resampled with seeded jitter for a bounded number of rounds.

``verify_relations`` is the independent post-hoc checker: it re-derives
every declared relation purely from the emitted world poses (reference-
frame projection), never from the placement bookkeeping above.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from shapely.geometry import Polygon

from ..scene.doc import Actor, SceneDoc
from .assets import AssetSpec
from .geometry import rotate_into_frame
from .roadnet import RoadNetwork

ABREAST_TOLERANCE = 5.0
AT_TOLERANCE = 2.0


@dataclass(frozen=True)
class PlacementConfig:
    front_gap: float = 15.0
    side_gap: float = 3.0
    clearance: float = 0.5
    max_rounds: int = 50
    distance_tol: float = 0.5


@dataclass(frozen=True)
class ScenePose:
    actor_id: str
    x: float
    y: float
    heading: float
    road_id: str
    lane_index: int
    speed_kmh: float
    length: float
    width: float


class PlacementError(RuntimeError):
    def __init__(self, message: str, violations: Sequence[str] = ()):
        self.violations = tuple(violations)
        if violations:
            message = message + ": " + "; ".join(violations)
        super().__init__(message)


@dataclass
class _Anchor:
    road_id: str
    lane: int
    s: float
    extra_lateral: float = 0.0


def _actor_speed(actor: Actor, asset: AssetSpec) -> float:
    if actor.behavior in ("stop", "wait"):
        return 0.0
    if actor.speed is not None:
        return actor.speed
    return asset.default_speed


def _pose_from_anchor(
    actor: Actor, anchor: _Anchor, network: RoadNetwork, asset: AssetSpec
) -> ScenePose:
    road = network.road(anchor.road_id)
    line = network.polyline(anchor.road_id)
    lateral = road.lane_offset(anchor.lane) + anchor.extra_lateral
    x, y = line.offset_point(anchor.s, lateral)
    heading = line.heading_at(anchor.s)
    if actor.behavior == "walk_cross":
        # cross toward the far side of the carriageway
        heading += math.pi / 2 if lateral <= 0 else -math.pi / 2
    return ScenePose(
        actor_id=actor.id,
        x=x,
        y=y,
        heading=heading,
        road_id=anchor.road_id,
        lane_index=anchor.lane,
        speed_kmh=_actor_speed(actor, asset),
        length=asset.length,
        width=asset.width,
    )


def _footprint(pose: ScenePose) -> Polygon:
    half_l, half_w = pose.length / 2.0, pose.width / 2.0
    cos_h, sin_h = math.cos(pose.heading), math.sin(pose.heading)
    corners = []
    for dx, dy in ((half_l, half_w), (half_l, -half_w), (-half_l, -half_w), (-half_l, half_w)):
        corners.append((pose.x + dx * cos_h - dy * sin_h, pose.y + dx * sin_h + dy * cos_h))
    return Polygon(corners)


def _root_anchor(doc: SceneDoc, network: RoadNetwork) -> _Anchor:
    name = doc.road_network.road_type
    if network.has_landmark(name):
        landmark = network.landmark(name)
    elif network.has_landmark("start"):
        landmark = network.landmark("start")
    else:
        road = network.roads[0]
        return _Anchor(road.id, 0, network.polyline(road.id).length / 2.0)
    return _Anchor(landmark.road_id, landmark.lane, landmark.s)


def instantiate_static_scene(
    doc: SceneDoc,
    network: RoadNetwork,
    assets: Mapping[str, AssetSpec],
    seed: int,
    config: PlacementConfig = PlacementConfig(),
) -> list[ScenePose]:
    """Place every actor; deterministic for a fixed seed.

    Raises ``PlacementError`` with the violated relation set when no
    clearance-satisfying placement is found within the resampling budget.
    """
    rng = random.Random(seed)
    landmarks = doc.landmarks
    last_violations: list[str] = []

    for round_index in range(config.max_rounds):
        jittered = round_index > 0
        anchors: dict[str, _Anchor] = {}
        deferred = [actor for actor in doc.actors]
        progressed = True
        while deferred:
            if not progressed:
                # remaining actors form mutual pairs; root the first one
                root = deferred[0]
                anchors[root.id] = _root_anchor(doc, network)
                deferred = [a for a in deferred if a.id != root.id]
            progressed = False
            still = []
            for actor in deferred:
                reference = actor.position.reference
                if reference in landmarks:
                    landmark = network.landmark(reference)
                    ref_anchor = _Anchor(landmark.road_id, landmark.lane, landmark.s)
                elif reference in anchors:
                    ref_anchor = anchors[reference]
                else:
                    still.append(actor)
                    continue
                anchors[actor.id] = _relative_anchor(
                    actor, ref_anchor, network, config, rng, jittered
                )
                progressed = True
            deferred = still

        poses = [_pose_from_anchor(actor, anchors[actor.id], network, assets[actor.id]) for actor in doc.actors]
        clearance_violations = _clearance_violations(poses, config.clearance)
        relation_violations = verify_relations(doc, poses, network, config)
        if not clearance_violations and not relation_violations:
            return poses
        last_violations = clearance_violations + relation_violations

    raise PlacementError(
        f"no clearance-satisfying placement within {config.max_rounds} rounds",
        last_violations,
    )


def _relative_anchor(
    actor: Actor,
    ref: _Anchor,
    network: RoadNetwork,
    config: PlacementConfig,
    rng: random.Random,
    jittered: bool,
) -> _Anchor:
    relation = actor.position.relation
    declared = actor.position.distance
    road = network.road(ref.road_id)

    if relation in ("front", "behind"):
        gap = declared if declared is not None else config.front_gap + (
            rng.uniform(0.0, config.front_gap) if jittered else 0.0
        )
        sign = 1.0 if relation == "front" else -1.0
        return _Anchor(ref.road_id, ref.lane, ref.s + sign * gap, ref.extra_lateral)
    if relation in ("left", "right"):
        sign = 1.0 if relation == "left" else -1.0
        if declared is not None:
            return _Anchor(ref.road_id, ref.lane, ref.s, ref.extra_lateral + sign * declared)
        target_lane = ref.lane + (1 if relation == "left" else -1)
        if 0 <= target_lane < road.lane_count:
            s_jitter = rng.uniform(-4.0, 4.0) if jittered else 0.0
            return _Anchor(ref.road_id, target_lane, ref.s + s_jitter, ref.extra_lateral)
        side = config.side_gap + (rng.uniform(0.0, 2.0) if jittered else 0.0)
        return _Anchor(ref.road_id, ref.lane, ref.s, ref.extra_lateral + sign * side)
    if relation == "at":
        return _Anchor(ref.road_id, ref.lane, ref.s, ref.extra_lateral)
    raise PlacementError(f"unsupported relation {relation!r} for actor {actor.id!r}")


def _clearance_violations(poses: Sequence[ScenePose], clearance: float) -> list[str]:
    violations = []
    footprints = [(pose.actor_id, _footprint(pose)) for pose in poses]
    for i in range(len(footprints)):
        for j in range(i + 1, len(footprints)):
            id_a, poly_a = footprints[i]
            id_b, poly_b = footprints[j]
            gap = poly_a.distance(poly_b)
            if gap < clearance:
                violations.append(f"clearance {id_a}/{id_b} = {gap:.2f} m < {clearance:g} m")
    return violations


def _reference_frame(
    reference: str,
    doc: SceneDoc,
    poses: Mapping[str, ScenePose],
    network: RoadNetwork,
) -> tuple[float, float, float]:
    if reference in doc.landmarks:
        landmark = network.landmark(reference)
        line = network.polyline(landmark.road_id)
        lateral = network.road(landmark.road_id).lane_offset(landmark.lane)
        x, y = line.offset_point(landmark.s, lateral)
        return x, y, line.heading_at(landmark.s)
    pose = poses[reference]
    # lane tangent, not the actor's facing: crossing pedestrians still
    # anchor their neighbors along the road axis
    line = network.polyline(pose.road_id)
    heading = line.heading_at(line.project(pose.x, pose.y))
    return pose.x, pose.y, heading


def verify_relations(
    doc: SceneDoc,
    poses: Sequence[ScenePose] | Mapping[str, ScenePose],
    network: RoadNetwork,
    config: PlacementConfig = PlacementConfig(),
) -> list[str]:
    """Re-derive every declared relation from world poses; [] when all hold."""
    if not isinstance(poses, Mapping):
        poses = {pose.actor_id: pose for pose in poses}
    violations: list[str] = []
    for actor in doc.actors:
        pose = poses.get(actor.id)
        if pose is None:
            violations.append(f"{actor.id}: no pose emitted")
            continue
        rx, ry, rh = _reference_frame(actor.position.reference, doc, poses, network)
        longitudinal, lateral = rotate_into_frame(pose.x - rx, pose.y - ry, rh)
        relation = actor.position.relation
        declared = actor.position.distance
        label = f"{actor.id} {relation} {actor.position.reference}"

        if relation == "front":
            if longitudinal <= 0:
                violations.append(f"{label}: not ahead (longitudinal {longitudinal:.2f})")
            elif declared is not None and abs(longitudinal - declared) > config.distance_tol:
                violations.append(
                    f"{label}: gap {longitudinal:.2f} m vs declared {declared:g} m"
                )
        elif relation == "behind":
            if longitudinal >= 0:
                violations.append(f"{label}: not behind (longitudinal {longitudinal:.2f})")
            elif declared is not None and abs(-longitudinal - declared) > config.distance_tol:
                violations.append(
                    f"{label}: gap {-longitudinal:.2f} m vs declared {declared:g} m"
                )
        elif relation in ("left", "right"):
            signed = lateral if relation == "left" else -lateral
            if signed <= 0:
                violations.append(f"{label}: wrong side (lateral {lateral:.2f})")
            elif declared is not None and abs(signed - declared) > config.distance_tol:
                violations.append(f"{label}: offset {signed:.2f} m vs declared {declared:g} m")
            elif abs(longitudinal) > ABREAST_TOLERANCE:
                violations.append(
                    f"{label}: not abreast (longitudinal {longitudinal:.2f} m)"
                )
        elif relation == "at":
            offset = math.hypot(pose.x - rx, pose.y - ry)
            limit = declared + config.distance_tol if declared is not None else AT_TOLERANCE
            if offset > limit:
                violations.append(f"{label}: {offset:.2f} m away (limit {limit:g})")
        else:
            violations.append(f"{label}: unknown relation")
    return violations
