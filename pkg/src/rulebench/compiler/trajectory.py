"""Trajectory synthesis from placed poses and behavioral semantics.

One trajectory per actor, sampled at t = 0, dt, ..., horizon. The strategy
comes from the behavior table (a data file): centerline following with
optional speed ramps, lane changes with a smoothstep lateral profile,
leader-capped following, decelerating approach toward the referenced
target, and perpendicular pedestrian crossing. Stopped actors emit
constant-pose samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from typing import Mapping, Optional, Sequence

import yaml

from ..scene.doc import SceneDoc
from .placement import ScenePose
from .roadnet import RoadNetwork


class Strategy(str, Enum):
    CENTERLINE_FOLLOW = "centerline_follow"
    LANE_CHANGE = "lane_change"
    FOLLOWING = "following"
    INTERACTIVE_APPROACH = "interactive_approach"
    PEDESTRIAN_NAV = "pedestrian_nav"


@dataclass(frozen=True)
class TrajectorySample:
    t: float
    x: float
    y: float
    heading: float


@dataclass(frozen=True)
class Trajectory:
    actor_id: str
    strategy: Strategy
    samples: tuple[TrajectorySample, ...]
    max_speed_ms: float


@dataclass(frozen=True)
class TrajectoryConfig:
    dt: float = 0.1
    horizon: float = 10.0
    maneuver_length: float = 30.0
    approach_standoff: float = 5.0


class TopologyError(RuntimeError):
    pass


def load_behavior_strategies() -> dict[str, dict]:
    text = resources.files("rulebench").joinpath("data/behavior_strategies.yaml").read_text(
        encoding="utf-8"
    )
    return yaml.safe_load(text)


def _times(config: TrajectoryConfig) -> list[float]:
    count = round(config.horizon / config.dt)
    return [round(i * config.dt, 9) for i in range(count + 1)]


def _lane_lateral(network: RoadNetwork, pose: ScenePose) -> tuple[float, float]:
    """(s, lateral) of the pose on its road's reference line."""
    line = network.polyline(pose.road_id)
    s = line.project(pose.x, pose.y)
    x, y = line.point_at(s)
    tx, ty = line.tangent_at(s)
    lateral = -(pose.x - x) * ty + (pose.y - y) * tx
    return s, lateral


def _profile_positions(
    network: RoadNetwork,
    pose: ScenePose,
    s_of_t: Sequence[float],
    lateral_of_t: Sequence[float],
) -> list[tuple[float, float, float]]:
    line = network.polyline(pose.road_id)
    points = []
    for s, lateral in zip(s_of_t, lateral_of_t):
        x, y = line.offset_point(s, lateral)
        points.append((x, y, line.heading_at(s)))
    return points


def _headings_from_motion(points: list[tuple[float, float, float]]) -> list[float]:
    headings: list[float] = []
    for i, (x, y, lane_heading) in enumerate(points):
        if i + 1 < len(points):
            nx, ny, _ = points[i + 1]
        elif i > 0:
            px, py, _ = points[i - 1]
            nx, ny, x, y = x, y, px, py
        else:
            headings.append(lane_heading)
            continue
        dx, dy = nx - x, ny - y
        if math.hypot(dx, dy) < 1e-6:
            headings.append(headings[-1] if headings else lane_heading)
        else:
            headings.append(math.atan2(dy, dx))
    return headings


def generate_trajectories(
    poses: Sequence[ScenePose],
    doc: SceneDoc,
    network: RoadNetwork,
    config: TrajectoryConfig = TrajectoryConfig(),
    behavior_table: Optional[Mapping[str, dict]] = None,
) -> list[Trajectory]:
    if config.dt <= 0 or config.horizon <= 0:
        raise ValueError("dt and horizon must be positive")
    if behavior_table is None:
        behavior_table = load_behavior_strategies()
    by_id = {pose.actor_id: pose for pose in poses}
    trajectories = []
    for actor in doc.actors:
        pose = by_id[actor.id]
        entry = behavior_table.get(actor.behavior)
        if entry is None:
            raise TopologyError(f"behavior {actor.behavior!r} has no strategy table entry")
        strategy = Strategy(entry["strategy"])
        trajectories.append(
            _generate_one(actor, pose, strategy, entry, doc, network, by_id, config)
        )
    return trajectories


def _generate_one(actor, pose, strategy, entry, doc, network, poses, config) -> Trajectory:
    times = _times(config)
    v0 = pose.speed_kmh / 3.6
    s0, lat0 = _lane_lateral(network, pose)
    road = network.road(pose.road_id)
    line = network.polyline(pose.road_id)

    if strategy == Strategy.CENTERLINE_FOLLOW:
        direction = float(entry.get("direction", 1))
        accel = float(entry.get("acceleration", 0.0))
        s_values, speeds = [], []
        for t in times:
            v = max(v0 + accel * t, 0.0)
            speeds.append(v)
            if accel == 0.0:
                s = s0 + direction * v0 * t
            else:
                # ramp integrates v(t) with the floor at zero
                t_stop = v0 / -accel if accel < 0 and v0 > 0 else None
                if t_stop is not None and t > t_stop:
                    s = s0 + direction * (v0 * t_stop + 0.5 * accel * t_stop * t_stop)
                else:
                    s = s0 + direction * (v0 * t + 0.5 * accel * t * t)
            s_values.append(min(max(s, 0.0), line.length))
        max_speed = max(speeds)
        lat_values = [lat0] * len(times)
        points = _profile_positions(network, pose, s_values, lat_values)
        if v0 == 0.0 and max_speed == 0.0:
            samples = [TrajectorySample(t, pose.x, pose.y, pose.heading) for t in times]
            return Trajectory(actor.id, strategy, tuple(samples), 0.0)

    elif strategy == Strategy.FOLLOWING:
        leader = poses.get(actor.position.reference)
        leader_v = leader.speed_kmh / 3.6 if leader is not None else v0
        v = min(v0, leader_v) if v0 > 0 else leader_v
        s_values = [min(s0 + v * t, line.length) for t in times]
        points = _profile_positions(network, pose, s_values, [lat0] * len(times))
        max_speed = v

    elif strategy == Strategy.LANE_CHANGE:
        direction = entry.get("direction", "left")
        target_lane = pose.lane_index + (1 if direction == "left" else -1)
        if not 0 <= target_lane < road.lane_count:
            raise TopologyError(
                f"{actor.id}: no {direction} lane from lane {pose.lane_index} on road {road.id!r}"
            )
        target_lat = road.lane_offset(target_lane)
        s_values, lat_values = [], []
        for t in times:
            s = min(s0 + v0 * t, line.length)
            u = min(max((s - s0) / config.maneuver_length, 0.0), 1.0)
            blend = 3 * u * u - 2 * u * u * u
            s_values.append(s)
            lat_values.append(lat0 + (target_lat - lat0) * blend)
        points = _profile_positions(network, pose, s_values, lat_values)
        max_speed = math.hypot(v0, abs(target_lat - lat0) * v0 / max(config.maneuver_length, 1e-6))

    elif strategy == Strategy.INTERACTIVE_APPROACH:
        target_s = _approach_target(actor, doc, network, poses, s0, v0, config)
        stop_s = max(target_s - config.approach_standoff, s0)
        distance = stop_s - s0
        if distance <= 0.0 or v0 <= 0.0:
            samples = [TrajectorySample(t, pose.x, pose.y, pose.heading) for t in times]
            return Trajectory(actor.id, strategy, tuple(samples), 0.0)
        decel = v0 * v0 / (2.0 * distance)
        t_stop = v0 / decel
        s_values = []
        for t in times:
            if t >= t_stop:
                s_values.append(stop_s)
            else:
                s_values.append(s0 + v0 * t - 0.5 * decel * t * t)
        points = _profile_positions(network, pose, s_values, [lat0] * len(times))
        max_speed = v0

    elif strategy == Strategy.PEDESTRIAN_NAV:
        walk_v = v0 if v0 > 0 else 1.4
        cross_dir = 1.0 if lat0 <= 0 else -1.0
        half_width = road.lane_count * road.lane_width / 2.0
        lat_values = []
        for t in times:
            lat = lat0 + cross_dir * walk_v * t
            limit = half_width + 1.0
            lat_values.append(min(max(lat, -limit), limit))
        points = _profile_positions(network, pose, [s0] * len(times), lat_values)
        max_speed = walk_v

    else:  # pragma: no cover - Strategy is a closed enum
        raise TopologyError(f"unhandled strategy {strategy}")

    headings = _headings_from_motion(points)
    samples = tuple(
        TrajectorySample(t, x, y, heading)
        for t, (x, y, _), heading in zip(times, points, headings)
    )
    return Trajectory(actor.id, strategy, samples, max_speed)


def _approach_target(actor, doc, network, poses, s0, v0, config) -> float:
    reference = actor.position.reference
    if reference in doc.landmarks:
        landmark = network.landmark(reference)
        return landmark.s
    scene_landmark = doc.road_network.road_type
    if network.has_landmark(scene_landmark):
        candidate = network.landmark(scene_landmark).s
        if candidate > s0:
            return candidate
    ref_pose = poses.get(reference)
    if ref_pose is not None:
        line = network.polyline(ref_pose.road_id)
        candidate = line.project(ref_pose.x, ref_pose.y)
        if candidate > s0:
            return candidate
    return s0 + v0 * config.horizon / 2.0


def check_trajectory(trajectory: Trajectory, dt: float, tolerance: float = 0.6) -> list[str]:
    """Invariant check: strict time monotonicity from 0, speed-consistent steps."""
    problems = []
    samples = trajectory.samples
    if not samples:
        return ["no samples"]
    if samples[0].t != 0.0:
        problems.append(f"first sample at t={samples[0].t}, expected 0")
    for i in range(1, len(samples)):
        step = samples[i].t - samples[i - 1].t
        if step <= 0:
            problems.append(f"non-increasing time at sample {i}")
        displacement = math.hypot(
            samples[i].x - samples[i - 1].x, samples[i].y - samples[i - 1].y
        )
        if displacement > trajectory.max_speed_ms * dt + tolerance:
            problems.append(
                f"sample {i} moved {displacement:.2f} m in {dt:g} s "
                f"(max speed {trajectory.max_speed_ms:.2f} m/s)"
            )
    return problems
