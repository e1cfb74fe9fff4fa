"""Synthetic road networks: authored map data files with lanes and landmarks.

A map is a YAML document declaring roads (centerline polyline, lane count,
lane width), intersections, and named landmarks. Lane 0 is the rightmost
lane in the travel direction; lateral offsets grow to the left. Scene
documents reference landmarks by name, so each shipped fixture map names a
landmark after every road type it can stand in for.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping, Optional

import yaml

from .geometry import Polyline

BUILTIN_MAPS = ("straight_road", "highway_3lane", "intersection_4way", "narrow_bridge", "ramp")


class MapError(ValueError):
    pass


@dataclass(frozen=True)
class Road:
    id: str
    lane_count: int
    lane_width: float
    centerline: tuple[tuple[float, float], ...]

    def polyline(self) -> Polyline:
        return Polyline(self.centerline)

    def lane_offset(self, lane_index: int) -> float:
        if not 0 <= lane_index < self.lane_count:
            raise MapError(f"lane {lane_index} outside 0..{self.lane_count - 1} on road {self.id!r}")
        return (lane_index - (self.lane_count - 1) / 2.0) * self.lane_width


@dataclass(frozen=True)
class Intersection:
    id: str
    road_ids: tuple[str, ...]


@dataclass(frozen=True)
class Landmark:
    name: str
    road_id: str
    s: float
    lane: int = 0


@dataclass(frozen=True)
class RoadNetwork:
    id: str
    roads: tuple[Road, ...]
    intersections: tuple[Intersection, ...] = ()
    landmarks: tuple[Landmark, ...] = ()
    _polylines: dict = field(default_factory=dict, compare=False, repr=False)

    def road(self, road_id: str) -> Road:
        for road in self.roads:
            if road.id == road_id:
                return road
        raise MapError(f"unknown road {road_id!r} in map {self.id!r}")

    def polyline(self, road_id: str) -> Polyline:
        if road_id not in self._polylines:
            self._polylines[road_id] = self.road(road_id).polyline()
        return self._polylines[road_id]

    def landmark(self, name: str) -> Landmark:
        for landmark in self.landmarks:
            if landmark.name == name:
                return landmark
        raise MapError(f"map {self.id!r} has no landmark {name!r}")

    def has_landmark(self, name: str) -> bool:
        return any(landmark.name == name for landmark in self.landmarks)


def _validate(network: RoadNetwork) -> RoadNetwork:
    road_ids = {road.id for road in network.roads}
    if len(road_ids) != len(network.roads):
        raise MapError(f"map {network.id!r} has duplicate road ids")
    for road in network.roads:
        if road.lane_count < 1:
            raise MapError(f"road {road.id!r} must have at least one lane")
        if road.lane_width <= 0:
            raise MapError(f"road {road.id!r} lane width must be positive")
        if road.polyline().self_intersects():
            raise MapError(f"road {road.id!r} centerline self-intersects")
    for intersection in network.intersections:
        missing = set(intersection.road_ids) - road_ids
        if missing:
            raise MapError(f"intersection {intersection.id!r} references unknown roads {sorted(missing)}")
    for landmark in network.landmarks:
        road = network.road(landmark.road_id)
        if not 0 <= landmark.lane < road.lane_count:
            raise MapError(f"landmark {landmark.name!r} lane outside road {road.id!r}")
        if not 0 <= landmark.s <= road.polyline().length:
            raise MapError(f"landmark {landmark.name!r} lies beyond road {road.id!r}")
    return network


def load_road_network(text: str | bytes) -> RoadNetwork:
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    raw = yaml.safe_load(text)
    if not isinstance(raw, Mapping) or "id" not in raw or "roads" not in raw:
        raise MapError("map file must be a mapping with id and roads")
    roads = tuple(
        Road(
            id=entry["id"],
            lane_count=int(entry["lane_count"]),
            lane_width=float(entry["lane_width"]),
            centerline=tuple((float(x), float(y)) for x, y in entry["centerline"]),
        )
        for entry in raw["roads"]
    )
    intersections = tuple(
        Intersection(id=entry["id"], road_ids=tuple(entry["roads"]))
        for entry in raw.get("intersections", []) or []
    )
    landmarks = tuple(
        Landmark(
            name=name,
            road_id=entry["road"],
            s=float(entry["s"]),
            lane=int(entry.get("lane", 0)),
        )
        for name, entry in (raw.get("landmarks", {}) or {}).items()
    )
    return _validate(
        RoadNetwork(id=raw["id"], roads=roads, intersections=intersections, landmarks=landmarks)
    )


def load_map_file(path: str | Path) -> RoadNetwork:
    return load_road_network(Path(path).read_text(encoding="utf-8"))


def builtin_map(name: str) -> RoadNetwork:
    if name not in BUILTIN_MAPS:
        raise MapError(f"unknown builtin map {name!r}; available: {BUILTIN_MAPS}")
    text = resources.files("rulebench").joinpath(f"data/maps/{name}.yaml").read_text(encoding="utf-8")
    return load_road_network(text)


def load_builtin_maps() -> list[RoadNetwork]:
    return [builtin_map(name) for name in BUILTIN_MAPS]


def network_for_scene(road_type: str, networks: list[RoadNetwork]) -> RoadNetwork:
    """The first network declaring a landmark named after the road type."""
    for network in networks:
        if network.has_landmark(road_type):
            return network
    raise MapError(f"no map provides a landmark for road type {road_type!r}")
