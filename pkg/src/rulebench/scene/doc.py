"""Structured scene semantics: environment, road network, actors, oracle.

A scene document captures the three blocks of structured semantics
(environment conditions, road network, actors with relational positions
and behaviors) plus the expected ego behavior. Field vocabularies are
closed by default but can be extended through ``SceneVocabulary`` without
code changes; unknown tokens stay parse errors.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

WEATHER_CONDITIONS = frozenset(
    {"sunny", "cloudy", "rain", "fog", "snow", "clear_night", "rain_night", "fog_night"}
)
TIMES_OF_DAY = frozenset({"daytime", "night", "dusk", "dawn"})
ROAD_TYPES = frozenset(
    {
        "intersection",
        "highway",
        "narrow_bridge",
        "ramp",
        "urban_road",
        "rural_road",
        "tunnel",
        "roundabout",
        "parking_lot",
        "school_zone",
        "residential_street",
        "mountain_road",
    }
)
ROAD_MARKERS = frozenset(
    {
        "solid_line",
        "dashed_line",
        "double_solid_line",
        "double_yellow_line",
        "solid_yellow_line",
        "zebra_crossing",
        "stop_line",
        "no_marking",
    }
)
TRAFFIC_SIGNS = frozenset(
    {
        "traffic_light",
        "stop_sign",
        "yield_sign",
        "speed_limit_sign",
        "minimum_speed_sign",
        "no_entry_sign",
        "no_overtaking_sign",
        "no_parking_sign",
        "no_u_turn_sign",
        "no_horn_sign",
        "merge_sign",
        "pedestrian_crossing_sign",
        "fog_warning_sign",
    }
)
ACTOR_TYPES = frozenset(
    {
        "car",
        "truck",
        "bus",
        "motorcycle",
        "bicycle",
        "pedestrian",
        "ambulance",
        "fire_truck",
        "police_car",
        "traffic_cone",
        "barrier",
    }
)
BEHAVIORS = frozenset(
    {
        "go_forward",
        "follow",
        "stop",
        "wait",
        "yield",
        "turn_left",
        "turn_right",
        "u_turn",
        "lane_change_left",
        "lane_change_right",
        "overtake",
        "merge",
        "reverse",
        "pull_over",
        "walk_cross",
        "accelerate",
        "decelerate",
    }
)
RELATIONS = frozenset({"front", "behind", "left", "right", "at"})
ORACLE_LONGITUDINAL = frozenset({"go_forward", "stop", "decelerate", "accelerate", "yield", "reverse"})
ORACLE_LATERAL = frozenset(
    {"keep_lane", "lane_change_left", "lane_change_right", "turn_left", "turn_right", "u_turn", "pull_over"}
)

EGO_ID = "ego"


@dataclass(frozen=True)
class SceneVocabulary:
    weather: frozenset[str] = WEATHER_CONDITIONS
    time: frozenset[str] = TIMES_OF_DAY
    road_type: frozenset[str] = ROAD_TYPES
    road_marker: frozenset[str] = ROAD_MARKERS
    traffic_sign: frozenset[str] = TRAFFIC_SIGNS
    actor_type: frozenset[str] = ACTOR_TYPES
    behavior: frozenset[str] = BEHAVIORS
    relation: frozenset[str] = RELATIONS
    oracle_longitudinal: frozenset[str] = ORACLE_LONGITUDINAL
    oracle_lateral: frozenset[str] = ORACLE_LATERAL

    def extended(self, **extra: set[str] | frozenset[str] | list[str]) -> "SceneVocabulary":
        """New vocabulary with extra tokens merged into the named fields."""
        updates = {}
        for name, tokens in extra.items():
            current = getattr(self, name)
            updates[name] = current | frozenset(tokens)
        return replace(self, **updates)


DEFAULT_VOCABULARY = SceneVocabulary()


@dataclass(frozen=True)
class Environment:
    weather: str
    time: str


@dataclass(frozen=True)
class RoadNetworkSpec:
    road_type: str
    road_marker: str
    traffic_signs: tuple[str, ...] = ()


@dataclass(frozen=True)
class Position:
    reference: str
    relation: str
    distance: Optional[float] = None


@dataclass(frozen=True)
class Actor:
    id: str
    type: str
    position: Position
    behavior: str
    speed: Optional[float] = None


@dataclass(frozen=True)
class OracleSpec:
    longitudinal: str
    lateral: str


@dataclass(frozen=True)
class SceneDoc:
    environment: Environment
    road_network: RoadNetworkSpec
    actors: tuple[Actor, ...]
    oracle: OracleSpec

    def actor(self, actor_id: str) -> Actor:
        for actor in self.actors:
            if actor.id == actor_id:
                return actor
        raise KeyError(actor_id)

    @property
    def ego(self) -> Actor:
        return self.actor(EGO_ID)

    @property
    def landmarks(self) -> frozenset[str]:
        """Road-network names a position may reference besides actor ids."""
        return frozenset({self.road_network.road_type})
