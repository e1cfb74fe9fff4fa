"""Parsing and canonical serialization of scene documents.

Input is indentation-based key-value text (YAML-compatible). The canonical
serialization is bit-exact: 2-space indentation, block order environment ->
road_network -> actors -> oracle, actors in declaration order, optional
fields omitted when absent. ``parse(serialize(parse(x)))`` equals
``parse(x)`` for every accepted document.
"""

from __future__ import annotations

from typing import Mapping, Optional

import yaml

from .doc import (
    DEFAULT_VOCABULARY,
    EGO_ID,
    Actor,
    Environment,
    OracleSpec,
    Position,
    RoadNetworkSpec,
    SceneDoc,
    SceneVocabulary,
)


class SceneParseError(ValueError):
    """Scene DSL rejection; message carries the offending path or position."""


def _fail(path: str, message: str) -> "SceneParseError":
    return SceneParseError(f"{path}: {message}")


def _require_mapping(node, path: str, allowed: tuple[str, ...], required: tuple[str, ...]) -> Mapping:
    if not isinstance(node, Mapping):
        raise _fail(path, "expected a key-value block")
    unknown = set(node) - set(allowed)
    if unknown:
        raise _fail(path, f"unknown keys: {sorted(unknown)}")
    missing = set(required) - set(node)
    if missing:
        raise _fail(path, f"missing keys: {sorted(missing)}")
    return node


def _token(node, path: str, vocabulary: frozenset[str]) -> str:
    if not isinstance(node, str):
        raise _fail(path, f"expected a token string, got {type(node).__name__}")
    token = node.strip()
    if token not in vocabulary:
        raise _fail(path, f"unknown token {token!r}")
    return token


def _number(node, path: str, *, minimum: float = 0.0) -> float:
    if isinstance(node, bool) or not isinstance(node, (int, float)):
        raise _fail(path, "expected a number")
    value = float(node)
    if value < minimum:
        raise _fail(path, f"must be >= {minimum:g}")
    return value


def parse_scene_doc(text: str | bytes, vocab: SceneVocabulary = DEFAULT_VOCABULARY) -> SceneDoc:
    """Parse and validate one scene document.

    Rejections: YAML syntax errors (with line/column), unknown keys or
    tokens, duplicate or missing ego, dangling position references, and
    reference cycles among actors.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        root = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise SceneParseError(f"syntax error{where}: {exc}") from exc

    root = _require_mapping(
        root,
        "document",
        allowed=("environment", "road_network", "actors", "oracle"),
        required=("environment", "road_network", "actors", "oracle"),
    )

    env_node = _require_mapping(
        root["environment"], "environment", allowed=("weather", "time"), required=("weather", "time")
    )
    environment = Environment(
        weather=_token(env_node["weather"], "environment.weather", vocab.weather),
        time=_token(env_node["time"], "environment.time", vocab.time),
    )

    road_node = _require_mapping(
        root["road_network"],
        "road_network",
        allowed=("road_type", "road_marker", "traffic_signs"),
        required=("road_type", "road_marker"),
    )
    signs_node = road_node.get("traffic_signs", [])
    if signs_node is None:
        signs_node = []
    if not isinstance(signs_node, list):
        raise _fail("road_network.traffic_signs", "expected a list")
    signs = tuple(
        _token(sign, f"road_network.traffic_signs[{i}]", vocab.traffic_sign)
        for i, sign in enumerate(signs_node)
    )
    road_network = RoadNetworkSpec(
        road_type=_token(road_node["road_type"], "road_network.road_type", vocab.road_type),
        road_marker=_token(road_node["road_marker"], "road_network.road_marker", vocab.road_marker),
        traffic_signs=signs,
    )

    actors_node = root["actors"]
    if not isinstance(actors_node, list) or not actors_node:
        raise _fail("actors", "expected a non-empty list of actors")
    actors: list[Actor] = []
    for i, actor_node in enumerate(actors_node):
        path = f"actors[{i}]"
        actor_map = _require_mapping(
            actor_node,
            path,
            allowed=("id", "type", "position", "behavior", "speed"),
            required=("id", "type", "position", "behavior"),
        )
        actor_id = actor_map["id"]
        if not isinstance(actor_id, str) or not actor_id.strip():
            raise _fail(f"{path}.id", "must be a non-empty string")
        position_map = _require_mapping(
            actor_map["position"],
            f"{path}.position",
            allowed=("reference", "relation", "distance"),
            required=("reference", "relation"),
        )
        reference = position_map["reference"]
        if not isinstance(reference, str) or not reference.strip():
            raise _fail(f"{path}.position.reference", "must be a non-empty string")
        distance: Optional[float] = None
        if "distance" in position_map and position_map["distance"] is not None:
            distance = _number(position_map["distance"], f"{path}.position.distance")
        speed: Optional[float] = None
        if "speed" in actor_map and actor_map["speed"] is not None:
            speed = _number(actor_map["speed"], f"{path}.speed")
        actors.append(
            Actor(
                id=actor_id.strip(),
                type=_token(actor_map["type"], f"{path}.type", vocab.actor_type),
                position=Position(
                    reference=reference.strip(),
                    relation=_token(position_map["relation"], f"{path}.position.relation", vocab.relation),
                    distance=distance,
                ),
                behavior=_token(actor_map["behavior"], f"{path}.behavior", vocab.behavior),
                speed=speed,
            )
        )

    oracle_node = _require_mapping(
        root["oracle"], "oracle", allowed=("longitudinal", "lateral"), required=("longitudinal", "lateral")
    )
    oracle = OracleSpec(
        longitudinal=_token(oracle_node["longitudinal"], "oracle.longitudinal", vocab.oracle_longitudinal),
        lateral=_token(oracle_node["lateral"], "oracle.lateral", vocab.oracle_lateral),
    )

    doc = SceneDoc(
        environment=environment, road_network=road_network, actors=tuple(actors), oracle=oracle
    )
    _check_actor_invariants(doc)
    return doc


def _check_actor_invariants(doc: SceneDoc) -> None:
    seen: set[str] = set()
    for actor in doc.actors:
        if actor.id in seen:
            raise SceneParseError(f"actors: duplicate actor id {actor.id!r}")
        seen.add(actor.id)
    ego_count = sum(1 for actor in doc.actors if actor.id == EGO_ID)
    if ego_count != 1:
        raise SceneParseError(f"actors: expected exactly one '{EGO_ID}' actor, found {ego_count}")

    landmarks = doc.landmarks
    edges: dict[str, str] = {}
    for actor in doc.actors:
        reference = actor.position.reference
        if reference in landmarks:
            continue
        if reference not in seen:
            raise SceneParseError(
                f"actors: {actor.id!r} references {reference!r}, which is neither an actor "
                f"nor a road-network landmark"
            )
        edges[actor.id] = reference

    # Each actor has at most one outgoing reference edge, so cycle
    # detection is pointer chasing with a visited set per start. A mutual
    # pair (A references B, B references A) is a statement about one
    # geometric relation and is left to the semantic self-check; chains of
    # three or more actors closing on themselves are unresolvable here.
    for start in edges:
        node = start
        chain = [start]
        while node in edges:
            node = edges[node]
            if node in chain:
                cycle_len = len(chain) - chain.index(node)
                if cycle_len == 1:
                    raise SceneParseError(f"actors: {node!r} references itself")
                if cycle_len >= 3:
                    raise SceneParseError(f"actors: reference cycle involving {node!r}")
                break
            chain.append(node)


def _scalar(value: float) -> str:
    return f"{value:g}"


def serialize_scene_doc(doc: SceneDoc) -> str:
    """Canonical bit-exact form of a scene document."""
    lines: list[str] = []
    lines.append("environment:")
    lines.append(f"  weather: {doc.environment.weather}")
    lines.append(f"  time: {doc.environment.time}")
    lines.append("road_network:")
    lines.append(f"  road_type: {doc.road_network.road_type}")
    lines.append(f"  road_marker: {doc.road_network.road_marker}")
    lines.append("  traffic_signs:")
    if doc.road_network.traffic_signs:
        for sign in doc.road_network.traffic_signs:
            lines.append(f"    - {sign}")
    else:
        lines[-1] = "  traffic_signs: []"
    lines.append("actors:")
    for actor in doc.actors:
        lines.append(f"  - id: {actor.id}")
        lines.append(f"    type: {actor.type}")
        lines.append("    position:")
        lines.append(f"      reference: {actor.position.reference}")
        lines.append(f"      relation: {actor.position.relation}")
        if actor.position.distance is not None:
            lines.append(f"      distance: {_scalar(actor.position.distance)}")
        lines.append(f"    behavior: {actor.behavior}")
        if actor.speed is not None:
            lines.append(f"    speed: {_scalar(actor.speed)}")
    lines.append("oracle:")
    lines.append(f"  longitudinal: {doc.oracle.longitudinal}")
    lines.append(f"  lateral: {doc.oracle.lateral}")
    return "\n".join(lines) + "\n"
