"""Scene-to-OpenSCENARIO compilation pipeline."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from ..scene.checks import self_check
from ..scene.doc import SceneDoc
from .assets import AssetError, AssetSpec, load_asset_catalog, resolve_assets
from .geometry import Polyline, rotate_into_frame
from .placement import (
    PlacementConfig,
    PlacementError,
    ScenePose,
    instantiate_static_scene,
    verify_relations,
)
from .roadnet import (
    BUILTIN_MAPS,
    Intersection,
    Landmark,
    MapError,
    Road,
    RoadNetwork,
    builtin_map,
    load_builtin_maps,
    load_map_file,
    load_road_network,
    network_for_scene,
)
from .trajectory import (
    Strategy,
    TopologyError,
    Trajectory,
    TrajectoryConfig,
    TrajectorySample,
    check_trajectory,
    generate_trajectories,
    load_behavior_strategies,
)
from .weather import WeatherParams, map_weather, weather_table_size
from .xosc import EmitError, emit_openscenario, validate_openscenario


class CompileError(RuntimeError):
    pass


@dataclass(frozen=True)
class CompilerConfig:
    placement: PlacementConfig = field(default_factory=PlacementConfig)
    trajectory: TrajectoryConfig = field(default_factory=TrajectoryConfig)
    seed: int = 0


@dataclass(frozen=True)
class CompiledScene:
    name: str
    network_id: str
    poses: tuple[ScenePose, ...]
    trajectories: tuple[Trajectory, ...]
    weather: WeatherParams
    xml: str


def compile_scene(
    doc: SceneDoc,
    network: RoadNetwork,
    *,
    name: str,
    config: CompilerConfig = CompilerConfig(),
    catalog: Optional[dict[str, AssetSpec]] = None,
) -> CompiledScene:
    """Full pipeline for one scene: place, map weather, synthesize motion, emit.

    The document must be semantically coherent (self-check findings abort
    the compile), and the emitted artifacts must survive both the
    structural validator and the independent relation verifier; any
    failure raises ``CompileError`` naming the violated constraint.
    """
    findings = self_check(doc)
    if findings:
        raise CompileError(
            f"{name}: scene fails the self-check: "
            + "; ".join(f.message for f in findings)
        )
    if catalog is None:
        catalog = load_asset_catalog()
    try:
        assets = resolve_assets(doc, catalog)
        poses = instantiate_static_scene(doc, network, assets, config.seed, config.placement)
        weather = map_weather(doc.environment.weather)
        trajectories = generate_trajectories(poses, doc, network, config.trajectory)
        xml = emit_openscenario(
            doc,
            poses,
            trajectories,
            weather,
            assets,
            scenario_name=name,
            map_name=network.id,
            horizon=config.trajectory.horizon,
        )
    except (AssetError, PlacementError, TopologyError, MapError, EmitError) as exc:
        raise CompileError(f"{name}: {exc}") from exc

    relation_violations = verify_relations(doc, poses, network, config.placement)
    if relation_violations:
        raise CompileError(f"{name}: relation verification failed: {relation_violations}")
    trajectory_problems = []
    for trajectory in trajectories:
        trajectory_problems += [
            f"{trajectory.actor_id}: {p}"
            for p in check_trajectory(trajectory, config.trajectory.dt)
        ]
    if trajectory_problems:
        raise CompileError(f"{name}: trajectory invariants failed: {trajectory_problems}")
    structural = validate_openscenario(xml, [actor.id for actor in doc.actors])
    if structural:
        raise CompileError(f"{name}: structural validation failed: {structural}")

    return CompiledScene(
        name=name,
        network_id=network.id,
        poses=tuple(poses),
        trajectories=tuple(trajectories),
        weather=weather,
        xml=xml,
    )


__all__ = [
    "AssetError",
    "AssetSpec",
    "BUILTIN_MAPS",
    "CompileError",
    "CompiledScene",
    "CompilerConfig",
    "EmitError",
    "Intersection",
    "Landmark",
    "MapError",
    "PlacementConfig",
    "PlacementError",
    "Polyline",
    "Road",
    "RoadNetwork",
    "ScenePose",
    "Strategy",
    "TopologyError",
    "Trajectory",
    "TrajectoryConfig",
    "TrajectorySample",
    "WeatherParams",
    "builtin_map",
    "check_trajectory",
    "compile_scene",
    "emit_openscenario",
    "generate_trajectories",
    "instantiate_static_scene",
    "load_asset_catalog",
    "load_behavior_strategies",
    "load_builtin_maps",
    "load_map_file",
    "load_road_network",
    "map_weather",
    "network_for_scene",
    "resolve_assets",
    "rotate_into_frame",
    "validate_openscenario",
    "verify_relations",
    "weather_table_size",
]
