"""Actor-type to simulator-asset resolution."""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from typing import Mapping

import yaml

from ..scene.doc import SceneDoc


class AssetError(ValueError):
    pass


@dataclass(frozen=True)
class AssetSpec:
    actor_type: str
    asset: str
    category: str
    length: float
    width: float
    height: float
    default_speed: float
    vehicle_category: str = "car"
    attributes: tuple[tuple[str, str], ...] = ()


def load_asset_catalog() -> dict[str, AssetSpec]:
    text = resources.files("rulebench").joinpath("data/asset_catalog.yaml").read_text(encoding="utf-8")
    raw = yaml.safe_load(text)
    catalog: dict[str, AssetSpec] = {}
    for actor_type, entry in raw.items():
        attributes = tuple(sorted((str(k), str(v)) for k, v in (entry.get("attributes") or {}).items()))
        catalog[actor_type] = AssetSpec(
            actor_type=actor_type,
            asset=entry["asset"],
            category=entry["category"],
            length=float(entry["length"]),
            width=float(entry["width"]),
            height=float(entry["height"]),
            default_speed=float(entry["default_speed"]),
            vehicle_category=str(entry.get("vehicle_category", "car")),
            attributes=attributes,
        )
    return catalog


def resolve_assets(doc: SceneDoc, catalog: Mapping[str, AssetSpec]) -> dict[str, AssetSpec]:
    """Total actor-id to asset mapping; first catalog match, deterministic."""
    resolved: dict[str, AssetSpec] = {}
    for actor in doc.actors:
        if actor.type not in catalog:
            raise AssetError(f"asset catalog does not cover actor type {actor.type!r}")
        resolved[actor.id] = catalog[actor.type]
    return resolved
