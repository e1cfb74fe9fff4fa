"""Deterministic coherence and rule-coverage gates for scene documents.

The self-check finds semantic incoherence a syntactic parse cannot:
mutually contradictory spatial relations, speeds incompatible with the
declared behavior, and weather/sign combinations ruled out by the
coherence table. The alignment check reports, per rule, whether the scene
contains what the rule's context tags demand (per the requirement table).
Both tables are data files; editing them changes behavior without code.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from typing import Mapping, Optional, Sequence

import yaml

from ..crafter.combos import RuleCombo, _resolve
from ..rules import AtomicRule
from .doc import SceneDoc


@dataclass(frozen=True)
class Finding:
    code: str
    message: str
    actor_id: Optional[str] = None


def _load_data_yaml(name: str):
    text = resources.files("rulebench").joinpath(f"data/{name}").read_text(encoding="utf-8")
    return yaml.safe_load(text)


def load_coherence_rules() -> dict:
    return _load_data_yaml("coherence_rules.yaml")


def load_requirement_table() -> dict:
    return _load_data_yaml("scene_requirements.yaml")


_MUTUAL_CONTRADICTIONS = {"front", "behind", "left", "right"}


def self_check(doc: SceneDoc, coherence_rules: Optional[dict] = None) -> list[Finding]:
    """Semantic findings beyond syntax; an empty list means coherent."""
    if coherence_rules is None:
        coherence_rules = load_coherence_rules()
    findings: list[Finding] = []

    relations = {
        (actor.id, actor.position.reference): actor.position.relation for actor in doc.actors
    }
    reported: set[frozenset[str]] = set()
    for (a, b), relation in sorted(relations.items()):
        if relation not in _MUTUAL_CONTRADICTIONS:
            continue
        if relations.get((b, a)) == relation and frozenset((a, b)) not in reported:
            reported.add(frozenset((a, b)))
            findings.append(
                Finding(
                    code="mutual-relation-contradiction",
                    message=f"{a} is {relation} of {b} and {b} is {relation} of {a}",
                )
            )

    speed_caps = {
        entry["behavior"]: float(entry["max_speed"])
        for entry in coherence_rules.get("behavior_speed", [])
    }
    for actor in doc.actors:
        cap = speed_caps.get(actor.behavior)
        if cap is not None and actor.speed is not None and actor.speed > cap:
            findings.append(
                Finding(
                    code="behavior-speed-incompatible",
                    message=(
                        f"behavior {actor.behavior!r} caps speed at {cap:g} km/h "
                        f"but {actor.id} declares {actor.speed:g}"
                    ),
                    actor_id=actor.id,
                )
            )

    posted = set(doc.road_network.traffic_signs)
    for entry in coherence_rules.get("weather_sign", []):
        if doc.environment.weather == entry["weather"] and entry["sign"] in posted:
            findings.append(
                Finding(
                    code="weather-sign-incoherent",
                    message=f"weather {entry['weather']!r} is incoherent with posted {entry['sign']!r}",
                )
            )
    return findings


@dataclass(frozen=True)
class RuleCoverage:
    rule_id: str
    matched: bool
    missing: tuple[str, ...] = ()


@dataclass(frozen=True)
class CoverageReport:
    entries: tuple[RuleCoverage, ...]

    @property
    def unmatched_rule_ids(self) -> tuple[str, ...]:
        return tuple(entry.rule_id for entry in self.entries if not entry.matched)

    @property
    def all_matched(self) -> bool:
        return not self.unmatched_rule_ids


def _requirement_satisfied(doc: SceneDoc, requirement: Mapping) -> bool:
    for kind, values in requirement.items():
        wanted = set(values)
        if kind == "weather":
            ok = doc.environment.weather in wanted
        elif kind == "time":
            ok = doc.environment.time in wanted
        elif kind == "road_type":
            ok = doc.road_network.road_type in wanted
        elif kind == "road_marker":
            ok = doc.road_network.road_marker in wanted
        elif kind == "traffic_sign":
            ok = bool(wanted & set(doc.road_network.traffic_signs))
        elif kind == "actor_type":
            ok = any(actor.type in wanted for actor in doc.actors)
        elif kind == "behavior":
            ok = any(actor.behavior in wanted for actor in doc.actors)
        else:
            raise ValueError(f"unknown requirement kind {kind!r} in the requirement table")
        if not ok:
            return False
    return True


def align_check(
    doc: SceneDoc,
    combo: RuleCombo,
    rules: Mapping[str, AtomicRule] | Sequence[AtomicRule],
    requirement_table: Optional[dict] = None,
) -> CoverageReport:
    """Per-rule matched/unmatched verdicts for one scene.

    A rule matches when every one of its context tags that appears in the
    requirement table is satisfied by the scene; tags with no table entry
    impose nothing. Unmatched entries list the failing tags.
    """
    if requirement_table is None:
        requirement_table = load_requirement_table()
    members = _resolve(combo, rules)
    entries: list[RuleCoverage] = []
    for rule in members:
        missing: list[str] = []
        for tag in sorted(rule.context_tags):
            requirement = requirement_table.get(tag)
            if requirement is None:
                continue
            if not _requirement_satisfied(doc, requirement):
                missing.append(tag)
        entries.append(
            RuleCoverage(rule_id=rule.id, matched=not missing, missing=tuple(missing))
        )
    return CoverageReport(entries=tuple(entries))
