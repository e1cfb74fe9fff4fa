"""Assembly and file format of the five-level hierarchical rule set.

The hierarchy holds every atomic rule as a level-1 entry plus every
coexistence-feasible combination at levels 2-5. The export format is a
YAML document with stable key order so hierarchies diff cleanly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import yaml

from ..rules import (
    AtomicRule,
    Jurisdiction,
    parse_rule_records,
    rule_to_record,
    rules_by_id,
)
from .combos import Coexistence, NormRelation, PerceptualCombo, RuleCombo, singleton_combo


class HierarchyError(ValueError):
    pass


@dataclass(frozen=True)
class HierarchicalRuleSet:
    jurisdiction: Jurisdiction
    atomic: tuple[AtomicRule, ...]
    combos: tuple[RuleCombo, ...]

    def rules_by_id(self) -> dict[str, AtomicRule]:
        return rules_by_id(self.atomic)

    def by_level(self) -> dict[int, list[RuleCombo]]:
        """Entries per level; level 1 holds one singleton per atomic rule."""
        index: dict[int, list[RuleCombo]] = {1: [singleton_combo(rule) for rule in self.atomic]}
        for combo in self.combos:
            index.setdefault(combo.level, []).append(combo)
        return index

    def entries(self) -> list[RuleCombo]:
        out: list[RuleCombo] = []
        for level in sorted(self.by_level()):
            out.extend(self.by_level()[level])
        return out


def build_hierarchy(
    rules: Sequence[AtomicRule],
    combos: Sequence[RuleCombo],
) -> HierarchicalRuleSet:
    """Keep the feasible combinations and index them with the atomic rules.

    Combos must be labeled and coexistence-checked. Infeasible and
    unchecked combos are dropped; duplicate member-sets collapse to their
    first occurrence.
    """
    jurisdictions = {rule.jurisdiction for rule in rules}
    if len(jurisdictions) != 1:
        raise HierarchyError("hierarchy requires exactly one jurisdiction's rules")
    known = {rule.id for rule in rules}

    kept: list[RuleCombo] = []
    seen: set[frozenset[str]] = set()
    for combo in combos:
        unknown = set(combo.members) - known
        if unknown:
            raise HierarchyError(f"combo references unknown rule ids: {sorted(unknown)}")
        if combo.coexistence == Coexistence.UNCHECKED:
            raise HierarchyError(f"combo {combo.members} has unchecked coexistence")
        if combo.coexistence != Coexistence.FEASIBLE:
            continue
        if combo.level is None:
            raise HierarchyError(f"combo {combo.members} has no derived level")
        if combo.member_set in seen:
            continue
        seen.add(combo.member_set)
        kept.append(combo)

    kept.sort(key=lambda c: (c.level, c.members))
    return HierarchicalRuleSet(
        jurisdiction=next(iter(jurisdictions)),
        atomic=tuple(rules),
        combos=tuple(kept),
    )


def _combo_record(combo: RuleCombo) -> dict:
    return {
        "members": list(combo.members),
        "perceptual_combo": combo.perceptual_combo.value if combo.perceptual_combo else None,
        "norm_relation": combo.norm_relation.value if combo.norm_relation else None,
        "level": combo.level,
        "coexistence": combo.coexistence.value,
        "coexistence_note": combo.coexistence_note,
    }


def export_hierarchy(hierarchy: HierarchicalRuleSet) -> str:
    document = {
        "jurisdiction": hierarchy.jurisdiction.value,
        "atomic": [rule_to_record(rule) for rule in hierarchy.atomic],
        "combos": [_combo_record(combo) for combo in hierarchy.combos],
    }
    return yaml.safe_dump(document, sort_keys=False, allow_unicode=True, default_flow_style=False)


def load_hierarchy(text: str | bytes) -> HierarchicalRuleSet:
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    document = yaml.safe_load(text)
    if not isinstance(document, Mapping):
        raise HierarchyError("hierarchy file must be a YAML mapping")
    for key in ("jurisdiction", "atomic", "combos"):
        if key not in document:
            raise HierarchyError(f"hierarchy file is missing the {key!r} section")
    try:
        jurisdiction = Jurisdiction(document["jurisdiction"])
    except ValueError:
        raise HierarchyError(f"unknown jurisdiction {document['jurisdiction']!r}") from None

    rules = parse_rule_records(document["atomic"], jurisdiction)
    known = {rule.id for rule in rules}

    combos: list[RuleCombo] = []
    for record in document["combos"] or []:
        members = tuple(record["members"])
        unknown = set(members) - known
        if unknown:
            raise HierarchyError(f"combo references unknown rule ids: {sorted(unknown)}")
        combos.append(
            RuleCombo(
                members=members,
                perceptual_combo=(
                    PerceptualCombo(record["perceptual_combo"])
                    if record.get("perceptual_combo")
                    else None
                ),
                norm_relation=(
                    NormRelation(record["norm_relation"]) if record.get("norm_relation") else None
                ),
                level=record["level"],
                coexistence=Coexistence(record["coexistence"]),
                coexistence_note=record.get("coexistence_note", ""),
            )
        )
    return HierarchicalRuleSet(jurisdiction=jurisdiction, atomic=tuple(rules), combos=tuple(combos))
