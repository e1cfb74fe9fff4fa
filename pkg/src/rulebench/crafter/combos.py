"""Candidate rule combinations and their derived labels.

Rules sharing one action type are combined into k-subsets (k = 2..5). A
combination gets three derived labels:

* perceptual combo -- double-static when every member is static,
  double-dynamic when every member is dynamic, hybrid otherwise;
* norm relation    -- for speed rules, conflict exactly when the joint
  intersection of the members' speed intervals is empty; for everything
  else, conflict exactly when some pair of members carries the
  obligatory/forbidden clash; harmony otherwise;
* level            -- 5 for any conflict, else 2/3/4 for
  double-static/double-dynamic/hybrid. Single rules are level 1.

Restricted to pairs, these reduce to the pairwise case table; the k > 2
generalisation keeps the same semantics (all-member agreement for the
perceptual label, any-pair clash or empty joint interval for conflict).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable, Mapping, Optional, Sequence

from ..rules import (
    ActionType,
    AtomicRule,
    NormType,
    PerceptualType,
    intersect_ranges,
)

MAX_COMBO_SIZE = 5


class PerceptualCombo(str, Enum):
    DOUBLE_STATIC = "double_static"
    DOUBLE_DYNAMIC = "double_dynamic"
    HYBRID = "hybrid"


class NormRelation(str, Enum):
    HARMONY = "norm_harmony"
    CONFLICT = "norm_conflict"


class Coexistence(str, Enum):
    UNCHECKED = "unchecked"
    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"


_LEVEL_BY_PERCEPTUAL = {
    PerceptualCombo.DOUBLE_STATIC: 2,
    PerceptualCombo.DOUBLE_DYNAMIC: 3,
    PerceptualCombo.HYBRID: 4,
}


@dataclass(frozen=True)
class RuleCombo:
    """A combination of 1..5 same-action rules with derived labels."""

    members: tuple[str, ...]
    perceptual_combo: Optional[PerceptualCombo] = None
    norm_relation: Optional[NormRelation] = None
    level: Optional[int] = None
    coexistence: Coexistence = Coexistence.UNCHECKED
    coexistence_note: str = ""

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def member_set(self) -> frozenset[str]:
        return frozenset(self.members)


class ComboError(ValueError):
    pass


def _resolve(combo: RuleCombo, rules: Mapping[str, AtomicRule] | Sequence[AtomicRule]) -> list[AtomicRule]:
    if not isinstance(rules, Mapping):
        rules = {rule.id: rule for rule in rules}
    members = []
    for rule_id in combo.members:
        if rule_id not in rules:
            raise ComboError(f"combo references unknown rule id {rule_id!r}")
        members.append(rules[rule_id])
    return members


def singleton_combo(rule: AtomicRule) -> RuleCombo:
    """Level-1 entry for one atomic rule (labels do not apply)."""
    return RuleCombo(members=(rule.id,), level=1, coexistence=Coexistence.FEASIBLE)


def generate_candidate_combos(rules: Sequence[AtomicRule], k: int) -> list[RuleCombo]:
    """All k-subsets of same-action rules, members ordered by id.

    Rules must share one jurisdiction; k is restricted to 2..5. Labels are
    left underived and coexistence unchecked.
    """
    if not 2 <= k <= MAX_COMBO_SIZE:
        raise ComboError(f"combo size k={k} outside the supported 2..{MAX_COMBO_SIZE}")
    jurisdictions = {rule.jurisdiction for rule in rules}
    if len(jurisdictions) > 1:
        raise ComboError(
            "rules span multiple jurisdictions: " + ", ".join(sorted(j.value for j in jurisdictions))
        )

    by_action: dict[ActionType, list[AtomicRule]] = {}
    for rule in rules:
        by_action.setdefault(rule.action_type, []).append(rule)

    combos: list[RuleCombo] = []
    for action in sorted(by_action, key=lambda a: a.value):
        group = sorted(by_action[action], key=lambda r: r.id)
        if len(group) < k:
            continue
        for subset in itertools.combinations(group, k):
            combos.append(RuleCombo(members=tuple(rule.id for rule in subset)))
    return combos


def derive_labels(
    combo: RuleCombo,
    rules: Mapping[str, AtomicRule] | Sequence[AtomicRule],
) -> RuleCombo:
    """Attach perceptual combo, norm relation, and level to a combination."""
    if combo.size < 2:
        raise ComboError("labels are derived for combinations of 2+ rules only")
    members = _resolve(combo, rules)

    actions = {rule.action_type for rule in members}
    if len(actions) > 1:
        raise ComboError(
            "combo members mix action types: " + ", ".join(sorted(a.value for a in actions))
        )
    action = members[0].action_type

    if all(r.perceptual_type == PerceptualType.STATIC for r in members):
        perceptual = PerceptualCombo.DOUBLE_STATIC
    elif all(r.perceptual_type == PerceptualType.DYNAMIC for r in members):
        perceptual = PerceptualCombo.DOUBLE_DYNAMIC
    else:
        perceptual = PerceptualCombo.HYBRID

    if action == ActionType.SPEED_LIMIT:
        ranges = []
        for rule in members:
            if rule.speed_range is None:
                raise ComboError(f"speed_limit rule {rule.id!r} is missing its speed range")
            ranges.append(rule.speed_range)
        relation = NormRelation.HARMONY if intersect_ranges(ranges) else NormRelation.CONFLICT
    else:
        norms = {rule.norm_type for rule in members}
        clash = NormType.OBLIGATORY in norms and NormType.FORBIDDEN in norms
        relation = NormRelation.CONFLICT if clash else NormRelation.HARMONY

    level = 5 if relation == NormRelation.CONFLICT else _LEVEL_BY_PERCEPTUAL[perceptual]
    return replace(combo, perceptual_combo=perceptual, norm_relation=relation, level=level)


def combo_action_type(
    combo: RuleCombo,
    rules: Mapping[str, AtomicRule] | Sequence[AtomicRule],
) -> ActionType:
    return _resolve(combo, rules)[0].action_type


def derive_all(
    combos: Iterable[RuleCombo],
    rules: Mapping[str, AtomicRule] | Sequence[AtomicRule],
) -> list[RuleCombo]:
    if not isinstance(rules, Mapping):
        rules = {rule.id: rule for rule in rules}
    return [derive_labels(combo, rules) for combo in combos]
