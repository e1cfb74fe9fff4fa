"""Shared builders for test rules and combos."""

from __future__ import annotations

from rulebench.rules import (
    ActionType,
    AtomicRule,
    Jurisdiction,
    NormType,
    PerceptualType,
    PriorityClass,
    SpeedRange,
)

_COUNTER = {"n": 0}


def make_rule(
    rule_id: str | None = None,
    *,
    action: ActionType = ActionType.OVERTAKE,
    perceptual: PerceptualType = PerceptualType.STATIC,
    norm: NormType = NormType.FORBIDDEN,
    priority: PriorityClass = PriorityClass.TRAFFIC_SIGNS,
    jurisdiction: Jurisdiction = Jurisdiction.CHINA,
    tags: tuple[str, ...] = (),
    speed: tuple[float, float] | None = None,
    content: str | None = None,
) -> AtomicRule:
    if rule_id is None:
        _COUNTER["n"] += 1
        rule_id = f"t-{_COUNTER['n']:03d}"
    if content is None:
        verb = {"permissive": "may", "obligatory": "must", "forbidden": "must not"}[norm.value]
        content = f"When the test condition holds, the driver {verb} {action.value.replace('_', ' ')}."
    return AtomicRule(
        id=rule_id,
        content=content,
        perceptual_type=perceptual,
        norm_type=norm,
        action_type=action,
        priority_class=priority,
        jurisdiction=jurisdiction,
        context_tags=frozenset(tags),
        speed_range=SpeedRange(*speed) if speed else None,
    )
