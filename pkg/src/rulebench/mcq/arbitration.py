"""Ground-truth action determination for every hierarchy level.

Level 1 takes the rule's own directive. Harmonious combinations (levels
2-4) conjoin their members: any forbidden member forbids the action, any
obligatory member (absent a forbidden one) mandates it, and speed rules
intersect their intervals. Conflicting combinations (level 5) are decided
by the nine-class priority order: the member whose class strictly outranks
every other member's class wins outright; when the top class is shared by
two or more members no arbitration exists and ``SamePriorityTie`` is
raised rather than inventing a tiebreak.

``directive_consistent`` is the deterministic cross-check applied to a
generator's claimed correct option: the option text must agree with the
directive via action surface forms (affirmed means the form appears with
no negation cue in the preceding few words), and for speed directives it
must state a km/h figure inside the directive interval.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from ..crafter.combos import NormRelation, RuleCombo, _resolve
from ..rules import ActionType, AtomicRule, NormType, SpeedRange, intersect_ranges


class SamePriorityTie(RuntimeError):
    """Conflicting rules share the top priority class; no strict winner."""

    def __init__(self, rule_ids: Sequence[str], priority_token: str):
        self.rule_ids = tuple(rule_ids)
        self.priority_token = priority_token
        super().__init__(
            f"rules {', '.join(rule_ids)} conflict within the same priority class "
            f"{priority_token!r}; arbitration is undefined"
        )


class ArbitrationError(ValueError):
    pass


@dataclass(frozen=True)
class ActionDirective:
    action_type: ActionType
    norm_type: NormType
    source_rule_ids: tuple[str, ...]
    speed_range: Optional[SpeedRange] = None

    @property
    def phrase(self) -> str:
        return describe_directive(self)


_NORM_VERBS = {
    NormType.PERMISSIVE: "may",
    NormType.OBLIGATORY: "must",
    NormType.FORBIDDEN: "must not",
}

_ACTION_PHRASES = {
    ActionType.OVERTAKE: "overtake",
    ActionType.LEFT_TURN: "turn left",
    ActionType.RIGHT_TURN: "turn right",
    ActionType.U_TURN: "make a U-turn",
    ActionType.LANE_CHANGE: "change lanes",
    ActionType.MERGE_MAIN_ROAD: "merge onto the main road",
    ActionType.ENTER_RAMP: "enter the ramp",
    ActionType.ACCELERATION: "accelerate",
    ActionType.DECELERATION: "decelerate",
    ActionType.REVERSE: "reverse",
    ActionType.EMERGENCY_LANE_USAGE: "use the emergency lane",
    ActionType.LEFT_TURN_SIGNAL: "use the left turn signal",
    ActionType.RIGHT_TURN_SIGNAL: "use the right turn signal",
    ActionType.LOW_BEAM: "use the low beam",
    ActionType.HIGH_BEAM: "use the high beam",
    ActionType.FLASHING_HEADLIGHTS: "flash the headlights",
    ActionType.DOUBLE_FLASHERS: "switch on the hazard flashers",
    ActionType.FOG_LIGHTS: "use the fog lights",
    ActionType.POSITION_LIGHTS: "use the position lights",
    ActionType.HONK_HORN: "honk the horn",
    ActionType.TEMPORARY_PARKING: "park temporarily",
    ActionType.PULL_OVER: "pull over",
    ActionType.YIELD: "yield",
    ActionType.SPEED_LIMIT: "comply with the speed bounds",
}


def describe_directive(directive: ActionDirective) -> str:
    if directive.action_type == ActionType.SPEED_LIMIT and directive.speed_range is not None:
        lo, hi = directive.speed_range.lower, directive.speed_range.upper
        if lo <= 0:
            return f"must keep speed at or below {hi:g} km/h"
        return f"must keep speed between {lo:g} and {hi:g} km/h"
    verb = _NORM_VERBS[directive.norm_type]
    return f"{verb} {_ACTION_PHRASES[directive.action_type]}"


def _single_rule_directive(rule: AtomicRule) -> ActionDirective:
    return ActionDirective(
        action_type=rule.action_type,
        norm_type=rule.norm_type,
        source_rule_ids=(rule.id,),
        speed_range=rule.speed_range,
    )


def _conjoin(members: Sequence[AtomicRule]) -> ActionDirective:
    action = members[0].action_type
    ids = tuple(rule.id for rule in members)
    if action == ActionType.SPEED_LIMIT:
        joint = intersect_ranges([r.speed_range for r in members])
        if joint is None:
            raise ArbitrationError("harmonious speed combo has an empty joint interval")
        return ActionDirective(action, NormType.OBLIGATORY, ids, speed_range=joint)
    norms = {rule.norm_type for rule in members}
    if NormType.FORBIDDEN in norms:
        norm = NormType.FORBIDDEN
    elif NormType.OBLIGATORY in norms:
        norm = NormType.OBLIGATORY
    else:
        norm = NormType.PERMISSIVE
    return ActionDirective(action, norm, ids)


def _arbitrate(members: Sequence[AtomicRule]) -> ActionDirective:
    best = min(rule.priority_class.value for rule in members)
    top = [rule for rule in members if rule.priority_class.value == best]
    if len(top) > 1:
        raise SamePriorityTie([r.id for r in top], top[0].priority_class.token)
    return _single_rule_directive(top[0])


def determine_correct_action(
    combo: RuleCombo,
    rules: Mapping[str, AtomicRule] | Sequence[AtomicRule],
) -> ActionDirective:
    members = _resolve(combo, rules)
    if len(members) == 1:
        return _single_rule_directive(members[0])
    if combo.norm_relation is None:
        raise ArbitrationError("combo labels must be derived before arbitration")
    if combo.norm_relation == NormRelation.CONFLICT:
        return _arbitrate(members)
    return _conjoin(members)


_ACTION_SURFACE_FORMS: dict[ActionType, tuple[str, ...]] = {
    ActionType.OVERTAKE: ("overtak", "pass the vehicle ahead"),
    ActionType.LEFT_TURN: ("turn left", "left turn"),
    ActionType.RIGHT_TURN: ("turn right", "right turn"),
    ActionType.U_TURN: ("u-turn", "u turn"),
    ActionType.LANE_CHANGE: ("change lane", "lane change", "changing lane", "change to the"),
    ActionType.MERGE_MAIN_ROAD: ("merge",),
    ActionType.ENTER_RAMP: ("enter the ramp", "take the ramp"),
    ActionType.ACCELERATION: ("accelerat", "speed up"),
    ActionType.DECELERATION: ("decelerat", "slow down", "reduce speed"),
    ActionType.REVERSE: ("revers", "back up"),
    ActionType.EMERGENCY_LANE_USAGE: ("emergency lane", "hard shoulder"),
    ActionType.LEFT_TURN_SIGNAL: ("left turn signal", "left indicator"),
    ActionType.RIGHT_TURN_SIGNAL: ("right turn signal", "right indicator"),
    ActionType.LOW_BEAM: ("low beam", "low-beam", "dipped"),
    ActionType.HIGH_BEAM: ("high beam", "high-beam"),
    ActionType.FLASHING_HEADLIGHTS: ("flash", "headlight flash"),
    ActionType.DOUBLE_FLASHERS: ("hazard", "double flasher"),
    ActionType.FOG_LIGHTS: ("fog light",),
    ActionType.POSITION_LIGHTS: ("position light", "parking light"),
    ActionType.HONK_HORN: ("honk", "sound the horn", "horn"),
    ActionType.TEMPORARY_PARKING: ("park",),
    ActionType.PULL_OVER: ("pull over", "pull to the side"),
    ActionType.YIELD: ("yield", "give way", "make way"),
    ActionType.SPEED_LIMIT: (),
}

_NEGATION_RE = re.compile(
    r"\b(not|no|never|avoid|refrain(?:\sfrom)?|without|don't|do not|won't|prohibited|forbidden)\b"
)
_NEGATION_WINDOW = 24

_SPEED_RE = re.compile(r"(\d+(?:\.\d+)?)\s*km\s*/?\s*h", re.IGNORECASE)


def _affirmation(text: str, forms: Sequence[str]) -> Optional[bool]:
    """True if some surface form appears un-negated, False if only negated,
    None when the action is not mentioned at all."""
    lowered = text.lower()
    mentioned = False
    for form in forms:
        start = 0
        while True:
            at = lowered.find(form, start)
            if at < 0:
                break
            mentioned = True
            window = lowered[max(0, at - _NEGATION_WINDOW) : at]
            if not _NEGATION_RE.search(window):
                return True
            start = at + 1
    return False if mentioned else None


def directive_consistent(directive: ActionDirective, option_text: str) -> bool:
    """Whether an option's text can stand as the directive's correct answer."""
    if directive.action_type == ActionType.SPEED_LIMIT:
        if directive.speed_range is None:
            raise ArbitrationError("speed directive is missing its interval")
        speeds = [float(m.group(1)) for m in _SPEED_RE.finditer(option_text)]
        return any(directive.speed_range.contains(v) for v in speeds)
    affirmed = _affirmation(option_text, _ACTION_SURFACE_FORMS[directive.action_type])
    if directive.norm_type == NormType.FORBIDDEN:
        return affirmed is not True
    return affirmed is True
