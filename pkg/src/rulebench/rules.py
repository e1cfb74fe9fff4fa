"""Domain model for atomic traffic rules.

An atomic rule is a single "situation -> action" regulation: a natural-language
restatement ("When [condition], the driver may/must/must not [action]") plus
structured facets used by the combination and arbitration machinery:

* perceptual type  -- static (signs, markings, road geometry) or dynamic
                      (interactions with other agents),
* norm type        -- permissive / obligatory / forbidden,
* action type      -- one of the closed 24-member action space,
* priority class   -- one of the 9 arbitration classes, highest first,
* context tags     -- namespaced situational attributes (``road:tunnel``,
                      ``weather:fog``) driving the deterministic coexistence
                      fallback,
* speed range      -- closed km/h interval, present exactly for speed rules.

Rule files are YAML documents holding a list of records, one per rule; see
``parse_rule_file`` for the schema.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import Iterable, Mapping, Optional, Sequence

import yaml

DEFAULT_SPEED_CAP_KMH = 200.0


class Jurisdiction(str, Enum):
    USA = "usa"
    CHINA = "china"
    UK = "uk"
    JAPAN = "japan"
    AUSTRALIA = "australia"


class PerceptualType(str, Enum):
    STATIC = "static"
    DYNAMIC = "dynamic"


class NormType(str, Enum):
    PERMISSIVE = "permissive"
    OBLIGATORY = "obligatory"
    FORBIDDEN = "forbidden"


class ActionCategory(str, Enum):
    DRIVING_MANEUVER = "driving_maneuver"
    LIGHTING_SIGNALING = "lighting_signaling"
    PARKING_YIELDING = "parking_yielding"


class ActionType(str, Enum):
    # Driving maneuvers
    OVERTAKE = "overtake"
    LEFT_TURN = "left_turn"
    RIGHT_TURN = "right_turn"
    U_TURN = "u_turn"
    LANE_CHANGE = "lane_change"
    MERGE_MAIN_ROAD = "merge_main_road"
    ENTER_RAMP = "enter_ramp"
    ACCELERATION = "acceleration"
    DECELERATION = "deceleration"
    REVERSE = "reverse"
    EMERGENCY_LANE_USAGE = "emergency_lane_usage"
    # Lighting and signaling
    LEFT_TURN_SIGNAL = "left_turn_signal"
    RIGHT_TURN_SIGNAL = "right_turn_signal"
    LOW_BEAM = "low_beam"
    HIGH_BEAM = "high_beam"
    FLASHING_HEADLIGHTS = "flashing_headlights"
    DOUBLE_FLASHERS = "double_flashers"
    FOG_LIGHTS = "fog_lights"
    POSITION_LIGHTS = "position_lights"
    HONK_HORN = "honk_horn"
    # Parking and yielding
    TEMPORARY_PARKING = "temporary_parking"
    PULL_OVER = "pull_over"
    YIELD = "yield"
    # Numeric speed rules get a dedicated type so they route to the
    # interval-based pairing logic instead of the generic norm check.
    SPEED_LIMIT = "speed_limit"

    @property
    def category(self) -> ActionCategory:
        return _ACTION_CATEGORIES[self]


_ACTION_CATEGORIES: dict[ActionType, ActionCategory] = {
    ActionType.OVERTAKE: ActionCategory.DRIVING_MANEUVER,
    ActionType.LEFT_TURN: ActionCategory.DRIVING_MANEUVER,
    ActionType.RIGHT_TURN: ActionCategory.DRIVING_MANEUVER,
    ActionType.U_TURN: ActionCategory.DRIVING_MANEUVER,
    ActionType.LANE_CHANGE: ActionCategory.DRIVING_MANEUVER,
    ActionType.MERGE_MAIN_ROAD: ActionCategory.DRIVING_MANEUVER,
    ActionType.ENTER_RAMP: ActionCategory.DRIVING_MANEUVER,
    ActionType.ACCELERATION: ActionCategory.DRIVING_MANEUVER,
    ActionType.DECELERATION: ActionCategory.DRIVING_MANEUVER,
    ActionType.REVERSE: ActionCategory.DRIVING_MANEUVER,
    ActionType.EMERGENCY_LANE_USAGE: ActionCategory.DRIVING_MANEUVER,
    ActionType.SPEED_LIMIT: ActionCategory.DRIVING_MANEUVER,
    ActionType.LEFT_TURN_SIGNAL: ActionCategory.LIGHTING_SIGNALING,
    ActionType.RIGHT_TURN_SIGNAL: ActionCategory.LIGHTING_SIGNALING,
    ActionType.LOW_BEAM: ActionCategory.LIGHTING_SIGNALING,
    ActionType.HIGH_BEAM: ActionCategory.LIGHTING_SIGNALING,
    ActionType.FLASHING_HEADLIGHTS: ActionCategory.LIGHTING_SIGNALING,
    ActionType.DOUBLE_FLASHERS: ActionCategory.LIGHTING_SIGNALING,
    ActionType.FOG_LIGHTS: ActionCategory.LIGHTING_SIGNALING,
    ActionType.POSITION_LIGHTS: ActionCategory.LIGHTING_SIGNALING,
    ActionType.HONK_HORN: ActionCategory.LIGHTING_SIGNALING,
    ActionType.TEMPORARY_PARKING: ActionCategory.PARKING_YIELDING,
    ActionType.PULL_OVER: ActionCategory.PARKING_YIELDING,
    ActionType.YIELD: ActionCategory.PARKING_YIELDING,
}


class PriorityClass(IntEnum):
    """Arbitration classes, rank 1 (highest) through 9 (lowest).

    Smaller value wins a conflict: pedestrian safety outranks everything,
    emergency exceptions yield to everything.
    """

    PEDESTRIAN_SAFETY = 1
    EMERGENCY_VEHICLE_AVOIDANCE = 2
    ON_SITE_COMMAND = 3
    TRAFFIC_LIGHTS = 4
    TRAFFIC_SIGNS = 5
    ROAD_MARKINGS = 6
    INTERACTIVE_RIGHT_OF_WAY = 7
    DEFENSIVE_DRIVING = 8
    EMERGENCY_EXCEPTIONS = 9

    @property
    def token(self) -> str:
        return self.name.lower()

    @classmethod
    def from_token(cls, token: str) -> "PriorityClass":
        try:
            return cls[token.upper()]
        except KeyError:
            raise ValueError(f"unknown priority class {token!r}") from None

    def outranks(self, other: "PriorityClass") -> bool:
        return self.value < other.value


@dataclass(frozen=True)
class SpeedRange:
    """Closed speed interval [lower, upper] in km/h."""

    lower: float
    upper: float

    def intersect(self, other: "SpeedRange") -> Optional["SpeedRange"]:
        lo = max(self.lower, other.lower)
        hi = min(self.upper, other.upper)
        if lo > hi:
            return None
        return SpeedRange(lo, hi)

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper


def intersect_ranges(ranges: Sequence[SpeedRange]) -> Optional[SpeedRange]:
    """Joint intersection of closed intervals; None when empty."""
    if not ranges:
        raise ValueError("no ranges to intersect")
    lo = max(r.lower for r in ranges)
    hi = min(r.upper for r in ranges)
    if lo > hi:
        return None
    return SpeedRange(lo, hi)


@dataclass(frozen=True)
class AtomicRule:
    id: str
    content: str
    perceptual_type: PerceptualType
    norm_type: NormType
    action_type: ActionType
    priority_class: PriorityClass
    jurisdiction: Jurisdiction
    context_tags: frozenset[str] = field(default_factory=frozenset)
    speed_range: Optional[SpeedRange] = None


@dataclass(frozen=True)
class RuleViolation:
    field: str
    message: str


class RuleParseError(ValueError):
    """Raised for malformed rule files; carries the failing record index."""

    def __init__(self, message: str, record_index: Optional[int] = None):
        self.record_index = record_index
        if record_index is not None:
            message = f"record {record_index}: {message}"
        super().__init__(message)


def validate_rule(rule: AtomicRule) -> list[RuleViolation]:
    """Check a rule against the model invariants.

    Violations are data, not exceptions: an empty list means the rule is
    valid. Each violation names the offending field.
    """
    violations: list[RuleViolation] = []
    if not rule.id:
        violations.append(RuleViolation("id", "id must be non-empty"))
    if not rule.content:
        violations.append(RuleViolation("content", "content must be non-empty"))
    if not isinstance(rule.perceptual_type, PerceptualType):
        violations.append(RuleViolation("perceptual_type", "not a member of the perceptual-type enum"))
    if not isinstance(rule.norm_type, NormType):
        violations.append(RuleViolation("norm_type", "not a member of the norm-type enum"))
    if not isinstance(rule.action_type, ActionType):
        violations.append(RuleViolation("action_type", "not a member of the action space"))
    if not isinstance(rule.priority_class, PriorityClass):
        violations.append(RuleViolation("priority_class", "not a member of the priority-class enum"))
    if not isinstance(rule.jurisdiction, Jurisdiction):
        violations.append(RuleViolation("jurisdiction", "not a supported jurisdiction"))

    is_speed = rule.action_type == ActionType.SPEED_LIMIT if isinstance(rule.action_type, ActionType) else False
    if is_speed and rule.speed_range is None:
        violations.append(RuleViolation("speed_range", "speed_limit rules require a speed range"))
    if not is_speed and rule.speed_range is not None:
        violations.append(RuleViolation("speed_range", "speed range only allowed on speed_limit rules"))
    if rule.speed_range is not None:
        if rule.speed_range.lower < 0:
            violations.append(RuleViolation("speed_range", "lower bound must be >= 0"))
        if rule.speed_range.lower > rule.speed_range.upper:
            violations.append(
                RuleViolation(
                    "speed_range",
                    f"lower bound {rule.speed_range.lower:g} exceeds upper bound {rule.speed_range.upper:g}",
                )
            )
    return violations


_RECORD_FIELDS = {
    "id",
    "content",
    "perceptual_type",
    "norm_type",
    "action_type",
    "numeric_constraints",
    "priority_class",
    "context_tags",
}
_REQUIRED_FIELDS = _RECORD_FIELDS - {"numeric_constraints"}


def _parse_enum(enum_cls, raw, field_name: str, index: int):
    if not isinstance(raw, str):
        raise RuleParseError(f"{field_name} must be a string token", index)
    token = raw.strip().lower()
    if enum_cls is PriorityClass:
        try:
            return PriorityClass.from_token(token)
        except ValueError:
            raise RuleParseError(f"unknown {field_name} token {raw!r}", index) from None
    try:
        return enum_cls(token)
    except ValueError:
        raise RuleParseError(f"unknown {field_name} token {raw!r}", index) from None


def _parse_numeric_constraints(raw, index: int, speed_cap: float) -> SpeedRange:
    if raw is None or raw == "none":
        raise RuleParseError(
            "numeric_constraints must be omitted entirely when a rule has no speed bounds",
            index,
        )
    if not isinstance(raw, Mapping):
        raise RuleParseError("numeric_constraints must be a mapping with lower/upper", index)
    unknown = set(raw) - {"lower", "upper"}
    if unknown:
        raise RuleParseError(f"unknown numeric_constraints keys: {sorted(unknown)}", index)
    if not raw:
        raise RuleParseError("numeric_constraints must define lower and/or upper", index)
    try:
        lower = float(raw["lower"]) if "lower" in raw else 0.0
        upper = float(raw["upper"]) if "upper" in raw else float(speed_cap)
    except (TypeError, ValueError):
        raise RuleParseError("numeric_constraints bounds must be numbers", index) from None
    if lower < 0:
        raise RuleParseError("numeric_constraints lower bound must be >= 0", index)
    if lower > upper:
        raise RuleParseError(
            f"numeric_constraints interval is inverted ({lower:g} > {upper:g})", index
        )
    return SpeedRange(lower, upper)


def _parse_tags(raw, index: int) -> frozenset[str]:
    if raw is None:
        return frozenset()
    if not isinstance(raw, (list, tuple)):
        raise RuleParseError("context_tags must be a list of namespace:value strings", index)
    tags = []
    for tag in raw:
        if not isinstance(tag, str) or ":" not in tag:
            raise RuleParseError(f"context tag {tag!r} must look like namespace:value", index)
        tags.append(tag.strip())
    return frozenset(tags)


def parse_rule_file(
    data: str | bytes,
    jurisdiction: Jurisdiction,
    *,
    speed_cap: float = DEFAULT_SPEED_CAP_KMH,
) -> list[AtomicRule]:
    """Parse one jurisdiction's rule file into validated atomic rules.

    The file is a YAML list of records with exactly the fields ``id``,
    ``content``, ``perceptual_type``, ``norm_type``, ``action_type``,
    ``priority_class``, ``context_tags`` and, for speed rules only,
    ``numeric_constraints: {lower, upper}``. Unknown keys are rejected, as
    are duplicate ids and out-of-vocabulary enum tokens. Unbounded speed
    phrases are closed with ``speed_cap`` as the implicit upper bound.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        loaded = yaml.safe_load(data)
    except yaml.YAMLError as exc:
        raise RuleParseError(f"invalid YAML: {exc}") from exc
    if loaded is None:
        return []
    if not isinstance(loaded, list):
        raise RuleParseError("rule file must be a YAML list of records")
    return parse_rule_records(loaded, jurisdiction, speed_cap=speed_cap)


def parse_rule_records(
    loaded: Sequence,
    jurisdiction: Jurisdiction,
    *,
    speed_cap: float = DEFAULT_SPEED_CAP_KMH,
) -> list[AtomicRule]:
    rules: list[AtomicRule] = []
    seen_ids: set[str] = set()
    for index, record in enumerate(loaded):
        if not isinstance(record, Mapping):
            raise RuleParseError("record must be a key-value mapping", index)
        unknown = set(record) - _RECORD_FIELDS
        if unknown:
            raise RuleParseError(f"unknown keys: {sorted(unknown)}", index)
        missing = _REQUIRED_FIELDS - set(record)
        if missing:
            raise RuleParseError(f"missing required keys: {sorted(missing)}", index)

        rule_id = record["id"]
        if not isinstance(rule_id, str) or not rule_id.strip():
            raise RuleParseError("id must be a non-empty string", index)
        rule_id = rule_id.strip()
        if rule_id in seen_ids:
            raise RuleParseError(f"duplicate rule id {rule_id!r}", index)
        seen_ids.add(rule_id)

        content = record["content"]
        if not isinstance(content, str) or not content.strip():
            raise RuleParseError("content must be a non-empty string", index)

        perceptual = _parse_enum(PerceptualType, record["perceptual_type"], "perceptual_type", index)
        norm = _parse_enum(NormType, record["norm_type"], "norm_type", index)
        action = _parse_enum(ActionType, record["action_type"], "action_type", index)
        priority = _parse_enum(PriorityClass, record["priority_class"], "priority_class", index)
        tags = _parse_tags(record.get("context_tags"), index)

        speed_range: Optional[SpeedRange] = None
        if "numeric_constraints" in record:
            if action != ActionType.SPEED_LIMIT:
                raise RuleParseError(
                    f"numeric_constraints present on non-speed action {action.value!r}", index
                )
            speed_range = _parse_numeric_constraints(record["numeric_constraints"], index, speed_cap)
        elif action == ActionType.SPEED_LIMIT:
            raise RuleParseError("speed_limit rule is missing numeric_constraints", index)

        rules.append(
            AtomicRule(
                id=rule_id,
                content=content.strip(),
                perceptual_type=perceptual,
                norm_type=norm,
                action_type=action,
                priority_class=priority,
                jurisdiction=jurisdiction,
                context_tags=tags,
                speed_range=speed_range,
            )
        )
    return rules


def rule_to_record(rule: AtomicRule) -> dict:
    """Rule as a plain record dict in the stable file field order."""
    record: dict = {
        "id": rule.id,
        "content": rule.content,
        "perceptual_type": rule.perceptual_type.value,
        "norm_type": rule.norm_type.value,
        "action_type": rule.action_type.value,
    }
    if rule.speed_range is not None:
        record["numeric_constraints"] = {
            "lower": rule.speed_range.lower,
            "upper": rule.speed_range.upper,
        }
    record["priority_class"] = rule.priority_class.token
    record["context_tags"] = sorted(rule.context_tags)
    return record


def serialize_rule_file(rules: Iterable[AtomicRule]) -> str:
    records = [rule_to_record(rule) for rule in rules]
    return yaml.safe_dump(records, sort_keys=False, allow_unicode=True, default_flow_style=False)


def rules_by_id(rules: Iterable[AtomicRule]) -> dict[str, AtomicRule]:
    return {rule.id: rule for rule in rules}
