"""Offline deterministic question generator.

``ScriptedMcqGenerator`` is a chat endpoint that answers generation
prompts without a model: it reads the rule contents back out of the
prompt's input slots, re-derives the ground-truth directive with the same
arbitration rules the pipeline enforces, and emits a formulaic six-field
JSON question whose correct option states the directive and whose
distractors deviate from it. Output is a pure function of the prompt, so
pipeline runs replay byte-identically.

Rule contents must not contain ``}`` (the parser locates the user input
slots after the worked example's closing brace).
"""

from __future__ import annotations

import json
import re
import zlib
from dataclasses import dataclass
from typing import Sequence

from ..crafter.combos import RuleCombo, derive_labels
from ..endpoints import ChatRequest
from ..rules import ActionType, AtomicRule, NormType
from .arbitration import (
    ActionDirective,
    SamePriorityTie,
    _ACTION_PHRASES,
    determine_correct_action,
)
from .builder import (
    FIELD_CORRECT,
    FIELD_DESIGN_LOGIC,
    FIELD_EXPLANATION,
    FIELD_OPTIONS,
    FIELD_SCENARIO,
    FIELD_STEM,
    OPTION_KEYS,
)

_INPUT_RULE_RE = re.compile(r"^Input Rule(?: \d+)?: (?P<content>.+)$", re.MULTILINE)
_CONDITION_RE = re.compile(r"^When (?P<condition>.+?), the driver", re.IGNORECASE)

STANDARD_STEM = "As the driver, how should you respond correctly in this situation?"


def _condition_of(content: str) -> str:
    match = _CONDITION_RE.match(content.strip())
    if match:
        return match.group("condition")
    return content.strip().rstrip(".")


def _correct_option_text(directive: ActionDirective) -> str:
    action = directive.action_type
    if action == ActionType.SPEED_LIMIT and directive.speed_range is not None:
        lo, hi = directive.speed_range.lower, directive.speed_range.upper
        target = (lo + hi) / 2 if lo > 0 else hi
        return f"Adjust the speed and hold it at {target:g} km/h."
    phrase = _ACTION_PHRASES[action]
    if directive.norm_type == NormType.FORBIDDEN:
        return f"Do not {phrase}; hold the current position until the situation changes."
    if directive.norm_type == NormType.OBLIGATORY:
        return f"{phrase[0].upper()}{phrase[1:]} as the situation requires."
    return f"You may {phrase} once it is clearly safe to do so."


def _distractor_texts(directive: ActionDirective) -> list[str]:
    action = directive.action_type
    if action == ActionType.SPEED_LIMIT and directive.speed_range is not None:
        hi = directive.speed_range.upper
        lo = directive.speed_range.lower
        outside = hi + 40 if hi + 40 <= 400 else max(lo - 20, 0)
        return [
            f"Maintain {outside:g} km/h to keep up with the traffic flow.",
            "Ignore the posted figures and match the pace of the nearest vehicle.",
            "Brake to a complete halt on the carriageway and wait.",
        ]
    phrase = _ACTION_PHRASES[action]
    if directive.norm_type == NormType.FORBIDDEN:
        primary = f"{phrase[0].upper()}{phrase[1:]} promptly before conditions change."
    else:
        primary = f"Do not {phrase}; continue exactly as planned."
    return [
        primary,
        "Stop on the carriageway and wait for further instructions.",
        "Accelerate away to put distance between you and the situation.",
    ]


def _letters_for(rule_ids: Sequence[str]) -> tuple[str, list[str]]:
    digest = zlib.crc32("+".join(rule_ids).encode("utf-8"))
    correct = OPTION_KEYS[digest % 4]
    rest = [key for key in OPTION_KEYS if key != correct]
    return correct, rest


@dataclass
class ScriptedMcqGenerator:
    """Prompt-driven deterministic generator over a known rule corpus."""

    rules: Sequence[AtomicRule]

    def __post_init__(self) -> None:
        self._by_content = {rule.content: rule for rule in self.rules}

    def _resolve_rules(self, prompt: str) -> list[AtomicRule]:
        # User input slots follow the worked example's closing brace.
        tail_start = prompt.rfind("}")
        tail = prompt[tail_start + 1 :]
        contents = [m.group("content").strip() for m in _INPUT_RULE_RE.finditer(tail)]
        if not contents:
            raise ValueError("generation prompt carries no input rule slots")
        resolved = []
        for content in contents:
            if content not in self._by_content:
                raise ValueError(f"prompt mentions an unknown rule: {content!r}")
            resolved.append(self._by_content[content])
        return resolved

    def complete(self, request: ChatRequest) -> str:
        members = self._resolve_rules(request.prompt)
        ids = [rule.id for rule in members]
        if len(members) == 1:
            directive = determine_correct_action(RuleCombo(members=(ids[0],), level=1), members)
        else:
            combo = derive_labels(RuleCombo(members=tuple(ids)), members)
            try:
                directive = determine_correct_action(combo, members)
            except SamePriorityTie:
                # No defensible answer exists; emit something the schema
                # gate will reject instead of inventing one.
                return json.dumps({"error": "no arbitration winner"})

        conditions = "; ".join(_condition_of(rule.content) for rule in members)
        scenario = (
            "The ego vehicle is proceeding along its planned route. Sensor feeds register "
            f"the following cues: {conditions}."
        )
        correct_letter, rest = _letters_for(ids)
        options = {correct_letter: _correct_option_text(directive)}
        for letter, text in zip(rest, _distractor_texts(directive)):
            options[letter] = text
        ordered = {key: options[key] for key in OPTION_KEYS}

        payload = {
            FIELD_SCENARIO: scenario,
            FIELD_STEM: STANDARD_STEM,
            FIELD_OPTIONS: ordered,
            FIELD_DESIGN_LOGIC: (
                "The scenario embeds each trigger condition as a sensor cue. The compliant "
                f"choice follows the governing directive ({directive.phrase}); the distractors "
                "either invert it or substitute unrelated maneuvers."
            ),
            FIELD_CORRECT: correct_letter,
            FIELD_EXPLANATION: (
                f"The governing directive here is: {directive.phrase}. Option {correct_letter} "
                "is the only choice that satisfies it; the others violate or ignore it."
            ),
        }
        return json.dumps(payload, ensure_ascii=False)
