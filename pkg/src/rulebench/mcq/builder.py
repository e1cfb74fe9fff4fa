"""MCQ assembly and the gates a question must pass before shipping.

A question is assembled from a generator's JSON output, which must carry
exactly the six fields of the output schema. After structural parsing the
claimed correct option is cross-checked against the deterministic
arbitration directive; three judges must then unanimously accept it.
Quality scores from three scorers flag artifacts whose mean falls below
0.6 for human review, and 5% of accepted questions are sampled for human
verification.
"""

from __future__ import annotations

import json
import math
import random
import re
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional, Sequence

from .. import prompts
from ..endpoints import ChatEndpoint, ChatRequest, EndpointError, first_binary_token, parse_score
from ..rules import Jurisdiction
from .arbitration import ActionDirective, directive_consistent

OPTION_KEYS = ("A", "B", "C", "D")
QUALITY_FLAG_THRESHOLD = 0.6
HUMAN_REVIEW_RATE = 0.05

FIELD_SCENARIO = "Scenario Description"
FIELD_STEM = "Question Stem"
FIELD_OPTIONS = "Options"
FIELD_DESIGN_LOGIC = "Question Design Logic"
FIELD_CORRECT = "Correct Answer Option"
FIELD_EXPLANATION = "Explanation of the Correct Answer"
OUTPUT_FIELDS = (
    FIELD_SCENARIO,
    FIELD_STEM,
    FIELD_OPTIONS,
    FIELD_DESIGN_LOGIC,
    FIELD_CORRECT,
    FIELD_EXPLANATION,
)


class PipelineStage(str, Enum):
    SEMANTIC_STRUCTURING = "semantic_structuring"
    COEXISTENCE = "coexistence"
    TRANSCRIPTION = "transcription"
    DSL_TRANSLATION = "dsl_translation"


@dataclass(frozen=True)
class Mcq:
    id: str
    level: int
    jurisdiction: Jurisdiction
    rule_ids: tuple[str, ...]
    scenario_description: str
    question_stem: str
    options: dict[str, str]
    design_logic: str
    correct_option: str
    explanation: str
    frame_refs: tuple[str, ...] = ()
    scene_text_ref: str = ""

    @property
    def num_rules(self) -> int:
        return len(self.rule_ids)


def validate_mcq(mcq: Mcq) -> list[str]:
    problems = []
    if tuple(sorted(mcq.options)) != tuple(sorted(OPTION_KEYS)):
        problems.append(f"options must be exactly {OPTION_KEYS}, got {sorted(mcq.options)}")
    if mcq.correct_option not in mcq.options:
        problems.append(f"correct option {mcq.correct_option!r} is not an option key")
    if not 1 <= mcq.level <= 5:
        problems.append(f"level {mcq.level} outside 1..5")
    if not 1 <= mcq.num_rules <= 5:
        problems.append(f"num_rules {mcq.num_rules} outside 1..5")
    if not mcq.question_stem.strip():
        problems.append("question stem is empty")
    if not mcq.scenario_description.strip():
        problems.append("scenario description is empty")
    if mcq.frame_refs and len(mcq.frame_refs) != 4:
        problems.append(f"frame_refs must hold 4 frames, got {len(mcq.frame_refs)}")
    return problems


class McqFormatError(ValueError):
    """Generator output does not satisfy the six-field output schema."""


class McqRejectedError(RuntimeError):
    """Question could not be assembled within the retry budget."""

    def __init__(self, reasons: Sequence[str]):
        self.reasons = tuple(reasons)
        super().__init__("; ".join(reasons) or "rejected")


_FENCE_RE = re.compile(r"^\s*```(?:json)?\s*|\s*```\s*$")


def parse_generator_output(text: str) -> dict:
    """Strict parse of the six-field JSON a generator must emit."""
    cleaned = _FENCE_RE.sub("", text.strip())
    try:
        payload = json.loads(cleaned)
    except json.JSONDecodeError as exc:
        raise McqFormatError(f"output is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise McqFormatError("output JSON must be an object")
    missing = [name for name in OUTPUT_FIELDS if name not in payload]
    if missing:
        raise McqFormatError(f"output JSON is missing fields: {missing}")
    extra = [name for name in payload if name not in OUTPUT_FIELDS]
    if extra:
        raise McqFormatError(f"output JSON has unexpected fields: {extra}")
    options = payload[FIELD_OPTIONS]
    if not isinstance(options, dict) or sorted(options) != sorted(OPTION_KEYS):
        raise McqFormatError("Options must map exactly the keys A, B, C, D")
    for key in OPTION_KEYS:
        if not isinstance(options[key], str) or not options[key].strip():
            raise McqFormatError(f"option {key} must be non-empty text")
    for name in (FIELD_SCENARIO, FIELD_STEM, FIELD_DESIGN_LOGIC, FIELD_CORRECT, FIELD_EXPLANATION):
        if not isinstance(payload[name], str) or not payload[name].strip():
            raise McqFormatError(f"field {name!r} must be non-empty text")
    correct = payload[FIELD_CORRECT].strip().strip('"')
    if correct not in OPTION_KEYS:
        raise McqFormatError(f"correct answer option {payload[FIELD_CORRECT]!r} is not one of A-D")
    return payload


@dataclass(frozen=True)
class McqProvenance:
    mcq_id: str
    level: int
    jurisdiction: Jurisdiction
    rule_ids: tuple[str, ...]
    frame_refs: tuple[str, ...] = ()
    scene_text_ref: str = ""


def assemble_mcq(
    prompt: str,
    generator: ChatEndpoint,
    *,
    directive: ActionDirective,
    provenance: McqProvenance,
    retry_budget: int = 3,
) -> Mcq:
    """Generate, parse, and cross-check one question.

    Schema violations and arbitration mismatches consume attempts from the
    retry budget; exhaustion raises ``McqRejectedError`` with every reason
    collected, for the audit trail. Transport failures propagate.
    """
    reasons: list[str] = []
    for attempt in range(1, retry_budget + 1):
        raw = generator.complete(
            ChatRequest(prompt=prompt, request_id=f"generate:{provenance.mcq_id}:{attempt}")
        )
        try:
            payload = parse_generator_output(raw)
        except McqFormatError as exc:
            reasons.append(f"attempt {attempt}: {exc}")
            continue
        correct = payload[FIELD_CORRECT].strip().strip('"')
        if not directive_consistent(directive, payload[FIELD_OPTIONS][correct]):
            reasons.append(
                f"attempt {attempt}: claimed correct option {correct} contradicts the "
                f"arbitration directive ({directive.phrase})"
            )
            continue
        mcq = Mcq(
            id=provenance.mcq_id,
            level=provenance.level,
            jurisdiction=provenance.jurisdiction,
            rule_ids=provenance.rule_ids,
            scenario_description=payload[FIELD_SCENARIO].strip(),
            question_stem=payload[FIELD_STEM].strip(),
            options={key: payload[FIELD_OPTIONS][key].strip() for key in OPTION_KEYS},
            design_logic=payload[FIELD_DESIGN_LOGIC].strip(),
            correct_option=correct,
            explanation=payload[FIELD_EXPLANATION].strip(),
            frame_refs=provenance.frame_refs,
            scene_text_ref=provenance.scene_text_ref,
        )
        problems = validate_mcq(mcq)
        if problems:
            reasons.append(f"attempt {attempt}: " + "; ".join(problems))
            continue
        return mcq
    raise McqRejectedError(reasons)


@dataclass(frozen=True)
class ValidationVerdict:
    decisions: tuple[int, int, int]
    reasonings: tuple[str, str, str]

    @property
    def accepted(self) -> bool:
        return all(d == 1 for d in self.decisions)


def consensus_validate(
    mcq: Mcq,
    validators: Sequence[ChatEndpoint],
    *,
    transport_retries: int = 2,
) -> ValidationVerdict:
    """Run the three-judge unanimity gate on a structurally valid question.

    An unparseable judge reply counts as a 0 decision for that judge;
    transport failures are retried and then propagate.
    """
    if len(validators) != 3:
        raise ValueError(f"consensus validation takes exactly 3 judges, got {len(validators)}")
    question_json = json.dumps(mcq_output_fields(mcq), indent=2, ensure_ascii=False)
    prompt = prompts.render_check_prompt(question_json)

    decisions: list[int] = []
    reasonings: list[str] = []
    for judge_index, judge in enumerate(validators):
        reply: Optional[str] = None
        failure: Optional[EndpointError] = None
        for attempt in range(transport_retries + 1):
            try:
                reply = judge.complete(
                    ChatRequest(prompt=prompt, request_id=f"check:{mcq.id}:judge{judge_index}:{attempt}")
                )
                break
            except EndpointError as exc:
                failure = exc
        if reply is None:
            raise failure if failure is not None else EndpointError("judge returned nothing")
        verdict = first_binary_token(reply)
        decisions.append(verdict if verdict is not None else 0)
        reasonings.append(reply.strip())
    return ValidationVerdict(decisions=tuple(decisions), reasonings=tuple(reasonings))


@dataclass(frozen=True)
class QualityScore:
    stage: PipelineStage
    scores: tuple[float, float, float]
    mean: float
    flagged: bool


def quality_score(
    stage: PipelineStage | str,
    artifact_text: str,
    scorers: Sequence[ChatEndpoint],
    *,
    stage_prompt: str = "",
    retry_budget: int = 2,
) -> QualityScore:
    """Three-scorer quality gate for one pipeline stage artifact.

    Each scorer must emit a number in [0, 1]; out-of-range or missing
    scores are retried and, past the budget, raise. The artifact is
    flagged when the arithmetic mean is strictly below the threshold.
    """
    stage = PipelineStage(stage)
    if len(scorers) != 3:
        raise ValueError(f"quality scoring takes exactly 3 scorers, got {len(scorers)}")
    prompt = prompts.render_quality_prompt(stage.value, stage_prompt, artifact_text)

    scores: list[float] = []
    for scorer_index, scorer in enumerate(scorers):
        value: Optional[float] = None
        for attempt in range(retry_budget + 1):
            reply = scorer.complete(
                ChatRequest(prompt=prompt, request_id=f"score:{stage.value}:{scorer_index}:{attempt}")
            )
            candidate = parse_score(reply)
            if candidate is not None and 0.0 <= candidate <= 1.0:
                value = candidate
                break
        if value is None:
            raise EndpointError(
                f"scorer {scorer_index} never produced a score in [0, 1] for stage {stage.value}"
            )
        scores.append(value)
    mean = sum(scores) / 3.0
    return QualityScore(
        stage=stage, scores=tuple(scores), mean=mean, flagged=mean < QUALITY_FLAG_THRESHOLD
    )


def sample_for_human_review(accepted: Sequence[Mcq], seed: int) -> list[Mcq]:
    """Seeded 5% sample (ceiling) of accepted questions, without replacement."""
    if not accepted:
        raise ValueError("no accepted questions to sample from")
    ordered = sorted(accepted, key=lambda m: m.id)
    count = math.ceil(HUMAN_REVIEW_RATE * len(ordered))
    chosen = random.Random(seed).sample(ordered, count)
    return sorted(chosen, key=lambda m: m.id)


def mcq_output_fields(mcq: Mcq) -> dict:
    """The six schema fields exactly as a generator emits them."""
    return {
        FIELD_SCENARIO: mcq.scenario_description,
        FIELD_STEM: mcq.question_stem,
        FIELD_OPTIONS: dict(mcq.options),
        FIELD_DESIGN_LOGIC: mcq.design_logic,
        FIELD_CORRECT: mcq.correct_option,
        FIELD_EXPLANATION: mcq.explanation,
    }


def mcq_to_record(mcq: Mcq) -> dict:
    record = {"id": mcq.id}
    record.update(mcq_output_fields(mcq))
    record.update(
        {
            "level": mcq.level,
            "jurisdiction": mcq.jurisdiction.value,
            "rule_ids": list(mcq.rule_ids),
            "num_rules": mcq.num_rules,
            "frame_refs": list(mcq.frame_refs),
            "scene_text_ref": mcq.scene_text_ref,
        }
    )
    return record


def record_to_mcq(record: dict) -> Mcq:
    return Mcq(
        id=record["id"],
        level=int(record["level"]),
        jurisdiction=Jurisdiction(record["jurisdiction"]),
        rule_ids=tuple(record["rule_ids"]),
        scenario_description=record[FIELD_SCENARIO],
        question_stem=record[FIELD_STEM],
        options=dict(record[FIELD_OPTIONS]),
        design_logic=record[FIELD_DESIGN_LOGIC],
        correct_option=record[FIELD_CORRECT],
        explanation=record[FIELD_EXPLANATION],
        frame_refs=tuple(record.get("frame_refs") or ()),
        scene_text_ref=record.get("scene_text_ref", "") or "",
    )


def dump_mcq_dataset(mcqs: Sequence[Mcq]) -> str:
    return "".join(json.dumps(mcq_to_record(m), ensure_ascii=False) + "\n" for m in mcqs)


def load_mcq_dataset(text: str) -> list[Mcq]:
    mcqs = []
    for line_no, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            mcqs.append(record_to_mcq(json.loads(line)))
        except (json.JSONDecodeError, KeyError) as exc:
            raise ValueError(f"line {line_no}: bad MCQ record: {exc}") from exc
    return mcqs
