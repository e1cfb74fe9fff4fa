from __future__ import annotations

import json

import pytest

from rulebench.crafter import RuleCombo, derive_labels
from rulebench.endpoints import EndpointError, StubEndpoint
from rulebench.mcq import (
    ActionDirective,
    Mcq,
    McqProvenance,
    McqRejectedError,
    PipelineStage,
    assemble_mcq,
    consensus_validate,
    determine_correct_action,
    mcq_output_fields,
    parse_generator_output,
    quality_score,
    sample_for_human_review,
)
from rulebench.mcq.builder import FIELD_CORRECT, FIELD_EXPLANATION
from rulebench.mcq.stubgen import ScriptedMcqGenerator
from rulebench.prompts import render_generation_prompt
from rulebench.rules import ActionType, Jurisdiction, NormType

from helpers import make_rule


def _good_payload(correct="B"):
    return {
        "Scenario Description": "A truck ahead slows near a bridge whose deck narrows to one lane.",
        "Question Stem": "As the driver, how should you respond correctly in this situation?",
        "Options": {
            "A": "Overtake the truck before the bridge.",
            "B": "Stay behind the truck and do not overtake.",
            "C": "Sound the horn and accelerate.",
            "D": "Stop on the carriageway and wait indefinitely.",
        },
        "Question Design Logic": "Tests the overtaking prohibition.",
        "Correct Answer Option": correct,
        "Explanation of the Correct Answer": "Overtaking is prohibited here.",
    }


def _directive():
    return ActionDirective(ActionType.OVERTAKE, NormType.FORBIDDEN, ("r1",))


def _provenance():
    return McqProvenance(
        mcq_id="q-001",
        level=1,
        jurisdiction=Jurisdiction.CHINA,
        rule_ids=("r1",),
    )


def test_parse_generator_output_happy_path():
    payload = parse_generator_output(json.dumps(_good_payload()))
    assert payload[FIELD_CORRECT] == "B"


def test_parse_generator_output_strips_code_fences():
    text = "```json\n" + json.dumps(_good_payload()) + "\n```"
    assert parse_generator_output(text)[FIELD_CORRECT] == "B"


def test_parse_generator_output_missing_field_rejected():
    broken = _good_payload()
    del broken[FIELD_EXPLANATION]
    with pytest.raises(Exception, match="missing fields"):
        parse_generator_output(json.dumps(broken))


def test_parse_generator_output_extra_field_rejected():
    broken = _good_payload()
    broken["Difficulty"] = "hard"
    with pytest.raises(Exception, match="unexpected fields"):
        parse_generator_output(json.dumps(broken))


def test_parse_generator_output_bad_option_keys_rejected():
    broken = _good_payload()
    broken["Options"] = {"A": "x", "B": "y", "C": "z"}
    with pytest.raises(Exception, match="A, B, C, D"):
        parse_generator_output(json.dumps(broken))


def test_assemble_mcq_builds_question():
    generator = StubEndpoint(reply=json.dumps(_good_payload()))
    mcq = assemble_mcq(
        "prompt", generator, directive=_directive(), provenance=_provenance()
    )
    assert mcq.correct_option == "B"
    assert mcq.num_rules == 1
    assert sorted(mcq.options) == ["A", "B", "C", "D"]


def test_assemble_mcq_is_deterministic():
    generator = StubEndpoint(reply=json.dumps(_good_payload()))
    first = assemble_mcq("p", generator, directive=_directive(), provenance=_provenance())
    second = assemble_mcq("p", generator, directive=_directive(), provenance=_provenance())
    assert first == second


def test_assemble_mcq_rejects_directive_mismatch():
    # generator claims A ("Overtake the truck...") against a must-not directive
    generator = StubEndpoint(reply=json.dumps(_good_payload(correct="A")))
    with pytest.raises(McqRejectedError, match="contradicts the arbitration directive"):
        assemble_mcq("p", generator, directive=_directive(), provenance=_provenance())


def test_assemble_mcq_rejects_schema_violation_after_budget():
    generator = StubEndpoint(reply="not json at all")
    with pytest.raises(McqRejectedError) as exc_info:
        assemble_mcq(
            "p", generator, directive=_directive(), provenance=_provenance(), retry_budget=3
        )
    assert len(exc_info.value.reasons) == 3


def test_scripted_generator_round_trips_through_assembly(china_rules):
    index = {r.id: r for r in china_rules}
    generator = ScriptedMcqGenerator(china_rules)
    combo = derive_labels(RuleCombo(members=("cn-001", "cn-002")), index)
    directive = determine_correct_action(combo, index)
    prompt = render_generation_prompt(combo.level, [index[m].content for m in combo.members])
    mcq = assemble_mcq(
        prompt,
        generator,
        directive=directive,
        provenance=McqProvenance(
            mcq_id="q-cn-0001",
            level=combo.level,
            jurisdiction=Jurisdiction.CHINA,
            rule_ids=combo.members,
        ),
    )
    assert mcq.level == 2
    assert mcq.options[mcq.correct_option].startswith("Do not overtake")


def test_consensus_accepts_only_unanimous():
    mcq = Mcq(
        id="q1",
        level=1,
        jurisdiction=Jurisdiction.CHINA,
        rule_ids=("r1",),
        **{
            "scenario_description": "s",
            "question_stem": "q",
            "options": {"A": "a", "B": "b", "C": "c", "D": "d"},
            "design_logic": "dl",
            "correct_option": "A",
            "explanation": "e",
        },
    )
    yes = StubEndpoint(reply="Output Decision: 1\nOutput Reasoning: sound.")
    no = StubEndpoint(reply="Output Decision: 0\nOutput Reasoning: distractor leaks answer.")
    garbled = StubEndpoint(reply="mu")

    assert consensus_validate(mcq, [yes, yes, yes]).accepted
    verdict = consensus_validate(mcq, [yes, yes, no])
    assert not verdict.accepted and verdict.decisions == (1, 1, 0)
    assert not consensus_validate(mcq, [no, no, no]).accepted
    # unparseable reply counts as a 0 decision for that judge
    assert consensus_validate(mcq, [yes, garbled, yes]).decisions == (1, 0, 1)


def test_quality_score_mean_and_flag():
    def scorers(*values):
        return [StubEndpoint(reply=str(v)) for v in values]

    ok = quality_score(PipelineStage.TRANSCRIPTION, "text", scorers(0.8, 0.6, 0.7))
    assert ok.mean == pytest.approx(0.7)
    assert not ok.flagged

    flagged = quality_score(PipelineStage.TRANSCRIPTION, "text", scorers(0.4, 0.5, 0.6))
    assert flagged.mean == pytest.approx(0.5)
    assert flagged.flagged

    boundary = quality_score(PipelineStage.TRANSCRIPTION, "text", scorers(0.6, 0.6, 0.6))
    assert boundary.mean == pytest.approx(0.6)
    assert not boundary.flagged  # strict less-than


def test_quality_score_mean_permutation_invariant():
    values = (0.2, 0.9, 0.55)
    import itertools

    means = set()
    for perm in itertools.permutations(values):
        result = quality_score(
            PipelineStage.DSL_TRANSLATION, "text", [StubEndpoint(reply=str(v)) for v in perm]
        )
        means.add(round(result.mean, 12))
    assert len(means) == 1


def test_quality_score_out_of_range_retried_then_error():
    always_bad = StubEndpoint(reply="1.7")
    good = StubEndpoint(reply="0.9")
    with pytest.raises(EndpointError, match="never produced a score"):
        quality_score(
            PipelineStage.COEXISTENCE, "text", [good, always_bad, good], retry_budget=1
        )

    calls = {"n": 0}

    def flaky(request):
        calls["n"] += 1
        return "1.7" if calls["n"] == 1 else "0.5"

    result = quality_score(
        PipelineStage.COEXISTENCE, "text", [good, StubEndpoint(reply=flaky), good], retry_budget=1
    )
    assert result.scores[1] == 0.5


def _mcqs(n):
    return [
        Mcq(
            id=f"q{i:03d}",
            level=1,
            jurisdiction=Jurisdiction.CHINA,
            rule_ids=("r1",),
            scenario_description="s",
            question_stem="q",
            options={"A": "a", "B": "b", "C": "c", "D": "d"},
            design_logic="dl",
            correct_option="A",
            explanation="e",
        )
        for i in range(n)
    ]


def test_review_sample_rate_and_ceiling():
    assert len(sample_for_human_review(_mcqs(100), seed=5)) == 5
    assert len(sample_for_human_review(_mcqs(1), seed=5)) == 1
    assert len(sample_for_human_review(_mcqs(21), seed=5)) == 2


def test_review_sample_deterministic_per_seed():
    pool = _mcqs(50)
    first = [m.id for m in sample_for_human_review(pool, seed=11)]
    second = [m.id for m in sample_for_human_review(pool, seed=11)]
    other = [m.id for m in sample_for_human_review(pool, seed=12)]
    assert first == second
    assert first != other


def test_mcq_output_fields_exact_names():
    mcq = _mcqs(1)[0]
    fields = mcq_output_fields(mcq)
    assert list(fields) == [
        "Scenario Description",
        "Question Stem",
        "Options",
        "Question Design Logic",
        "Correct Answer Option",
        "Explanation of the Correct Answer",
    ]
