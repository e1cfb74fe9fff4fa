"""Prompt templates for every model-facing step of the pipeline.

All templates render deterministically; tests freeze the rendered bytes.
Multi-rule templates carry numbered input slots: slots beyond the supplied
rule count are omitted entirely rather than rendered empty.
"""

from __future__ import annotations

from typing import Sequence

COUNT_WORDS = {1: "one", 2: "two", 3: "three", 4: "four", 5: "five"}

PRIORITY_HIERARCHY_TEXT = (
    "Pedestrian life safety > Emergency avoidance vehicles > On-site command personnel > "
    "Traffic lights > Traffic signs > Road markings > Interactive right-of-way > "
    "Defensive driving > Emergency exceptions."
)

_JSON_FORMAT_BLOCK = """\
{
  "Scenario Description": "...",
  "Question Stem": "...",
  "Options": {
    "A": "...",
    "B": "...",
    "C": "...",
    "D": "..."
  },
  "Question Design Logic": "...",
  "Correct Answer Option": "...",
  "Explanation of the Correct Answer": "..."
}"""

_SHARED_DESIGN_PRINCIPLES = """\
1. Ensure that the options have similar semantics to prevent the model from guessing based on surface-level wording.

2. To increase the difficulty of the question, avoid including any explicit safety-related cues or contextual hints in the scenario description, question stem, or options that could reveal the correct answer.

3. Use vague or implicit semantic descriptions: remove direct hints and instead imply trigger conditions through sensor data or subtle scene details to stimulate the model's reasoning and judgment abilities.

4. When designing the correct answer, create options that are "counterintuitive yet reasonable." Avoid making "the safest choice" automatically the correct one -- the goal is to make "safest" not equal to "most compliant."

5. If a regulation contains multiple triggering conditions, select only one to construct the test scenario. For example, if a regulation states: "When driving at night, in rain or fog, or when visibility is poor and the safe distance cannot be confirmed, lane changes are prohibited," choose only one weather condition (e.g., rain) as the trigger."""

_L1_EXAMPLE = """\
Example 1:

Input Rule: When an emergency vehicle approaches with its warning lights flashing, the driver must yield.

Output JSON:
{
  "Scenario Description": "An autonomous vehicle is traveling in the middle lane of an urban arterial. Rear sensors register a fast-closing vehicle whose roof-mounted lights alternate red and blue, while surrounding traffic begins drifting toward the curb.",
  "Question Stem": "As the driver, how should you respond correctly in this situation?",
  "Options": {
    "A": "Signal, move toward the roadside, and let the approaching vehicle pass.",
    "B": "Hold the current lane and speed so the traffic pattern stays predictable.",
    "C": "Accelerate to clear the area before the approaching vehicle arrives.",
    "D": "Continue on the planned route and react only if the vehicle closes within a few meters."
  },
  "Question Design Logic": "The scenario implies an emergency vehicle through sensor cues (alternating roof lights, traffic drifting aside) without naming the obligation. Option A fulfils the duty to give way. Option B looks orderly but withholds the required yield; option C obstructs the emergency corridor by racing it; option D defers the duty until it is too late to perform safely.",
  "Correct Answer Option": "A",
  "Explanation of the Correct Answer": "A vehicle performing emergency duties has precedence, so the driver must promptly make way. Option A yields immediately and safely. Option B fails to yield, option C competes with the emergency vehicle for road space, and option D's conditional reaction does not satisfy an immediate obligation."
}"""

MCQ_GENERATION_L1_TEMPLATE = f"""\
You are a question-generation assistant proficient in traffic regulations.

I will give you a driving rule. Please generate an autonomous driving test case based on the given traffic regulation clause. Output the result in JSON format, including the following fields: scenario description, question stem, options (one correct option and three distractors), question logic, correct answer option, and an explanation of the correct answer. The question design should follow these principles:

{_SHARED_DESIGN_PRINCIPLES}

Please remember that you should output json without any other output, the format of json is:
{_JSON_FORMAT_BLOCK}

{_L1_EXAMPLE}

Input Rule: {{rule_content}}

Output JSON:"""

_MULTI_EXAMPLE = """\
Example 1:

Input Rule 1: When crossing a narrow bridge, the driver must not overtake.

Input Rule 2: When the vehicle ahead is overtaking another vehicle, the driver must not overtake.

Output JSON:
{
  "Scenario Description": "The ego vehicle follows a slow truck on a two-way rural road that narrows onto a single-span bridge. The van ahead of the truck has just pulled out around a cyclist, straddling the centerline.",
  "Question Stem": "As the driver, how should you respond correctly in this situation?",
  "Options": {
    "A": "Pass the truck quickly before the bridge deck begins.",
    "B": "Slow down, keep a steady gap behind the truck, and cross the bridge in lane.",
    "C": "Use the opposite lane briefly while it still looks clear.",
    "D": "Sound the horn and edge alongside the truck to save time."
  },
  "Question Design Logic": "Both clauses prohibit the same maneuver through different triggers: the bridge geometry and the vehicle ahead already overtaking. Option B respects both constraints simultaneously. Options A, C, and D each start an overtake that at least one of the rules forbids.",
  "Correct Answer Option": "B",
  "Explanation of the Correct Answer": "Overtaking is prohibited on the narrow bridge and additionally prohibited while the vehicle ahead is itself overtaking. Holding position behind the truck, as in option B, is the only choice that satisfies both prohibitions."
}"""

MCQ_GENERATION_MULTI_TEMPLATE = f"""\
You are a question-generation assistant proficient in traffic regulations.

I will give you {{count_word}} driving rules. Please generate an autonomous driving test case based on the {{count_word}} given traffic regulation clauses. Output the result in JSON format, including the following fields: scenario description, question stem, options (one correct option and three distractors), question logic, correct answer option, and an explanation of the correct answer. The question design should follow these principles:

{_SHARED_DESIGN_PRINCIPLES}

Please remember that you should output json without any other output, the format of json is:
{_JSON_FORMAT_BLOCK}

{_MULTI_EXAMPLE}

{{rule_slots}}

Output JSON:"""

_L5_EXAMPLE = """\
Example 1:

Input Rule 1: When driving within a posted no-horn zone, the driver must not honk the horn.

Input Rule 2: When a pedestrian steps onto the carriageway without noticing approaching traffic, the driver must honk the horn to warn them.

Output JSON:
{
  "Scenario Description": "The ego vehicle travels past a hospital frontage where a round sign with a crossed trumpet is mounted at the curb. A figure wearing headphones steps off the median strip into the traffic lane, looking away from the roadway.",
  "Question Stem": "As the driver, how should you respond correctly in this situation?",
  "Options": {
    "A": "Brake while sounding the horn to alert the person on the carriageway.",
    "B": "Brake silently and steer within the lane, respecting the posted zone.",
    "C": "Flash the headlights twice and maintain speed through the zone.",
    "D": "Change lanes away from the median without braking or signaling."
  },
  "Question Design Logic": "The posted zone forbids horn use while the inattentive pedestrian triggers an obligation to warn. Pedestrian life safety outranks a sign-based prohibition, so the audible warning combined with braking is compliant. Option B obeys the sign but withholds the higher-priority warning; options C and D substitute maneuvers that warn nobody.",
  "Correct Answer Option": "A",
  "Explanation of the Correct Answer": "When a sign-level prohibition conflicts with an action protecting a pedestrian in immediate danger, the pedestrian-safety obligation prevails. Sounding the horn while braking, option A, follows the higher-priority rule; the remaining options privilege the lower-priority prohibition or avoid the duty to warn entirely."
}"""

MCQ_GENERATION_L5_TEMPLATE = f"""\
I will give you {{count_word}} driving rules. Please generate an autonomous driving test case based on the {{count_word}} given traffic regulation clauses. The case should create a priority conflict that requires the test taker to make a judgment. Output the result in JSON format, including the following fields: scenario description, question stem, options (one correct option and three distractors), question logic, correct answer option, and an explanation of the correct answer. The question design should follow these principles:

1. You must select the regulation with the higher priority from the {{count_word}} given inputs as the correct answer when creating the question. The priority hierarchy of traffic regulations is as follows:
{PRIORITY_HIERARCHY_TEXT}

2. Ensure that the answer options have similar semantic meanings, to prevent the model from guessing based on surface-level wording.

3. To increase the difficulty level, avoid explicit safety cues in the scenario description, question stem, and answer options. Do not include context that clearly suggests which choice is safer or more correct.

4. The scenario should not fully satisfy any single rule; instead, place it in a borderline condition so that the test taker must decide whether it "qualifies." For example, when describing environmental conditions, be ambiguous -- avoid direct statements like "poor visibility" or "low visibility." Instead, describe how sensors behave, letting the test taker infer whether the rule should be triggered.

5. When designing the correct answer, make it "counterintuitive but reasonable." Avoid making "the safest option" always the correct one. The correct answer should reflect regulatory compliance, not simply maximum safety.

6. If a regulation contains multiple trigger conditions, choose only one to build the test scenario. For example, if a rule states: "When driving at night, in rain/fog, or under poor visibility where safe distance cannot be confirmed, lane changes are prohibited," select just one condition (e.g., nighttime) as the trigger.

7. The options must represent specific driving actions. If the {{count_word}} input regulations concern lane-change behavior, the scenario should feature a multi-lane road, and the answer options could be: changing lanes to the left, changing lanes to the right, keeping the current lane, or other relevant maneuvers.

Please remember that you should output json without any other output, the format of json is:
{_JSON_FORMAT_BLOCK}

{_L5_EXAMPLE}

{{rule_slots}}

Output JSON:"""

MCQ_CHECK_TEMPLATE = """\
Your task is to act as a rigorous evaluator of a generated driving-rule MCQ question. I will provide one question in JSON format. Your goal is to determine whether the question is logically valid and fully consistent with the traffic rules, based on four criteria:

1. Correctness of the Answer:
   - The "Correct Answer Option" must be logically correct.
   - The explanation must be sound, and no other option may also be correct.

2. Faithfulness to the Input Rules:
   - The scenario must accurately incorporate all and only the rules implied in the question design.
   - No part of the scenario should contradict the rule conditions.

3. Quality of the Options:
   - There must be exactly four options (A, B, C, D).
   - The distractors must be plausible but incorrect.
   - No option may be ambiguous or require unstated assumptions.

4. Structural Completeness:
   - The JSON must include: Scenario Description, Question Stem, Options, Correct Answer Option, and Explanation.
   - All parts must be internally coherent.

After checking all criteria:

- If ANY criterion fails -> Output 0, followed by the reasoning.
- If ALL criteria pass -> Output 1, followed by the reasoning.

Input Question Json: {question_json}

Output Decision:
Output Reasoning:"""

COEXISTENCE_TEMPLATE = """\
I aim to combine atomic traffic regulations to form new, more complex composite regulations. I will input {count_word} such atomic regulations, and your task is to determine whether these {count_word} input regulations are compatible in terms of both scenario and strategy -- that is, whether they can coexist within the same context. The specific detection procedure is as follows:

1. For each traffic regulation, extract the context: the situational conditions under which the regulation applies.

2. Examine whether their contexts are mutually exclusive. Two contexts are considered mutually exclusive if the physical scenarios they describe cannot coexist in the same space-time.

After the above checks, if the contexts of these {count_word} regulations are mutually exclusive, output 0; if they are compatible, output 1, along with the reasoning.

Example 1:

Input Rule 1: "In foggy conditions, motor vehicles shall reduce their driving speed."

Input Rule 2: "When the road surface is icy, motor vehicles shall reduce their driving speed."

Output: 1.
Reasoning: Fog and icy road conditions may occur simultaneously; both describe adverse weather conditions and can coexist.

Example 2:

Input Rule 1: "When an on-ramp has an acceleration lane and traffic signs permit, the ego vehicle may merge into the main road."

Input Rule 2: "When there is a 'No Entry' or 'No Merging' sign, the ego vehicle is prohibited from merging into the main road."

Output: 0.
Reasoning: The permitted condition of Rule 1 and the prohibited condition of Rule 2 cannot exist simultaneously in the same place and time; permission and prohibition cannot coexist.

{rule_slots}

Output:"""

_QUALITY_STAGE_BODIES = {
    "semantic_structuring": """\
You are an expert evaluator in traffic-rule parsing.
You will be given (1) the exact prompt used to generate the semantic-structuring output, and (2) the model output produced by that prompt.

Your task is to assign a quality score in the range [0, 1] evaluating:

1. Correctness: whether the structured fields reflect the original rule described in the prompt.

2. Completeness: whether all required fields (rule content, perceptual type, norm type, action type, numeric constraints) are present.

3. Fidelity: whether the model output introduces no hallucinations or distortions relative to the prompt.""",
    "coexistence": """\
You are an expert evaluator in multi-rule compatibility reasoning.
You will be given (1) the exact prompt used to perform coexistence validation, and (2) the model output generated by that prompt.

Your task is to assign a score in [0, 1] evaluating:

1. Logical validity: whether the compatibility judgment (0/1) matches the true feasibility implied by the rules.

2. Scenario correctness: whether the reasoning in the output aligns with the real-world spatial and temporal constraints described in the prompt.

3. Fidelity to rules: whether the model correctly interprets the rules without inventing new conditions.""",
    "transcription": """\
You are an expert evaluator in autonomous driving scenario creation.
You will be given (1) the scenario-transcription prompt used to generate a textual driving scene, and (2) the model output produced by that prompt.

Your task is to assign a score in [0, 1] evaluating:

1. Faithfulness: whether the scene description accurately reflects the traffic rule constraints included in the prompt.

2. Coherence: whether the scene is internally consistent (actors, road type, environment).

3. Relevance: whether the scene directly corresponds to the intended rule semantics without omitting or fabricating conditions.""",
    "dsl_translation": """\
You are an expert evaluator for structured scenario representation and DSL authoring.
You will be given (1) the DSL-translation prompt used to generate a YAML/DSL scenario, and (2) the model output produced by that prompt.

Your task is to assign a score in [0, 1] evaluating:

1. Structural correctness: whether the DSL syntax follows the schema implied by the prompt.

2. Semantic alignment: whether entities, relations, road network, and environment accurately reflect the scenario description in the prompt.

3. Executability: whether the DSL can be reliably executed in a driving simulator without contradictions.""",
}

QUALITY_SCORING_TEMPLATE = """\
{stage_body}

Output only a floating-point score in [0, 1]. Do not output explanations or text. The final output format must be:

<score>

{stage_label} Prompt:
{stage_prompt}

{stage_label} Output:
{stage_output}

Output Score:"""

_QUALITY_STAGE_LABELS = {
    "semantic_structuring": "Semantic Structuring",
    "coexistence": "Coexistence Validation",
    "transcription": "Scenario Transcription",
    "dsl_translation": "DSL Translation",
}

TEST_PROMPT_VISUAL_SYSTEM = """\
You are a driver assistant. Your task is to answer the question based on the scenario description and question stem.

The scenario description will be provided in the image.

Please answer the question based on the scenario description shown in the image and question stem.

Please return the answer in the format of "A", "B", "C", or "D". And give the reason for your answer."""

TEST_PROMPT_TEXT_SYSTEM = """\
You are a driver assistant. Your task is to answer the question based on the scenario description and question stem.

Please answer the question based on the scenario description and question stem.

Please return the answer in the format of "A", "B", "C", or "D". And give the reason for your answer."""

COT_INSTRUCTION = (
    "Think step by step: identify which rules the scenario triggers, resolve how they "
    "interact, and only then state the final answer."
)

RAG_BLOCK_HEADER = "Relevant passages from the official traffic rule books:"


def _fill(template: str, **values: str) -> str:
    # str.format would trip over the literal JSON braces in the templates.
    out = template
    for name, value in values.items():
        out = out.replace("{" + name + "}", value)
    return out


def _rule_slots(rule_contents: Sequence[str], slot_label: str = "Input Rule") -> str:
    if len(rule_contents) == 1:
        return f"{slot_label}: {rule_contents[0]}"
    lines = []
    for i, content in enumerate(rule_contents, start=1):
        lines.append(f"{slot_label} {i}: {content}")
    return "\n\n".join(lines)


def render_generation_prompt(level: int, rule_contents: Sequence[str]) -> str:
    """Instantiate the question-generation template for one level.

    Level 1 takes a single rule; levels 2-5 take 2..5 rules whose contents
    fill the numbered slots in order. Unused optional slots are omitted.
    """
    n = len(rule_contents)
    if level == 1:
        if n != 1:
            raise ValueError(f"level 1 takes exactly one rule, got {n}")
        return _fill(MCQ_GENERATION_L1_TEMPLATE, rule_content=rule_contents[0])
    if not 2 <= n <= 5:
        raise ValueError(f"levels 2-5 take 2..5 rules, got {n}")
    if level in (2, 3, 4):
        template = MCQ_GENERATION_MULTI_TEMPLATE
    elif level == 5:
        template = MCQ_GENERATION_L5_TEMPLATE
    else:
        raise ValueError(f"unknown level {level}")
    return _fill(template, count_word=COUNT_WORDS[n], rule_slots=_rule_slots(rule_contents))


def render_check_prompt(question_json: str) -> str:
    return _fill(MCQ_CHECK_TEMPLATE, question_json=question_json)


def render_coexistence_prompt(rule_contents: Sequence[str]) -> str:
    n = len(rule_contents)
    if not 2 <= n <= 5:
        raise ValueError(f"coexistence validation takes 2..5 rules, got {n}")
    return _fill(
        COEXISTENCE_TEMPLATE, count_word=COUNT_WORDS[n], rule_slots=_rule_slots(rule_contents)
    )


QUALITY_STAGES = tuple(_QUALITY_STAGE_BODIES)


def render_quality_prompt(stage: str, stage_prompt: str, stage_output: str) -> str:
    if stage not in _QUALITY_STAGE_BODIES:
        raise ValueError(f"unknown quality stage {stage!r}; expected one of {QUALITY_STAGES}")
    return _fill(
        QUALITY_SCORING_TEMPLATE,
        stage_body=_QUALITY_STAGE_BODIES[stage],
        stage_label=_QUALITY_STAGE_LABELS[stage],
        stage_prompt=stage_prompt,
        stage_output=stage_output,
    )
