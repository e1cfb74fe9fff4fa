from __future__ import annotations

from pathlib import Path

import pytest

from rulebench.crafter import RuleCombo, TagCoexistenceOracle, derive_labels, validate_coexistence
from rulebench.scene import (
    Actor,
    Environment,
    OracleSpec,
    Position,
    RoadNetworkSpec,
    SceneDoc,
    SceneParseError,
    SceneVocabulary,
    align_check,
    parse_scene_doc,
    self_check,
    serialize_scene_doc,
)
from rulebench.rules import ActionType, NormType, PerceptualType, rules_by_id

from helpers import make_rule


def _scene_paths(fixtures_dir: Path):
    return sorted((fixtures_dir / "scenes").glob("*.yaml"))


def test_intersection_example_structure(fixtures_dir):
    doc = parse_scene_doc((fixtures_dir / "scenes" / "intersection_turn.yaml").read_text())
    assert doc.environment == Environment(weather="sunny", time="daytime")
    assert doc.road_network == RoadNetworkSpec(
        road_type="intersection", road_marker="solid_line", traffic_signs=("traffic_light",)
    )
    assert len(doc.actors) >= 3
    assert doc.ego.behavior == "turn_right"
    assert doc.ego.position == Position(reference="intersection", relation="behind")
    assert doc.actor("vehicle_2").position == Position(reference="ego", relation="right")
    assert doc.oracle == OracleSpec(longitudinal="go_forward", lateral="keep_lane")


def test_all_fixture_scenes_round_trip(fixtures_dir):
    paths = _scene_paths(fixtures_dir)
    assert len(paths) >= 5
    for path in paths:
        original = parse_scene_doc(path.read_text())
        canonical = serialize_scene_doc(original)
        reparsed = parse_scene_doc(canonical)
        assert reparsed == original, path.name
        # canonical form is a serialization fixpoint
        assert serialize_scene_doc(reparsed) == canonical, path.name


def _minimal(**overrides) -> str:
    actors = overrides.pop(
        "actors",
        """
  - id: ego
    type: car
    position:
      reference: intersection
      relation: behind
    behavior: go_forward
""",
    )
    return f"""
environment:
  weather: sunny
  time: daytime
road_network:
  road_type: intersection
  road_marker: solid_line
  traffic_signs: []
actors:{actors}
oracle:
  longitudinal: go_forward
  lateral: keep_lane
"""


def test_two_egos_rejected():
    doc = _minimal(
        actors="""
  - id: ego
    type: car
    position: {reference: intersection, relation: behind}
    behavior: go_forward
  - id: ego
    type: car
    position: {reference: intersection, relation: front}
    behavior: go_forward
"""
    )
    with pytest.raises(SceneParseError, match="duplicate actor id"):
        parse_scene_doc(doc)


def test_missing_ego_rejected():
    doc = _minimal(
        actors="""
  - id: vehicle_1
    type: car
    position: {reference: intersection, relation: behind}
    behavior: go_forward
"""
    )
    with pytest.raises(SceneParseError, match="exactly one 'ego'"):
        parse_scene_doc(doc)


def test_dangling_reference_rejected():
    doc = _minimal(
        actors="""
  - id: ego
    type: car
    position: {reference: ghost, relation: behind}
    behavior: go_forward
"""
    )
    with pytest.raises(SceneParseError, match="neither an actor nor a road-network landmark"):
        parse_scene_doc(doc)


def test_reference_cycle_rejected():
    doc = _minimal(
        actors="""
  - id: ego
    type: car
    position: {reference: vehicle_2, relation: behind}
    behavior: go_forward
  - id: vehicle_1
    type: car
    position: {reference: ego, relation: front}
    behavior: go_forward
  - id: vehicle_2
    type: car
    position: {reference: vehicle_1, relation: front}
    behavior: go_forward
"""
    )
    with pytest.raises(SceneParseError, match="reference cycle"):
        parse_scene_doc(doc)


def test_self_reference_rejected():
    doc = _minimal(
        actors="""
  - id: ego
    type: car
    position: {reference: ego, relation: behind}
    behavior: go_forward
"""
    )
    with pytest.raises(SceneParseError, match="references itself"):
        parse_scene_doc(doc)


def test_mutual_pair_parses_for_semantic_checking():
    # converse mutual statements are one relation said twice; the
    # contradiction case is the self-check's job, not the parser's
    doc = _minimal(
        actors="""
  - id: ego
    type: car
    position: {reference: vehicle_1, relation: front}
    behavior: go_forward
  - id: vehicle_1
    type: car
    position: {reference: ego, relation: behind}
    behavior: go_forward
"""
    )
    parsed = parse_scene_doc(doc)
    assert len(parsed.actors) == 2


def test_unknown_tokens_rejected():
    with pytest.raises(SceneParseError, match="unknown token 'hovercraft'"):
        parse_scene_doc(
            _minimal(
                actors="""
  - id: ego
    type: hovercraft
    position: {reference: intersection, relation: behind}
    behavior: go_forward
"""
            )
        )


def test_vocabulary_extension_admits_new_tokens():
    doc_text = _minimal(
        actors="""
  - id: ego
    type: rickshaw
    position: {reference: intersection, relation: behind}
    behavior: go_forward
"""
    )
    with pytest.raises(SceneParseError):
        parse_scene_doc(doc_text)
    vocab = SceneVocabulary().extended(actor_type={"rickshaw"})
    assert parse_scene_doc(doc_text, vocab).ego.type == "rickshaw"


def test_syntax_error_reports_position():
    with pytest.raises(SceneParseError, match="line"):
        parse_scene_doc("environment:\n  weather: [unclosed\n")


def test_unknown_block_rejected():
    text = _minimal() + "extras:\n  foo: 1\n"
    with pytest.raises(SceneParseError, match="unknown keys"):
        parse_scene_doc(text)


# --- self check ------------------------------------------------------------


def test_self_check_clean_on_fixture_scenes(fixtures_dir):
    for path in _scene_paths(fixtures_dir):
        doc = parse_scene_doc(path.read_text())
        assert self_check(doc) == [], path.name


def test_self_check_mutual_relation_contradiction():
    doc = parse_scene_doc(
        _minimal(
            actors="""
  - id: ego
    type: car
    position: {reference: intersection, relation: behind}
    behavior: go_forward
  - id: vehicle_1
    type: car
    position: {reference: vehicle_2, relation: front}
    behavior: go_forward
  - id: vehicle_2
    type: car
    position: {reference: vehicle_1, relation: front}
    behavior: go_forward
"""
        )
    )
    findings = self_check(doc)
    assert any(f.code == "mutual-relation-contradiction" for f in findings)


def test_self_check_converse_relations_are_consistent():
    doc = parse_scene_doc(
        _minimal(
            actors="""
  - id: ego
    type: car
    position: {reference: vehicle_1, relation: front}
    behavior: go_forward
  - id: vehicle_1
    type: car
    position: {reference: ego, relation: behind}
    behavior: go_forward
"""
        )
    )
    assert self_check(doc) == []


def test_self_check_stop_with_speed_flagged():
    doc = parse_scene_doc(
        _minimal(
            actors="""
  - id: ego
    type: car
    position: {reference: intersection, relation: behind}
    behavior: stop
    speed: 60
"""
        )
    )
    findings = self_check(doc)
    assert any(f.code == "behavior-speed-incompatible" and f.actor_id == "ego" for f in findings)


def test_self_check_weather_sign_table():
    text = """
environment:
  weather: sunny
  time: daytime
road_network:
  road_type: rural_road
  road_marker: solid_line
  traffic_signs:
    - fog_warning_sign
actors:
  - id: ego
    type: car
    position: {reference: rural_road, relation: behind}
    behavior: go_forward
oracle:
  longitudinal: go_forward
  lateral: keep_lane
"""
    findings = self_check(parse_scene_doc(text))
    assert any(f.code == "weather-sign-incoherent" for f in findings)


def test_self_check_deterministic(fixtures_dir):
    doc = parse_scene_doc((fixtures_dir / "scenes" / "ramp_merge.yaml").read_text())
    assert self_check(doc) == self_check(doc)


# --- align check -----------------------------------------------------------


def _fog_doc():
    return parse_scene_doc(
        """
environment:
  weather: fog
  time: daytime
road_network:
  road_type: rural_road
  road_marker: solid_line
  traffic_signs: []
actors:
  - id: ego
    type: car
    position: {reference: rural_road, relation: behind}
    behavior: go_forward
oracle:
  longitudinal: decelerate
  lateral: keep_lane
"""
    )


def test_align_check_fog_rule_matched():
    rule = make_rule(
        "f1",
        action=ActionType.SPEED_LIMIT,
        norm=NormType.OBLIGATORY,
        speed=(0, 30),
        tags=("weather:fog",),
    )
    report = align_check(_fog_doc(), RuleCombo(members=("f1",), level=1), [rule])
    assert report.all_matched


def test_align_check_emergency_rule_unmatched_without_emergency_actor():
    rule = make_rule(
        "e1", action=ActionType.YIELD, norm=NormType.OBLIGATORY, tags=("agent:emergency_vehicle",)
    )
    report = align_check(_fog_doc(), RuleCombo(members=("e1",), level=1), [rule])
    assert report.unmatched_rule_ids == ("e1",)
    assert report.entries[0].missing == ("agent:emergency_vehicle",)


def test_align_check_l5_combo_with_both_constraints_matched(fixtures_dir):
    doc = parse_scene_doc(
        """
environment:
  weather: sunny
  time: daytime
road_network:
  road_type: urban_road
  road_marker: solid_line
  traffic_signs:
    - no_horn_sign
actors:
  - id: ego
    type: car
    position: {reference: urban_road, relation: behind}
    behavior: go_forward
  - id: walker_1
    type: pedestrian
    position: {reference: ego, relation: front, distance: 12}
    behavior: walk_cross
oracle:
  longitudinal: decelerate
  lateral: keep_lane
"""
    )
    forbid = make_rule(
        "h1", action=ActionType.HONK_HORN, norm=NormType.FORBIDDEN, tags=("zone:no_horn",),
        perceptual=PerceptualType.STATIC,
    )
    warn = make_rule(
        "h2", action=ActionType.HONK_HORN, norm=NormType.OBLIGATORY, tags=("agent:pedestrian",),
        perceptual=PerceptualType.DYNAMIC,
    )
    index = rules_by_id([forbid, warn])
    combo = validate_coexistence(
        derive_labels(RuleCombo(members=("h1", "h2")), index), index, TagCoexistenceOracle()
    )
    assert combo.level == 5
    report = align_check(doc, combo, index)
    assert report.all_matched


def test_align_check_monotone_under_added_scene_elements():
    rule = make_rule(
        "e1", action=ActionType.YIELD, norm=NormType.OBLIGATORY, tags=("agent:emergency_vehicle",)
    )
    base = _fog_doc()
    combo = RuleCombo(members=("e1",), level=1)
    assert not align_check(base, combo, [rule]).all_matched
    richer = SceneDoc(
        environment=base.environment,
        road_network=base.road_network,
        actors=base.actors
        + (
            Actor(
                id="amb_1",
                type="ambulance",
                position=Position(reference="ego", relation="behind", distance=20.0),
                behavior="go_forward",
                speed=90.0,
            ),
        ),
        oracle=base.oracle,
    )
    assert align_check(richer, combo, [rule]).all_matched
