from __future__ import annotations

import itertools
import random

import pytest

from rulebench.crafter import (
    Coexistence,
    ComboError,
    HierarchyError,
    ModelCoexistenceOracle,
    NormRelation,
    PerceptualCombo,
    RuleCombo,
    TagCoexistenceOracle,
    build_hierarchy,
    derive_labels,
    export_hierarchy,
    generate_candidate_combos,
    load_hierarchy,
    singleton_combo,
    validate_coexistence,
)
from rulebench.crafter.coexistence import UNPARSEABLE_AUDIT_FLAG
from rulebench.endpoints import EndpointError, StubEndpoint
from rulebench.rules import (
    ActionType,
    Jurisdiction,
    NormType,
    PerceptualType,
    rules_by_id,
)

from helpers import make_rule
from oracles import combo_label_oracle, pair_label_oracle, speed_combo_conflict_oracle

B = [PerceptualType.STATIC, PerceptualType.DYNAMIC]
N = [NormType.PERMISSIVE, NormType.OBLIGATORY, NormType.FORBIDDEN]


def _labeled_pair(b_j, n_j, b_k, n_k):
    r1 = make_rule("p-1", perceptual=b_j, norm=n_j, action=ActionType.YIELD)
    r2 = make_rule("p-2", perceptual=b_k, norm=n_k, action=ActionType.YIELD)
    combo = RuleCombo(members=("p-1", "p-2"))
    return derive_labels(combo, [r1, r2])


def test_candidate_generation_filters_by_action_type():
    r1 = make_rule("r1", action=ActionType.OVERTAKE)
    r2 = make_rule("r2", action=ActionType.OVERTAKE)
    r3 = make_rule("r3", action=ActionType.YIELD, norm=NormType.OBLIGATORY)
    combos = generate_candidate_combos([r1, r2, r3], 2)
    assert [c.members for c in combos] == [("r1", "r2")]


def test_candidate_generation_counts_match_subset_enumeration():
    rules = [make_rule(f"r{i}", action=ActionType.LANE_CHANGE) for i in range(6)]
    combos = generate_candidate_combos(rules, 2)
    # brute-force oracle: enumerate all 2-subsets and keep same-action ones
    expected = [
        frozenset((a.id, b.id))
        for a, b in itertools.combinations(rules, 2)
        if a.action_type == b.action_type
    ]
    assert len(combos) == len(expected) == 15
    assert {c.member_set for c in combos} == set(expected)


def test_candidate_generation_all_distinct_actions_is_empty():
    actions = [ActionType.OVERTAKE, ActionType.YIELD, ActionType.U_TURN]
    rules = [make_rule(f"r{i}", action=a) for i, a in enumerate(actions)]
    assert generate_candidate_combos(rules, 2) == []


def test_candidate_generation_rejects_mixed_jurisdictions():
    r1 = make_rule("r1", jurisdiction=Jurisdiction.CHINA)
    r2 = make_rule("r2", jurisdiction=Jurisdiction.USA)
    with pytest.raises(ComboError, match="jurisdiction"):
        generate_candidate_combos([r1, r2], 2)


@pytest.mark.parametrize("k", [0, 1, 6])
def test_candidate_generation_rejects_bad_k(k):
    with pytest.raises(ComboError, match="k="):
        generate_candidate_combos([make_rule(), make_rule()], k)


def test_derive_labels_matches_case_table_all_36_pairs():
    for b_j in B:
        for n_j in N:
            for b_k in B:
                for n_k in N:
                    labeled = _labeled_pair(b_j, n_j, b_k, n_k)
                    expected = pair_label_oracle(b_j.value, n_j.value, b_k.value, n_k.value)
                    got = (labeled.perceptual_combo, labeled.norm_relation, labeled.level)
                    assert got == expected, (b_j, n_j, b_k, n_k)


def test_derive_labels_known_pairs():
    labeled = _labeled_pair(
        PerceptualType.STATIC, NormType.OBLIGATORY, PerceptualType.STATIC, NormType.OBLIGATORY
    )
    assert (labeled.perceptual_combo, labeled.norm_relation, labeled.level) == (
        PerceptualCombo.DOUBLE_STATIC,
        NormRelation.HARMONY,
        2,
    )
    conflicted = _labeled_pair(
        PerceptualType.DYNAMIC, NormType.OBLIGATORY, PerceptualType.STATIC, NormType.FORBIDDEN
    )
    assert (conflicted.perceptual_combo, conflicted.norm_relation, conflicted.level) == (
        PerceptualCombo.HYBRID,
        NormRelation.CONFLICT,
        5,
    )


def test_speed_pair_disjoint_intervals_conflict_level_5():
    r1 = make_rule("s1", action=ActionType.SPEED_LIMIT, norm=NormType.OBLIGATORY, speed=(0, 30))
    r2 = make_rule("s2", action=ActionType.SPEED_LIMIT, norm=NormType.OBLIGATORY, speed=(110, 120))
    labeled = derive_labels(RuleCombo(members=("s1", "s2")), [r1, r2])
    assert labeled.norm_relation == NormRelation.CONFLICT
    assert labeled.level == 5


def test_speed_pair_overlapping_intervals_harmonize():
    r1 = make_rule("s1", action=ActionType.SPEED_LIMIT, norm=NormType.OBLIGATORY, speed=(0, 70))
    r2 = make_rule("s2", action=ActionType.SPEED_LIMIT, norm=NormType.OBLIGATORY, speed=(0, 30))
    labeled = derive_labels(RuleCombo(members=("s1", "s2")), [r1, r2])
    assert labeled.norm_relation == NormRelation.HARMONY


def test_speed_relation_ignores_norm_types():
    # interval logic governs speed rules even when one member is permissive
    r1 = make_rule("s1", action=ActionType.SPEED_LIMIT, norm=NormType.PERMISSIVE, speed=(0, 70))
    r2 = make_rule("s2", action=ActionType.SPEED_LIMIT, norm=NormType.FORBIDDEN, speed=(50, 90))
    labeled = derive_labels(RuleCombo(members=("s1", "s2")), [r1, r2])
    assert labeled.norm_relation == NormRelation.HARMONY


def test_derive_labels_rejects_singletons_and_mixed_actions():
    rule = make_rule("r1")
    with pytest.raises(ComboError, match="2\\+"):
        derive_labels(RuleCombo(members=("r1",)), [rule])
    other = make_rule("r2", action=ActionType.YIELD, norm=NormType.OBLIGATORY)
    with pytest.raises(ComboError, match="mix action types"):
        derive_labels(RuleCombo(members=("r1", "r2")), [rule, other])


def test_derive_labels_missing_speed_range_rejected():
    good = make_rule("s1", action=ActionType.SPEED_LIMIT, norm=NormType.OBLIGATORY, speed=(0, 30))
    bad = make_rule("s2", action=ActionType.SPEED_LIMIT, norm=NormType.OBLIGATORY)
    with pytest.raises(ComboError, match="missing its speed range"):
        derive_labels(RuleCombo(members=("s1", "s2")), [good, bad])


def test_derive_labels_permutation_invariant():
    rng = random.Random(20240518)
    for _ in range(200):
        k = rng.choice([2, 3, 4, 5])
        rules = [
            make_rule(f"m{i}", perceptual=rng.choice(B), norm=rng.choice(N), action=ActionType.YIELD)
            for i in range(k)
        ]
        index = rules_by_id(rules)
        ids = [r.id for r in rules]
        baseline = derive_labels(RuleCombo(members=tuple(ids)), index)
        rng.shuffle(ids)
        shuffled = derive_labels(RuleCombo(members=tuple(ids)), index)
        assert (baseline.perceptual_combo, baseline.norm_relation, baseline.level) == (
            shuffled.perceptual_combo,
            shuffled.norm_relation,
            shuffled.level,
        )


def test_conflict_dominates_level_regardless_of_perceptual():
    for b_j in B:
        for b_k in B:
            labeled = _labeled_pair(b_j, NormType.OBLIGATORY, b_k, NormType.FORBIDDEN)
            assert labeled.norm_relation == NormRelation.CONFLICT
            assert labeled.level == 5


def test_generalized_labels_match_oracle_on_random_combos():
    rng = random.Random(77)
    for _ in range(500):
        k = rng.choice([3, 4, 5])
        facets = [(rng.choice(B), rng.choice(N)) for _ in range(k)]
        rules = [
            make_rule(f"g{i}", perceptual=b, norm=n, action=ActionType.LANE_CHANGE)
            for i, (b, n) in enumerate(facets)
        ]
        labeled = derive_labels(RuleCombo(members=tuple(r.id for r in rules)), rules)
        expected = combo_label_oracle([(b.value, n.value) for b, n in facets])
        assert (labeled.perceptual_combo, labeled.norm_relation, labeled.level) == expected


def test_speed_joint_intersection_against_point_scan_oracle():
    rng = random.Random(99)
    for _ in range(300):
        k = rng.choice([2, 3, 4])
        bounds = []
        for _ in range(k):
            lo = rng.randint(0, 150)
            hi = rng.randint(lo, 200)
            bounds.append((lo, hi))
        rules = [
            make_rule(
                f"v{i}", action=ActionType.SPEED_LIMIT, norm=NormType.OBLIGATORY, speed=(lo, hi)
            )
            for i, (lo, hi) in enumerate(bounds)
        ]
        labeled = derive_labels(RuleCombo(members=tuple(r.id for r in rules)), rules)
        expect_conflict = speed_combo_conflict_oracle(bounds)
        assert (labeled.norm_relation == NormRelation.CONFLICT) == expect_conflict


# --- coexistence -----------------------------------------------------------


def test_tag_oracle_identical_rules_feasible():
    rule = make_rule("r1", tags=("road:tunnel", "weather:fog"))
    twin = make_rule("r2", tags=("road:tunnel", "weather:fog"))
    assert TagCoexistenceOracle().check([rule, twin]).feasible


def test_tag_oracle_exclusive_namespace_clash_infeasible():
    a = make_rule("r1", tags=("road:highway",))
    b = make_rule("r2", tags=("road:residential",))
    reply = TagCoexistenceOracle().check([a, b])
    assert not reply.feasible
    assert "road" in reply.reasoning


def test_tag_oracle_additive_namespaces_do_not_clash():
    a = make_rule("r1", tags=("agent:pedestrian",))
    b = make_rule("r2", tags=("agent:emergency_vehicle",))
    assert TagCoexistenceOracle().check([a, b]).feasible


def test_model_oracle_parses_verdict_and_keeps_reasoning():
    endpoint = StubEndpoint(reply="Output: 1.\nReasoning: fog and ice can occur together.")
    oracle = ModelCoexistenceOracle(endpoint)
    reply = oracle.check([make_rule("r1"), make_rule("r2", action=ActionType.OVERTAKE)])
    assert reply.feasible
    assert "fog and ice" in reply.reasoning


def test_validate_coexistence_sets_verdict():
    rules = [make_rule("r1", tags=("road:tunnel",)), make_rule("r2", tags=("road:bridge",))]
    combo = derive_labels(RuleCombo(members=("r1", "r2")), rules)
    checked = validate_coexistence(combo, rules, TagCoexistenceOracle())
    assert checked.coexistence == Coexistence.INFEASIBLE


def test_validate_coexistence_unparseable_defaults_infeasible_with_flag():
    rules = [make_rule("r1"), make_rule("r2")]
    combo = derive_labels(RuleCombo(members=("r1", "r2")), rules)
    oracle = ModelCoexistenceOracle(StubEndpoint(reply="hard to say"))
    checked = validate_coexistence(combo, rules, oracle, retry_budget=1)
    assert checked.coexistence == Coexistence.INFEASIBLE
    assert UNPARSEABLE_AUDIT_FLAG in checked.coexistence_note


def test_validate_coexistence_transport_failure_retried_then_raised():
    rules = [make_rule("r1"), make_rule("r2")]
    combo = derive_labels(RuleCombo(members=("r1", "r2")), rules)
    calls = {"n": 0}

    def flaky(request):
        calls["n"] += 1
        if calls["n"] < 3:
            raise EndpointError("connection reset")
        return "Output: 1. compatible"

    oracle = ModelCoexistenceOracle(StubEndpoint(reply=flaky))
    checked = validate_coexistence(combo, rules, oracle, retry_budget=2)
    assert checked.coexistence == Coexistence.FEASIBLE
    assert calls["n"] == 3

    calls["n"] = -10  # always failing now
    def dead(request):
        raise EndpointError("gone")

    with pytest.raises(EndpointError):
        validate_coexistence(combo, rules, ModelCoexistenceOracle(StubEndpoint(reply=dead)))


# --- hierarchy -------------------------------------------------------------


def _checked_combos(rules):
    index = rules_by_id(rules)
    oracle = TagCoexistenceOracle()
    combos = []
    for combo in generate_candidate_combos(rules, 2):
        combos.append(validate_coexistence(derive_labels(combo, index), index, oracle))
    return combos


def test_build_hierarchy_atomic_only():
    rules = [make_rule(f"r{i}", action=ActionType.YIELD, norm=NormType.OBLIGATORY) for i in range(3)]
    hierarchy = build_hierarchy(rules, [])
    assert len(hierarchy.by_level()[1]) == 3
    assert hierarchy.combos == ()


def test_build_hierarchy_keeps_only_feasible(china_rules):
    combos = _checked_combos(china_rules)
    feasible = [c for c in combos if c.coexistence == Coexistence.FEASIBLE]
    infeasible = [c for c in combos if c.coexistence == Coexistence.INFEASIBLE]
    assert feasible and infeasible
    hierarchy = build_hierarchy(china_rules, combos)
    kept = {c.member_set for c in hierarchy.combos}
    assert kept == {c.member_set for c in feasible}
    assert all(c.member_set not in kept for c in infeasible)


def test_build_hierarchy_level_partition_recount(china_rules):
    combos = _checked_combos(china_rules)
    hierarchy = build_hierarchy(china_rules, combos)
    by_level = hierarchy.by_level()
    # independent recount: filter the checked combos per level
    feasible = [c for c in combos if c.coexistence == Coexistence.FEASIBLE]
    for level in (2, 3, 4, 5):
        expected = {c.member_set for c in feasible if c.level == level}
        assert {c.member_set for c in by_level.get(level, [])} == expected
    assert len(by_level[1]) == len(china_rules)
    total = sum(len(v) for v in by_level.values())
    assert total == len(china_rules) + len(feasible)


def test_build_hierarchy_collapses_duplicate_member_sets():
    rules = [make_rule("r1"), make_rule("r2")]
    combo = derive_labels(RuleCombo(members=("r1", "r2")), rules)
    checked = validate_coexistence(combo, rules, TagCoexistenceOracle())
    reversed_combo = checked.__class__(
        members=("r2", "r1"),
        perceptual_combo=checked.perceptual_combo,
        norm_relation=checked.norm_relation,
        level=checked.level,
        coexistence=checked.coexistence,
    )
    hierarchy = build_hierarchy(rules, [checked, reversed_combo])
    assert len(hierarchy.combos) == 1


def test_build_hierarchy_rejects_unknown_ids():
    rules = [make_rule("r1"), make_rule("r2")]
    combo = derive_labels(RuleCombo(members=("r1", "r2")), rules)
    checked = validate_coexistence(combo, rules, TagCoexistenceOracle())
    with pytest.raises(HierarchyError, match="unknown rule ids"):
        build_hierarchy([rules[0]], [checked])


def test_hierarchy_export_load_round_trip(china_rules):
    combos = _checked_combos(china_rules)
    hierarchy = build_hierarchy(china_rules, combos)
    text = export_hierarchy(hierarchy)
    loaded = load_hierarchy(text)
    assert loaded == hierarchy
    assert export_hierarchy(loaded) == text


def test_fixture_corpus_reaches_all_five_levels(china_rules):
    combos = _checked_combos(china_rules)
    hierarchy = build_hierarchy(china_rules, combos)
    assert set(hierarchy.by_level()) >= {1, 2, 3, 4, 5}


def test_singleton_combo_shape():
    entry = singleton_combo(make_rule("r1"))
    assert entry.level == 1 and entry.size == 1
    assert entry.coexistence == Coexistence.FEASIBLE
