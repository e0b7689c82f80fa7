import json

import pytest

from permlr.automaton import build_modified, build_standard
from permlr.grammar import Rule, expand_grammar, expand_phrase, load_grammar, parse_grammar, parse_phrase
from permlr.items import prefix, prefix_length
from permlr.oracle import (PathIndex, build_pair, check_equivalence, complexity_bounds, count_rule_states,
                           faulty_step, format_reports, format_reports_jsonl, grammar_report,
                           independence_violations, is_independent, map_state, paths, rule_bounds, rule_states,
                           start_states, union_rule_states)


@pytest.fixture(scope="module")
def json_report(json_grammar):
    return grammar_report(json_grammar)


@pytest.fixture(scope="module")
def abc():
    g = parse_grammar("S -> << A || B || C >> ; A -> a ; B -> b ; C -> c ;")
    return g, build_modified(g), build_standard(expand_grammar(g))


def test_paths_single_step():
    a = build_modified(parse_grammar("S -> a b ;"))
    q = a.run(["a"])
    assert paths(a, q) == {("a",)}


def test_paths_cover_all_orders(abc):
    g, a, _ = abc
    q = a.run(["A", "B", "C"])
    three = {w for w in paths(a, q) if len(w) == 3}
    assert three == expand_phrase(parse_phrase("<< A || B || C >>"))


def test_paths_are_suffix_closed(json_grammar):
    a = build_modified(json_grammar)
    index = PathIndex(a)
    for s in a.states[:-1]:
        ps = index.paths(s.id)
        for w in ps:
            for k in range(1, len(w)):
                assert w[k:] in ps


def test_json_rules_independent(json_grammar):
    a = build_modified(json_grammar)
    assert is_independent(a, json_grammar.rule(3))
    assert is_independent(a, json_grammar.rule(6))


def test_interfering_rule_is_dependent(grammar_path):
    g = load_grammar(grammar_path("interfering.g"))
    a = build_modified(g)
    verdict = {r.id: is_independent(a, r) for r in g.rules}
    assert verdict == {r.id: r.lhs != "X" for r in g.rules}
    violations = independence_violations(a, g.rule(3))
    assert violations and all(missing for _, _, missing in violations)


def test_plain_rule_independent(expr_grammar):
    a = build_modified(expr_grammar)
    assert all(is_independent(a, r) for r in expr_grammar.rules)


def test_independence_needs_modified_automaton(expr_grammar):
    with pytest.raises(ValueError):
        is_independent(build_standard(expr_grammar), expr_grammar.rules[0])


def test_prefix_paths_on_every_fixture(grammar_path):
    for name in ("json.g", "interfering.g", "record.g", "twoperm.g", "expr.g"):
        g = load_grammar(grammar_path(name))
        a = build_modified(g)
        index = PathIndex(a)
        for r in g.rules:
            independence_violations(a, r, index)  # raises if an input is not an expansion
        for s in a.states[:-1]:
            for it in s.items:
                n = prefix_length(it)
                if n and it.rule.id:
                    assert index.ending(s.id, n) <= expand_phrase(prefix(it))


def test_json_rule_states(json_report):
    _, _, reports = json_report
    by_rule = {r.rule: r for r in reports}
    assert (by_rule[3].modified_count, by_rule[3].expanded_count) == (8, 16)
    assert (by_rule[6].modified_count, by_rule[6].expanded_count) == (64, 1957)
    assert (by_rule[3].bound_modified, by_rule[3].bound_expanded) == (8, 16)
    assert (by_rule[6].bound_modified, by_rule[6].bound_expanded) == (64, 1957)
    assert by_rule[3].independent and by_rule[6].independent


def test_json_rule_entered_from_several_states(json_report):
    a, a_e, reports = json_report
    r3 = next(r for r in reports if r.rule == 3)
    assert len(r3.per_start_modified) == 2
    assert set(r3.per_start_modified.values()) == {8}
    assert r3.union_modified == 9 and r3.union_expanded == 17


def test_complexity_bounds():
    (seg,) = complexity_bounds(Rule(1, "S", parse_phrase("<< a || b || c >>")))
    assert (seg.modified_max, seg.expanded_min, seg.multiplier) == (8, 16, 1)
    assert seg.modified_steps == 7
    (seg6,) = complexity_bounds(Rule(1, "S", parse_phrase("<< a || b || c || d || e || f >>")))
    assert seg6.expanded_min == 1 + 6 + 30 + 120 + 360 + 720 + 720 == 1957
    first, second = complexity_bounds(Rule(1, "X", parse_phrase("<< A || B >> << C || D >>")))
    assert (first.multiplier, second.multiplier) == (1, 2)
    assert second.expanded_min == 2 * 5


def test_two_segment_rule_counts(grammar_path):
    g = load_grammar(grammar_path("twoperm.g"))
    a, a_e, (report,) = grammar_report(g)
    # the trailing e follows 2! * 2! orderings in the expansion
    assert rule_bounds(g.rule(1)) == (1 + 3 + 3 + 1, 1 + 4 + 2 * 4 + 4)
    assert report.modified_count == 8 and report.expanded_count == 17
    assert report.independent


def test_rule_states_without_expanded(json_grammar):
    a = build_modified(json_grammar)
    report = rule_states(a, json_grammar.rule(6))
    assert report.expanded_count is None and report.modified_count == 64


def test_start_states(json_grammar):
    a = build_modified(json_grammar)
    assert start_states(a, json_grammar.rule(3))[0] == 0
    assert union_rule_states(a, json_grammar.rule(1)) == len(set(count_rule_states(a, json_grammar.rule(1)))) + 1


def test_reports_output(json_report):
    _, _, reports = json_report
    text = format_reports(reports)
    assert "1957" in text and "catalogItem" in text
    records = [json.loads(line) for line in format_reports_jsonl(reports).splitlines()]
    assert records[1] == {"rule": 6, "modified": 64, "expanded": 1957, "bound_modified": 64,
                          "bound_expanded": 1957, "independent": True}
    assert "\033[" in format_reports(reports, color=True)
    assert format_reports([]) == "no permutation rules\n"


def test_map_error_state(abc):
    _, a, a_e = abc
    assert map_state(a, a_e, a.error, ("A",)) == a_e.error


def test_map_initial_state(abc):
    _, a, a_e = abc
    assert map_state(a, a_e, a.initial, ()) == a_e.initial


def test_map_splits_after_permutation(abc):
    _, a, a_e = abc
    q = a.run(["A", "B", "C"])
    targets = {map_state(a, a_e, q, w) for w in expand_phrase(parse_phrase("<< A || B || C >>"))}
    assert len(targets) == 6
    for w in expand_phrase(parse_phrase("<< A || B || C >>")):
        assert map_state(a, a_e, q, w) == a_e.run(w)


def test_map_agrees_with_runs(json_grammar):
    a = build_modified(json_grammar)
    a_e = build_standard(expand_grammar(json_grammar))
    for w in [("id",), ("name", "addresses"), ("id", "name", "addressId", "city"), ("catalog", "id")]:
        assert map_state(a, a_e, a.run(w), w) == a_e.run(w)


@pytest.mark.parametrize("table", ["slr", "lr1", "lalr"])
def test_json_equivalence(json_grammar, table):
    report = check_equivalence(json_grammar, 6, table, name="json")
    assert report.ok, str(report)
    assert report.map_checked and report.explored > 0
    assert report.words == sum(len(build_modified(json_grammar).alphabet) ** k for k in range(7))


def test_plain_grammar_equivalence(expr_grammar):
    report = check_equivalence(expr_grammar, 6)
    assert report.ok and report.states_modified == report.states_expanded


@pytest.mark.parametrize("fault", ["stuck-exit", "stale-seen"])
def test_checker_catches_faults(json_grammar, fault):
    pair = build_pair(json_grammar, "slr", faulty_step(fault))
    report = check_equivalence(json_grammar, 8, pair=pair)
    assert not report.ok
    assert report.action_mismatches > 0
    assert report.details


def test_faulty_step_rejects_unknown_kind():
    with pytest.raises(ValueError):
        faulty_step("nonsense")


def test_sampling_mode(grammar_path):
    g = load_grammar(grammar_path("record.g"))
    report = check_equivalence(g, 4, samples=200, seed=1)
    assert report.ok


def test_report_text_and_record(expr_grammar):
    report = check_equivalence(expr_grammar, 3, name="expr")
    assert "acceptance mismatches: 0" in str(report)
    assert report.record()["grammar"] == "expr"


def test_lalr_merging_can_add_lookaheads():
    # one modified core stands for several expanded cores; merging by it unions their lookaheads
    g = parse_grammar("S -> d ; P -> d << b || f >> ; S -> << c || P || S >> << P || a >> ; P -> a ;")
    assert check_equivalence(g, 5, "lr1").ok
    strict = check_equivalence(g, 5, "lalr")
    assert strict.action_mismatches and not strict.map_violations
    covers = check_equivalence(g, 5, "lalr", relation="covers")
    assert covers.ok and covers.terminal_words > 0


def test_relation_is_validated(expr_grammar):
    with pytest.raises(ValueError):
        check_equivalence(expr_grammar, 2, relation="roughly")
