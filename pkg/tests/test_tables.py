import pytest

from permlr.automaton import MODIFIED, STANDARD, build_modified, build_standard
from permlr.grammar import END, EPSILON, augment, expand_grammar, load_grammar, parse_grammar, parse_phrase
from permlr.items import Item, render_item
from permlr.tables import (Action, build_lalr, build_lr1, build_lr1_automaton, build_slr, build_table, dump_jsonl,
                           dump_text, first, first_follow, lr1_closure, merge_lalr, textbook_first_follow,
                           textbook_lr1_closure)


def test_first_basics():
    g = parse_grammar("S -> << a || b >> c ;")
    ff = first_follow(g)
    assert first(ff, ()) == {EPSILON}
    assert first(ff, parse_phrase("<< a || b >> c")) == {"a", "b"}


def test_first_of_permutation_needs_every_element_nullable():
    g = parse_grammar("S -> << A || B >> c ; A -> a | %empty ; B -> b ;")
    ff = first_follow(g)
    assert first(ff, parse_phrase("<< A || B >>")) == {"a", "b"}
    assert first(ff, "S") == {"a", "b"}
    g2 = parse_grammar("S -> << A || B >> c ; A -> a | %empty ; B -> b | %empty ;")
    assert first(first_follow(g2), parse_phrase("<< A || B >>")) == {"a", "b", EPSILON}


def test_json_first_and_follow(json_grammar):
    ff = first_follow(json_grammar)
    members = {"addressId", "homeAddress", "street", "number", "city", "code"}
    assert first(ff, "addressesItem") == members
    assert ff.follow["id"] >= {"name"}
    assert ff.follow["id"] >= first(ff, "addresses") - {EPSILON}
    assert ff.follow["catalog"] == {END, "id", "name"} | members
    assert ff.nullable("addresses") and not ff.nullable("catalog")


def test_follow_of_single_rule():
    ff = first_follow(parse_grammar("S -> a ;"))
    assert ff.follow["S"] == {END}


def test_follow_includes_lhs_follow_at_the_end():
    g = parse_grammar("S -> X z ; X -> << Y || w >> ; Y -> y ;")
    ff = first_follow(g)
    assert ff.follow["Y"] >= ff.follow["X"]
    assert ff.follow["Y"] == {"w", "z"}


def test_first_follow_agree_with_expansion(json_grammar):
    ff = first_follow(json_grammar)
    tb = textbook_first_follow(expand_grammar(json_grammar))
    assert ff.first == tb.first
    assert ff.follow == tb.follow


def test_expression_slr(expr_grammar):
    t = build_slr(build_standard(expr_grammar))
    assert t.deterministic
    assert t.action_set(0, "id") == {Action("shift", 4)}  # breadth-first, symbols sorted
    assert build_slr(build_modified(expr_grammar)).actions == t.actions


def test_ambiguous_grammar_has_conflict(grammar_path):
    t = build_slr(build_modified(load_grammar(grammar_path("ambiguous.g"))))
    assert not t.deterministic
    kinds = [{a.kind for a in acts} for _, _, acts in t.conflicts]
    assert {"shift", "reduce"} in kinds
    assert all(len(acts) > 1 for _, _, acts in t.conflicts)


def test_json_tables_are_conflicted(json_grammar):
    # addresses -> %empty makes the catalog of items ambiguous
    for kind in ("slr", "lr1", "lalr"):
        assert not build_table(json_grammar, kind).deterministic


def test_accept_cell(expr_grammar):
    t = build_slr(build_modified(expr_grammar))
    q = t.automaton.run(["E"])
    assert Action("accept") in t.action_set(q, END)


def test_lr1_closure_lookaheads_from_remaining_elements():
    g = augment(parse_grammar("S -> << A || b >> ; A -> a ;"))
    items = lr1_closure(g, {Item(g.rule(0), 0, None, END)})
    assert {render_item(i) for i in items} == {
        "[S' -> .(1) S, $end]", "[S -> .(1) <<A || b>>, $end]", "[A -> .(1) a, b]"}


def test_lr1_closure_plain_grammar_matches_textbook(grammar_path):
    g = augment(load_grammar(grammar_path("cc.g")))
    start = {Item(g.rule(0), 0, None, END)}
    assert lr1_closure(g, start) == textbook_lr1_closure(g, start)
    closed = lr1_closure(g, start)
    assert lr1_closure(g, closed) == closed


def test_canonical_lr1_state_counts(grammar_path):
    g = load_grammar(grammar_path("cc.g"))
    for construction in (MODIFIED, STANDARD):
        a = build_lr1_automaton(g, construction)
        assert a.size == 10
        assert merge_lalr(a).size == 7
    assert build_lr1(g).deterministic and build_lalr(g).deterministic


def test_json_lalr_not_larger_than_lr1(json_grammar):
    a = build_lr1_automaton(json_grammar)
    assert merge_lalr(a).size <= a.size
    assert merge_lalr(a).size == build_modified(json_grammar).size


def test_lalr_requires_lr1_table_kinds(expr_grammar):
    with pytest.raises(ValueError):
        build_slr(build_lr1_automaton(expr_grammar))
    with pytest.raises(ValueError):
        build_table(expr_grammar, "lr2")


def test_dumps(expr_grammar):
    t = build_slr(build_modified(expr_grammar))
    text = dump_text(t)
    assert "state 0" in text and "ACTION id" in text and "GOTO   E" in text
    lines = dump_jsonl(t).splitlines()
    assert '{"state": 0, "symbol": "id", "actions": ["s4"]}' in lines


def test_conflict_dump_has_items(grammar_path):
    t = build_slr(build_modified(load_grammar(grammar_path("ambiguous.g"))))
    text = dump_text(t)
    assert "conflicts:" in text and "E -> E plus E .(1)" in text


def test_standard_reduce_origins(json_grammar):
    t = build_table(json_grammar, "slr", STANDARD)
    reduces = {a for acts in t.actions.values() for a in acts if a.kind == "reduce"}
    assert {o for a in reduces for o in t.origins(a)} == {1, 2, 3, 4, 5, 6}
