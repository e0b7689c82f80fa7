"""
End-to-end acceptance checks, one test per criterion.

Run with ``pytest tests/test_acceptance.py`` (a PASS/FAIL line per criterion is
printed in the terminal summary) or directly with ``python tests/test_acceptance.py``.
"""

import itertools
import math
import sys
import time
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gen import random_grammars
from permlr.automaton import build_modified, build_standard
from permlr.grammar import expand_grammar, load_grammar, parse_grammar
from permlr.oracle import MAP_BUDGET, check_equivalence, grammar_report, is_independent, rule_states
from permlr.runtime import Recognizer, parse
from permlr.tables import build_lr1_automaton, build_slr, first_follow, merge_lalr, textbook_first_follow
from test_properties import PROPERTIES

GRAMMARS = Path(__file__).parent / "grammars"
PLAIN = ["expr.g", "paren.g", "list.g", "stmt.g", "decl.g", "cc.g", "ambiguous.g"]
INVALID = {"bad.g", "nested.g"}
FIXTURES = sorted(p.name for p in GRAMMARS.glob("*.g") if p.name not in INVALID)

pytestmark = pytest.mark.acceptance


def fixture(name):
    return load_grammar(GRAMMARS / name)


def bijection(a, b):
    """A transition-preserving state bijection from ``a`` onto ``b``, or None."""
    if a.size != b.size or a.alphabet != b.alphabet:
        return None
    m = {a.initial: b.initial, a.error: b.error}
    todo = [a.initial]
    while todo:
        q = todo.pop()
        for sym in a.alphabet:
            r, r_b = a.delta(q, sym), b.delta(m[q], sym)
            if r in m:
                if m[r] != r_b:
                    return None
            else:
                m[r] = r_b
                todo.append(r)
    if len(m) != len(a.states) or len(set(m.values())) != len(m):
        return None
    return m


# 1 ---------------------------------------------------------------------------

@pytest.mark.criterion(1, "JSON rule-state counts 8/64 vs 16/1957")
def test_json_rule_counts():
    start = time.perf_counter()
    _, _, reports = grammar_report(fixture("json.g"))
    by_rule = {r.rule: r for r in reports}
    got = {k: (by_rule[k].modified_count, by_rule[k].expanded_count) for k in (3, 6)}
    assert got == {3: (8, 16), 6: (64, 1957)}
    assert by_rule[6].expanded_count == sum(math.perm(6, k) for k in range(7))
    assert time.perf_counter() - start < 30


# 2 ---------------------------------------------------------------------------

@pytest.mark.criterion(2, "scaling 2^n vs sum n!/(n-k)! for n = 1..8")
def test_scaling_law():
    start = time.perf_counter()
    for n in range(1, 9):
        g = parse_grammar("S -> << %s >> ;" % " || ".join("t%d" % i for i in range(1, n + 1)))
        report = rule_states(build_modified(g), g.rule(1), build_standard(expand_grammar(g)))
        assert report.modified_count == 2 ** n, n
        assert report.expanded_count == sum(math.perm(n, k) for k in range(n + 1)), n
    assert report.expanded_count == 109_601
    assert time.perf_counter() - start < 60


# 3 ---------------------------------------------------------------------------

GENERATED = random_grammars(7, 20, max_rules=8, max_perm=4, n_terminals=6)


def _equivalent(g, name):
    report = check_equivalence(g, 8, "slr", name=name)
    assert report.ok, str(report)
    assert report.map_checked == (report.states_expanded < MAP_BUDGET)
    return report


@pytest.mark.criterion(3, "behavioral equivalence, words up to length 8")
def test_equivalence_json():
    report = _equivalent(fixture("json.g"), "json")
    assert report.map_checked


@pytest.mark.criterion(3, "behavioral equivalence, words up to length 8")
@pytest.mark.parametrize("index", range(len(GENERATED)))
def test_equivalence_generated(index):
    text, g = GENERATED[index]
    assert len(g.rules) <= 8 and len(g.terminals) <= 6
    _equivalent(g, "generated-%d" % index)


def test_generated_set_is_large_enough():
    assert len(GENERATED) >= 20
    assert all(g.has_permutations for _, g in GENERATED)


# 4 ---------------------------------------------------------------------------

def _suite(g, max_len=5):
    terms = sorted(g.terminals)
    for k in range(max_len + 1):
        yield from itertools.product(terms, repeat=k)


@pytest.mark.criterion(4, "permutation-free grammars give isomorphic automata")
@pytest.mark.parametrize("name", PLAIN)
def test_degenerate_isomorphism(name):
    g = fixture(name)
    assert not g.has_permutations
    a, a_e = build_modified(g), build_standard(g)
    assert a.size == a_e.size
    assert bijection(a, a_e) is not None
    t, t_e = build_slr(a), build_slr(a_e)
    if t.deterministic:
        for w in _suite(g):
            r, r_e = parse(t, w), parse(t_e, w)
            assert r.accepted == r_e.accepted, w
            assert [str(e) for e in r.events] == [str(e) for e in r_e.events], w
    else:
        rec, rec_e = Recognizer(t), Recognizer(t_e)
        for w in _suite(g):
            assert rec.recognize(w) == rec_e.recognize(w), w


# 5 ---------------------------------------------------------------------------

@pytest.mark.criterion(5, "modified never larger; only the interfering rule dependent")
@pytest.mark.parametrize("name", FIXTURES)
def test_worst_case_bound(name):
    g = fixture(name)
    a = build_modified(g)
    a_e = build_standard(expand_grammar(g))
    assert a.size <= a_e.size
    dependent = {r.lhs for r in a.grammar.rules if not is_independent(a, r)}
    assert dependent == ({"X"} if name == "interfering.g" else set())


# 6 ---------------------------------------------------------------------------

@pytest.mark.criterion(6, "FIRST/FOLLOW agree with the expanded grammar")
@pytest.mark.parametrize("name", FIXTURES)
def test_first_follow_consistency(name):
    g = fixture(name)
    ff, tb = first_follow(g), textbook_first_follow(expand_grammar(g))
    assert ff.first == tb.first
    assert ff.follow == tb.follow


# 7 ---------------------------------------------------------------------------

@pytest.mark.criterion(7, "JSON LR(1) and LALR parity, words up to length 8")
@pytest.mark.parametrize("table", ["lr1", "lalr"])
def test_json_lr1_lalr_parity(table):
    g = fixture("json.g")
    report = check_equivalence(g, 8, table, name="json")
    assert report.ok, str(report)
    for construction in ("modified", "standard"):
        a = build_lr1_automaton(g, construction)
        assert merge_lalr(a).size <= a.size


# 8 ---------------------------------------------------------------------------

CASES = 1000


def _run_property(check, strategies):
    calls = [0]

    @settings(max_examples=CASES, deadline=None, database=None)
    @given(st.tuples(*strategies))
    def run(args):
        calls[0] += 1
        check(*args)

    run()
    return calls[0]


@pytest.mark.criterion(8, "property suites, 1000 cases each, under 60 s")
def test_property_suites():
    start = time.perf_counter()
    counts = {name: _run_property(check, strategies) for name, (check, strategies) in PROPERTIES.items()}
    elapsed = time.perf_counter() - start
    print("property cases:", counts, "in %.1fs" % elapsed)
    assert len(counts) == 5
    assert all(n >= CASES for n in counts.values()), counts
    assert elapsed < 60


if __name__ == "__main__":
    # hypothesis is already imported here, which pytest would warn about
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider", "-W", "ignore::pytest.PytestAssertRewriteWarning"]))
