"""
Correctness and state-complexity checks relating the modified automaton ``A``
(built over a grammar with permutation phrases) to the standard automaton
``A_e`` (built over its expansion).

* :func:`paths` / :func:`is_independent` -- which inputs can lead into a state,
  and whether a permutation rule ever has to split states to tell orderings apart.
* :func:`rule_states` / :func:`complexity_bounds` -- how many states each
  automaton spends on one rule, against the closed-form bounds
  ``2**n`` and ``sum_{k=0}^{n} n!/(n-k)!``.
* :func:`map_state` / :func:`check_equivalence` -- run both automata over all
  short words and confirm that they reach corresponding states and choose the
  same actions, reduces being compared through the rule they came from.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field

from .automaton import MODIFIED, STANDARD, Automaton, BudgetExceeded, build_modified, build_standard
from .grammar import END, Grammar, Perm, Rule, expand_grammar, expand_phrase, iter_expansions, require_valid
from .items import Item, next_symbols, pop_count, prefix, prefix_length, remainder, step
from .runtime import Recognizer
from .tables import ParseTable, build_lr1_table, build_lr1_automaton, build_slr, merge_lalr

MAP_BUDGET = 10_000
MISMATCH_CAP = 1000  # stop exploring once a check is clearly broken


###############################################################################
# Input paths and independence
###############################################################################

class PathIndex:
    """
    Backward traversal of an automaton. ``ending(q, n)`` is the set of strings
    of length exactly ``n`` that lead into ``q`` from some state; results are
    memoised per ``(state, length)``.
    """

    def __init__(self, a: Automaton):
        self.automaton = a
        self._memo = {}

    def ending(self, q: int, n: int) -> frozenset:
        if n == 0:
            return frozenset({()})
        key = (q, n)
        got = self._memo.get(key)
        if got is None:
            out = set()
            for source, sym in self.automaton.predecessors[q]:
                if source == self.automaton.error:
                    continue
                for w in self.ending(source, n - 1):
                    out.add(w + (sym,))
            got = self._memo[key] = frozenset(out)
        return got

    def max_prefix(self, q: int) -> int:
        return max((prefix_length(i) for i in self.automaton.states[q].items), default=0)

    def paths(self, q: int) -> frozenset:
        out = set()
        for n in range(1, self.max_prefix(q) + 1):
            out |= self.ending(q, n)
        return frozenset(out)


def paths(a: Automaton, q: int, index: PathIndex | None = None) -> frozenset:
    """Non-empty strings of length at most the longest pre-dot phrase in ``q`` that lead into ``q``."""
    return (index or PathIndex(a)).paths(q)


def suffixes(strings, n: int) -> set:
    """Length-``n`` suffixes of the strings at least that long."""
    return {w[len(w) - n:] for w in strings if len(w) >= n}


def _rule_matches(a: Automaton, item: Item, rule: Rule) -> bool:
    if a.construction == STANDARD:
        return rule.id in item.rule.origins
    return item.rule.id == rule.id


def independence_violations(a: Automaton, rule: Rule, index: PathIndex | None = None) -> list:
    """
    ``(state, item, missing)`` for each item of ``rule`` whose state is not
    entered by every expansion of the phrase before its dot.

    Also checks the weaker property that always holds: every such input is an
    expansion of that phrase. A failure there is a construction bug and raises.
    """
    index = index or PathIndex(a)
    out = []
    for s in a.states:
        for it in s.items:
            if it.rule.id != rule.id:
                continue
            n = prefix_length(it)
            if n == 0:
                continue
            seen = index.ending(s.id, n)
            allowed = expand_phrase(prefix(it))
            if not seen <= allowed:
                raise AssertionError("state %d: inputs %s are not expansions of the prefix of %s"
                                     % (s.id, sorted(seen - allowed)[:3], it))
            if seen != allowed:
                out.append((s.id, it, allowed - seen))
    return out


def is_independent(a: Automaton, rule: Rule, index: PathIndex | None = None) -> bool:
    if a.construction != MODIFIED:
        raise ValueError("independence is a property of the modified automaton")
    return not independence_violations(a, rule, index)


###############################################################################
# Rule state counts and bounds
###############################################################################

def _layers(a: Automaton, rule: Rule, start: int) -> list:
    layers = [{start}]
    for k in range(1, pop_count(rule) + 1):
        nxt = set()
        for q in layers[-1]:
            for it in a.states[q].items:
                if not _rule_matches(a, it, rule) or prefix_length(it) != k - 1:
                    continue
                for sym in _next_of(a, it):
                    nxt.add(a.delta(q, sym))
        layers.append(nxt)
    return layers


def _next_of(a, it):
    if a.construction == MODIFIED:
        return next_symbols(it)
    rhs = it.rule.rhs
    return (rhs[it.pos],) if it.pos < len(rhs) else ()


def start_states(a: Automaton, rule: Rule) -> list:
    """States holding a dot-at-start item of ``rule`` (or of its expansions)."""
    return [s.id for s in a.states
            if any(_rule_matches(a, it, rule) and prefix_length(it) == 0 for it in s.items)]


def count_rule_states(a: Automaton, rule: Rule) -> dict:
    """
    For each start state: the number of distinct states passed through while
    matching ``rule`` from there, the start state included.
    """
    out = {}
    for q in start_states(a, rule):
        out[q] = len(set().union(*_layers(a, rule, q)))
    return out


def union_rule_states(a: Automaton, rule: Rule) -> int:
    total = set()
    for q in start_states(a, rule):
        total |= set().union(*_layers(a, rule, q))
    return len(total)


@dataclass
class SegmentBound:
    index: int  # segment position in the right-hand side
    size: int
    multiplier: int  # product of n! over earlier permutation segments
    modified_max: int  # 2**n, counting the state before the segment
    expanded_min: int  # multiplier * sum_{k=0}^{n} P(n, k)

    @property
    def modified_steps(self) -> int:
        """States strictly inside/after the segment: sum_{k=1}^{n} C(n, k) = 2**n - 1."""
        return sum(math.comb(self.size, k) for k in range(1, self.size + 1))

    @property
    def expanded_steps(self) -> int:
        return self.multiplier * sum(math.perm(self.size, k) for k in range(1, self.size + 1))


def complexity_bounds(rule: Rule) -> list:
    """Closed-form per-segment bounds for an independent rule."""
    out, m = [], 1
    for i, seg in enumerate(rule.rhs):
        if isinstance(seg, Perm):
            n = len(seg)
            out.append(SegmentBound(i, n, m, 2 ** n, m * sum(math.perm(n, k) for k in range(n + 1))))
            m *= math.factorial(n)
    return out


def rule_bounds(rule: Rule) -> tuple:
    """
    ``(modified upper bound, expanded lower bound)`` on states processing the
    whole rule from one start state, for an independent rule.
    """
    hi, lo, m = 1, 1, 1
    for seg in rule.rhs:
        if isinstance(seg, Perm):
            n = len(seg)
            hi += 2 ** n - 1
            lo += m * sum(math.perm(n, k) for k in range(1, n + 1))
            m *= math.factorial(n)
        else:
            hi += 1
            lo += m
    return hi, lo


@dataclass
class RuleStateReport:
    rule: int
    lhs: str
    modified_count: int
    expanded_count: int | None
    bound_modified: int
    bound_expanded: int
    independent: bool
    per_start_modified: dict = field(default_factory=dict)
    per_start_expanded: dict = field(default_factory=dict)
    union_modified: int = 0
    union_expanded: int | None = None
    segments: list = field(default_factory=list)

    def record(self) -> dict:
        return {"rule": self.rule, "modified": self.modified_count, "expanded": self.expanded_count,
                "bound_modified": self.bound_modified, "bound_expanded": self.bound_expanded,
                "independent": self.independent}


def rule_states(a: Automaton, rule: Rule, a_e: Automaton | None = None,
                index: PathIndex | None = None) -> RuleStateReport:
    """
    State counts for ``rule`` in ``a`` (and ``a_e`` if given). The headline
    count uses the lowest-numbered start state; per-start and union counts are
    kept alongside for rules entered from several states.
    """
    per = count_rule_states(a, rule)
    per_e = count_rule_states(a_e, rule) if a_e is not None else {}
    hi, lo = rule_bounds(rule)
    return RuleStateReport(
        rule=rule.id, lhs=rule.lhs,
        modified_count=per[min(per)] if per else 0,
        expanded_count=(per_e[min(per_e)] if per_e else 0) if a_e is not None else None,
        bound_modified=hi, bound_expanded=lo,
        independent=is_independent(a, rule, index),
        per_start_modified=per, per_start_expanded=per_e,
        union_modified=union_rule_states(a, rule),
        union_expanded=union_rule_states(a_e, rule) if a_e is not None else None,
        segments=complexity_bounds(rule),
    )


def grammar_report(g: Grammar, with_expanded: bool = True) -> tuple:
    """Build both automata and report every permutation rule; returns ``(A, A_e, reports)``."""
    a = build_modified(g)
    a_e = build_standard(expand_grammar(g)) if with_expanded else None
    index = PathIndex(a)
    reports = [rule_states(a, r, a_e, index) for r in a.grammar.rules if r.is_permutation_rule]
    return a, a_e, reports


def estimate_expanded_states(g: Grammar) -> int:
    """Cheap lower bound on the expanded automaton's size, from the per-rule bounds."""
    return sum(rule_bounds(r)[1] - 1 for r in g.rules) + 1


###############################################################################
# The map relation
###############################################################################

class MapViolation(RuntimeError):
    pass


def _matches(p, w) -> bool:
    """Is the symbol tuple ``w`` an expansion of the (single-symbol-element) phrase ``p``?"""
    at = 0
    for seg in p:
        if isinstance(seg, str):
            if at >= len(w) or w[at] != seg:
                return False
            at += 1
        else:
            n = len(seg)
            chunk = w[at:at + n]
            if len(chunk) != n or {(x,) for x in chunk} != seg.elements:
                return False
            at += n
    return at == len(w)


class Mapper:
    """Maps items and states of ``A`` to the expanded automaton ``A_e`` along an input."""

    def __init__(self, a: Automaton, a_e: Automaton):
        self.a, self.a_e = a, a_e
        self.rules = {(r.lhs, r.rhs): r for r in a_e.grammar.rules}
        self._after = {}
        self._cores = None

    def _by_core(self) -> dict:
        if self._cores is None:
            self._cores = {frozenset(i.core for i in s.items): s.id for s in self.a_e.states}
        return self._cores

    def _expansions_after(self, item: Item):
        key = item.core
        got = self._after.get(key)
        if got is None:
            got = self._after[key] = tuple(iter_expansions(remainder(item)))
        return got

    def map_item(self, item: Item, w: tuple) -> set:
        n = prefix_length(item)
        if n > len(w):
            return set()
        alpha = w[len(w) - n:]
        if not _matches(prefix(item), alpha):
            return set()
        out = set()
        for beta in self._expansions_after(item):
            rule = self.rules.get((item.rule.lhs, alpha + beta))
            if rule is None:
                raise MapViolation("no expanded rule %s -> %s" % (item.rule.lhs, " ".join(alpha + beta)))
            out.add(Item(rule, n, None, item.lookahead))
        return out

    def map_items(self, q: int, w: tuple) -> frozenset:
        out = set()
        for it in self.a.states[q].items:
            out |= self.map_item(it, w)
        return frozenset(out)

    def map_state(self, q: int, w: tuple) -> int:
        a, a_e = self.a, self.a_e
        w = tuple(w)
        if q == a.error:
            return a_e.error
        if w and not any(sym == w[-1] for _, sym in a.predecessors[q]):
            return a_e.error  # no suffix of w is an input path of q
        items = self.map_items(q, w)
        if a.kind == "lalr":
            # merged lookaheads need not line up; LALR states are unique per core anyway
            target = self._by_core().get(frozenset(i.core for i in items))
        else:
            target = a_e.by_items.get(items)
        if target is None:
            raise MapViolation("state %d under %s maps to no state of the expanded automaton"
                               % (q, " ".join(w) or "the empty word"))
        return target


def map_state(a: Automaton, a_e: Automaton, q: int, w) -> int:
    return Mapper(a, a_e).map_state(q, w)


###############################################################################
# Behavioural equivalence
###############################################################################

@dataclass
class EquivalenceReport:
    grammar: str
    table: str
    max_len: int
    words: int = 0  # every word over the alphabet up to max_len is covered
    explored: int = 0  # distinct (state pair, recent input) nodes actually visited
    terminal_words: int = 0
    acceptance_mismatches: int = 0
    action_mismatches: int = 0
    map_violations: int = 0
    map_checked: bool = False
    states_modified: int = 0
    states_expanded: int = 0
    details: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not (self.acceptance_mismatches or self.action_mismatches or self.map_violations)

    def note(self, text: str):
        if len(self.details) < 20:
            self.details.append(text)

    def record(self) -> dict:
        return {"grammar": self.grammar, "table": self.table, "max_len": self.max_len,
                "words": self.words, "explored": self.explored, "terminal_words": self.terminal_words,
                "acceptance_mismatches": self.acceptance_mismatches,
                "action_mismatches": self.action_mismatches, "map_violations": self.map_violations,
                "map_checked": self.map_checked, "states_modified": self.states_modified,
                "states_expanded": self.states_expanded}

    def __str__(self):
        lines = [
            "grammar %s, %s tables, words up to length %d" % (self.grammar, self.table, self.max_len),
            "  automaton states: modified %d, expanded %d" % (self.states_modified, self.states_expanded),
            "  words covered: %d (%d nodes explored), terminal words: %d"
            % (self.words, self.explored, self.terminal_words),
            "  acceptance mismatches: %d" % self.acceptance_mismatches,
            "  action mismatches: %d" % self.action_mismatches,
            "  map violations: %d%s" % (self.map_violations, "" if self.map_checked else " (not checked)"),
        ]
        lines += ["  " + d for d in self.details]
        return "\n".join(lines) + "\n"


def build_pair(g: Grammar, table: str = "slr", step_fn=None, budget: int | None = None) -> tuple:
    """Modified and standard tables of the requested kind for ``g``."""
    require_valid(g)
    if table == "slr":
        a = build_modified(g, step_fn=step_fn)
        a_e = build_standard(expand_grammar(g), max_states=budget)
        return build_slr(a), build_slr(a_e)
    if budget is not None and estimate_expanded_states(g) >= budget:
        raise BudgetExceeded("expanded automaton would exceed %d states" % budget)
    a = build_lr1_automaton(g, MODIFIED, step_fn=step_fn)
    a_e = build_lr1_automaton(g, STANDARD)
    if table == "lalr":
        a, a_e = merge_lalr(a), merge_lalr(a_e)
    elif table != "lr1":
        raise ValueError("unknown table kind %r" % table)
    return build_lr1_table(a), build_lr1_table(a_e)


def _normal_actions(t: ParseTable, q: int, term: str, w: tuple, mismatch) -> frozenset:
    out = set()
    for act in t.action_set(q, term):
        if act.kind == "shift":
            out.add(("shift",))
        elif act.kind == "reduce":
            rule = t.grammar.rule(act.arg)
            if t.automaton.construction == STANDARD:
                n = len(rule.rhs)
                if n > len(w) or tuple(w[len(w) - n:]) != rule.rhs:
                    mismatch("standard reduce %s does not match the input tail" % rule)
                for origin in rule.origins:
                    out.add(("reduce", origin))
            else:
                out.add(("reduce", rule.id))
        else:
            out.add((act.kind,))
    return frozenset(out)


def check_equivalence(g: Grammar, max_len: int = 8, table: str = "slr", *, name: str = "grammar",
                      verify_map: bool | None = None, budget: int = MAP_BUDGET, step_fn=None,
                      samples: int = 0, seed: int = 0, pair: tuple | None = None,
                      relation: str = "equal") -> EquivalenceReport:
    """
    Compare the modified and standard pipelines on every word over the grammar
    alphabet up to ``max_len`` symbols.

    Words are explored depth-first. Once both automata are in the error state
    every extension is trivially equal, so those branches are cut; nodes that
    agree on the state pair and the last few input symbols have identical
    futures and are visited once. ``samples`` adds random longer words.

    ``relation="covers"`` only requires each modified action set to contain
    the standard one. LALR tables need this: one modified core can stand for
    several expanded cores, so merging by it may pick up extra lookaheads.
    """
    if relation not in ("equal", "covers"):
        raise ValueError("relation must be 'equal' or 'covers'")
    if pair is None:
        pair = build_pair(g, table, step_fn, None)
    t, t_e = pair
    a, a_e = t.automaton, t_e.automaton
    report = EquivalenceReport(name, table, max_len, states_modified=a.size, states_expanded=a_e.size)
    if verify_map is None:
        verify_map = a_e.size < budget
    report.map_checked = verify_map
    mapper = Mapper(a, a_e) if verify_map else None
    alphabet = a.alphabet
    terms = sorted(a.grammar.terminals) + [END]
    window = max((len(r.rhs) for r in a_e.grammar.rules), default=0)
    report.words = sum(len(alphabet) ** k for k in range(max_len + 1))

    def fail_action(text):
        report.action_mismatches += 1
        report.note(text)

    def visit(q, q_e, w):
        if mapper is not None:
            try:
                target = mapper.map_state(q, w)
                if target != q_e:
                    report.map_violations += 1
                    report.note("map(%d, %s) = %d but the expanded automaton is in %d"
                                % (q, " ".join(w) or "ε", target, q_e))
            except MapViolation as exc:
                report.map_violations += 1
                report.note(str(exc))
        for term in terms:
            mine = _normal_actions(t, q, term, w, fail_action)
            theirs = _normal_actions(t_e, q_e, term, w, fail_action)
            if (mine != theirs) if relation == "equal" else not theirs - {("error",)} <= mine:
                fail_action("after %s on %s: %s vs %s" % (" ".join(w) or "ε", term,
                                                          sorted(mine), sorted(theirs)))

    best = {}
    stack = [(a.initial, a_e.initial, ())]
    while stack and report.action_mismatches + report.map_violations < MISMATCH_CAP:
        q, q_e, w = stack.pop()
        key = (q, q_e, w[len(w) - window:] if window else ())
        remaining = max_len - len(w)
        if best.get(key, -1) >= remaining:
            continue
        first_visit = key not in best
        best[key] = remaining
        if first_visit:
            report.explored += 1
            visit(q, q_e, w)
        if not remaining:
            continue
        for sym in alphabet:
            r, r_e = a.delta(q, sym), a_e.delta(q_e, sym)
            if (r == a.error) != (r_e == a_e.error):
                fail_action("after %s: %s is %s in the modified automaton but %s in the expanded one"
                            % (" ".join(w) or "ε", sym, "an error" if r == a.error else "viable",
                               "an error" if r_e == a_e.error else "viable"))
                continue
            if r != a.error:
                stack.append((r, r_e, w + (sym,)))

    if report.ok:
        _check_acceptance(t, t_e, max_len, report)
    else:
        # a diverging automaton can make the nondeterministic recognizers blow up
        report.note("acceptance comparison skipped after step mismatches")

    if samples:
        rng = random.Random(seed)
        for _ in range(samples):
            length = rng.randint(max_len + 1, 2 * max_len + 1)
            q, q_e, w = a.initial, a_e.initial, ()
            for _ in range(length):
                sym = rng.choice(alphabet)
                q, q_e, w = a.delta(q, sym), a_e.delta(q_e, sym), w + (sym,)
                if (q == a.error) != (q_e == a_e.error):
                    fail_action("sampled word %s diverges" % " ".join(w))
                    break
                if q == a.error:
                    break
                visit(q, q_e, w)
    return report


def _check_acceptance(t: ParseTable, t_e: ParseTable, max_len: int, report: EquivalenceReport):
    """Run both parsers over every terminal word up to ``max_len`` and compare acceptance."""
    rec, rec_e = Recognizer(t), Recognizer(t_e)
    terms = sorted(t.grammar.terminals)
    report.terminal_words = sum(len(terms) ** k for k in range(max_len + 1))
    best = {}
    stack = [(rec.start(), rec_e.start(), ())]
    while stack:
        c, c_e, w = stack.pop()
        remaining = max_len - len(w)
        key = (c, c_e)
        if best.get(key, -1) >= remaining:
            continue
        best[key] = remaining
        mine, theirs = rec.accepts(c), rec_e.accepts(c_e)
        if mine != theirs:
            report.acceptance_mismatches += 1
            report.note("word %s: modified %s, expanded %s" % (
                " ".join(w) or "ε", *("accepts" if x else "rejects" for x in (mine, theirs))))
        if not remaining:
            continue
        for term in terms:
            n, n_e = rec.feed(c, term), rec_e.feed(c_e, term)
            if not n and not n_e:
                continue
            if bool(n) != bool(n_e):
                report.acceptance_mismatches += 1
                report.note("prefix %s is viable for only one parser" % " ".join(w + (term,)))
                continue
            stack.append((n, n_e, w + (term,)))


###############################################################################
# Fault injection for testing the checker itself
###############################################################################

def faulty_step(kind: str = "stuck-exit"):
    """
    A deliberately broken ``step``.

    ``stuck-exit``: matching the last expected element of a permutation leaves
    the item where it was instead of moving the dot past the segment.
    ``stale-seen``: stepping inside a permutation forgets the symbol just matched.
    """
    def broken(item: Item, symbol: str) -> Item:
        if item.seen is not None:
            expected = item.expected
            if (symbol,) in expected:
                if kind == "stuck-exit" and len(expected) == 1:
                    return item
                if kind == "stale-seen" and len(expected) > 1 and len(item.seen) > 1:
                    return item
        return step(item, symbol)
    if kind not in ("stuck-exit", "stale-seen"):
        raise ValueError("unknown fault %r" % kind)
    return broken


###############################################################################
# Reports
###############################################################################

def format_reports(reports: list, color: bool = False) -> str:
    bold = (lambda s: "\033[1m%s\033[0m" % s) if color else (lambda s: s)
    if not reports:
        return "no permutation rules\n"
    out = [bold("%-6s %-20s %9s %9s %9s %9s  %s" % (
        "rule", "lhs", "modified", "expanded", "max mod", "min exp", "independent"))]
    for r in reports:
        out.append("%-6d %-20s %9d %9s %9d %9d  %s" % (
            r.rule, r.lhs, r.modified_count, "-" if r.expanded_count is None else r.expanded_count,
            r.bound_modified, r.bound_expanded, "yes" if r.independent else "no"))
        for seg in r.segments:
            out.append("         segment %d: |perm| = %d, multiplier %d: at most %d vs at least %d states"
                       % (seg.index, seg.size, seg.multiplier, seg.modified_max, seg.expanded_min))
        if len(r.per_start_modified) > 1:
            out.append("         entered from %d states; union over them: modified %d, expanded %s"
                       % (len(r.per_start_modified), r.union_modified,
                          "-" if r.union_expanded is None else r.union_expanded))
    out.append("")
    out.append("expanded bound per segment: multiplier * sum_{k=0}^{n} n!/(n-k)!"
               " (n=3: 16, n=6: 1957)")
    return "\n".join(out) + "\n"


def format_reports_jsonl(reports: list) -> str:
    return "".join(json.dumps(r.record()) + "\n" for r in reports)
