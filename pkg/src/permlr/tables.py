"""
FIRST/FOLLOW and parse tables (SLR, canonical LR(1), LALR).

FIRST of a permutation phrase is the union of its elements' FIRST sets, with
the empty-string marker only when every element is nullable. FOLLOW gains the
permutation cases: a member of a permutation can be followed by any sibling,
by whatever follows the permutation, and by FOLLOW of the left-hand side when
everything after the permutation is nullable.

The textbook versions (:func:`textbook_first_follow`, :func:`textbook_lr1_closure`)
work only on grammars without permutation phrases and exist to build the
standard tables the modified ones are compared against.
"""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field
from typing import NamedTuple

from .automaton import (MODIFIED, STANDARD, Automaton, _prepared, _require_flat, explore)
from .grammar import END, EPSILON, Grammar, Perm, Phrase, expand_grammar
from .items import Item, drop_front, next_symbols, remainder, render_item, step


@dataclass
class FirstFollowTables:
    grammar: Grammar
    first: dict  # nonterminal -> frozenset of terminals, EPSILON if nullable
    follow: dict  # grammar symbol -> frozenset of terminals and END

    def first_of(self, p: Phrase) -> frozenset:
        return first(self, p)

    def nullable(self, name: str) -> bool:
        return EPSILON in self.first.get(name, ())


###############################################################################
# FIRST / FOLLOW with permutation phrases
###############################################################################

def _first_symbol(first_map, nonterminals, sym) -> frozenset:
    if sym in nonterminals:
        return first_map[sym]
    return frozenset((sym,))


def _first_phrase(first_map, nonterminals, p) -> frozenset:
    out = set()
    for seg in p:
        if isinstance(seg, Perm):
            f, all_nullable = set(), True
            for e in seg.elements:
                fe = _first_phrase(first_map, nonterminals, e)
                f |= fe
                if EPSILON not in fe:
                    all_nullable = False
            f.discard(EPSILON)
            if all_nullable:
                f.add(EPSILON)
        else:
            f = _first_symbol(first_map, nonterminals, seg)
        out |= f - {EPSILON}
        if EPSILON not in f:
            return frozenset(out)
    out.add(EPSILON)
    return frozenset(out)


def first(tables: FirstFollowTables, p) -> frozenset:
    """FIRST of a phrase (or a single symbol name)."""
    if isinstance(p, str):
        p = (p,)
    return _first_phrase(tables.first, tables.grammar.nonterminals, p)


def first_follow(g: Grammar) -> FirstFollowTables:
    """Fixed-point FIRST and FOLLOW for a grammar that may contain permutation phrases."""
    nts = g.nonterminals
    fmap = {n: frozenset() for n in nts}
    changed = True
    while changed:
        changed = False
        for r in g.rules:
            f = fmap[r.lhs] | _first_phrase(fmap, nts, r.rhs)
            if f != fmap[r.lhs]:
                fmap[r.lhs] = f
                changed = True

    follow = {sym: set() for sym in g.symbols}
    follow[g.start].add(END)
    changed = True
    while changed:
        changed = False

        def add(target, terms):
            nonlocal changed
            if not terms <= follow[target]:
                follow[target] |= terms
                changed = True

        for r in g.rules:
            rhs = r.rhs
            for j, seg in enumerate(rhs):
                rest = _first_phrase(fmap, nts, rhs[j + 1:])
                after = set(rest - {EPSILON})
                if EPSILON in rest:
                    after |= follow[r.lhs]
                if isinstance(seg, str):
                    add(seg, after)
                    continue
                for e in seg.elements:
                    siblings = set()
                    for other in seg.elements - {e}:
                        siblings |= _first_phrase(fmap, nts, other) - {EPSILON}
                    for k, sym in enumerate(e):
                        inner = _first_phrase(fmap, nts, e[k + 1:])
                        terms = set(inner - {EPSILON})
                        if EPSILON in inner:
                            terms |= siblings | after
                        add(sym, terms)
    return FirstFollowTables(g, fmap, {n: frozenset(v) for n, v in follow.items()})


follow = first_follow


###############################################################################
# Textbook FIRST / FOLLOW (no permutation phrases)
###############################################################################

def textbook_first_seq(tables: FirstFollowTables, symbols) -> frozenset:
    out = set()
    for sym in symbols:
        f = tables.first[sym] if sym in tables.first else frozenset((sym,))
        out |= f - {EPSILON}
        if EPSILON not in f:
            return frozenset(out)
    out.add(EPSILON)
    return frozenset(out)


def textbook_first_follow(g: Grammar) -> FirstFollowTables:
    _require_flat(g)
    nts = g.nonterminals
    fmap = {n: set() for n in nts}
    nullable = set()
    changed = True
    while changed:
        changed = False
        for r in g.rules:
            before = len(fmap[r.lhs])
            all_null = True
            for sym in r.rhs:
                if sym in nts:
                    fmap[r.lhs] |= fmap[sym]
                    if sym not in nullable:
                        all_null = False
                        break
                else:
                    fmap[r.lhs].add(sym)
                    all_null = False
                    break
            if all_null and r.lhs not in nullable:
                nullable.add(r.lhs)
                changed = True
            if len(fmap[r.lhs]) != before:
                changed = True
    first_map = {n: frozenset(fmap[n] | ({EPSILON} if n in nullable else set())) for n in nts}

    tables = FirstFollowTables(g, first_map, {})
    fol = {sym: set() for sym in g.symbols}
    fol[g.start].add(END)
    changed = True
    while changed:
        changed = False
        for r in g.rules:
            for i, sym in enumerate(r.rhs):
                rest = textbook_first_seq(tables, r.rhs[i + 1:])
                new = set(rest - {EPSILON})
                if EPSILON in rest:
                    new |= fol[r.lhs]
                if not new <= fol[sym]:
                    fol[sym] |= new
                    changed = True
    tables.follow = {n: frozenset(v) for n, v in fol.items()}
    return tables


###############################################################################
# Actions and tables
###############################################################################

class Action(NamedTuple):
    kind: str  # "shift" | "reduce" | "accept" | "error"
    arg: int | None = None

    def __str__(self):
        return {"shift": "s%s", "reduce": "r%s"}.get(self.kind, self.kind[:3]) % (
            (self.arg,) if self.kind in ("shift", "reduce") else ())


ACCEPT = Action("accept")
ERROR = Action("error")


@dataclass
class ParseTable:
    automaton: Automaton
    kind: str  # "slr" | "lr1" | "lalr"
    actions: dict  # (state, terminal) -> frozenset[Action]
    gotos: dict  # (state, nonterminal) -> state
    conflicts: list = field(default_factory=list)

    @property
    def grammar(self) -> Grammar:
        return self.automaton.grammar

    @property
    def deterministic(self) -> bool:
        return not self.conflicts

    @property
    def terminals(self) -> list:
        return sorted(self.grammar.terminals) + [END]

    def action_set(self, state: int, terminal: str) -> frozenset:
        return self.actions.get((state, terminal), frozenset((ERROR,)))

    def origins(self, action: Action) -> tuple:
        """Source permutation rules of a reduce action (itself, for modified tables)."""
        rule = self.grammar.rule(action.arg)
        if self.automaton.construction == STANDARD:
            return rule.origins
        return (rule.id,)


def _table(a: Automaton, kind: str, reduce_on) -> ParseTable:
    g = a.grammar
    actions = defaultdict(set)
    gotos = {}
    for s in a.states:
        if s.is_error:
            continue
        for sym, t in a.transitions[s.id].items():
            if sym in g.nonterminals:
                gotos[(s.id, sym)] = t
            else:
                actions[(s.id, sym)].add(Action("shift", t))
        for it in s.items:
            if not it.is_final:
                continue
            if it.rule.id == 0:
                if it.lookahead in (None, END):
                    actions[(s.id, END)].add(ACCEPT)
                continue
            for term in reduce_on(it):
                actions[(s.id, term)].add(Action("reduce", it.rule.id))
    frozen = {k: frozenset(v) for k, v in actions.items()}
    conflicts = [(q, sym, acts) for (q, sym), acts in sorted(frozen.items()) if len(acts) > 1]
    return ParseTable(a, kind, frozen, gotos, conflicts)


def build_slr(a: Automaton) -> ParseTable:
    """SLR table: reduce ``X -> w`` on FOLLOW(X)."""
    if a.kind != "lr0":
        raise ValueError("SLR tables are built from LR(0) automata")
    ff = first_follow(a.grammar) if a.construction == MODIFIED else textbook_first_follow(a.grammar)
    return _table(a, "slr", lambda it: ff.follow[it.rule.lhs])


def build_lr1_table(a: Automaton) -> ParseTable:
    """Table of an LR(1) or LALR automaton: reduce on each item's own lookahead."""
    if a.kind not in ("lr1", "lalr"):
        raise ValueError("expected an LR(1) or LALR automaton")
    return _table(a, a.kind, lambda it: (it.lookahead,))


###############################################################################
# LR(1)
###############################################################################

def lr1_closure(g: Grammar, items, ff: FirstFollowTables | None = None, _cache=None) -> frozenset:
    """
    LR(1) closure over permutation-aware items. For ``B`` next in ``[A -> a . beta, x]``,
    lookaheads come from FIRST of ``beta`` with ``B`` taken off its front, then ``x``.
    """
    ff = ff or first_follow(g)
    cache = {} if _cache is None else _cache
    out = set(items)
    work = list(out)
    while work:
        it = work.pop()
        for sym in next_symbols(it):
            if sym not in g.nonterminals:
                continue
            key = (it.core, sym)
            rest = cache.get(key)
            if rest is None:
                rest = cache[key] = first(ff, drop_front(remainder(it), sym))
            lookaheads = rest - {EPSILON}
            if EPSILON in rest:
                lookaheads = lookaheads | {it.lookahead}
            for r in g.by_lhs[sym]:
                for b in lookaheads:
                    new = Item(r, 0, None, b)
                    if new not in out:
                        out.add(new)
                        work.append(new)
    return frozenset(out)


def textbook_lr1_closure(g: Grammar, items, ff: FirstFollowTables | None = None, _cache=None) -> frozenset:
    ff = ff or textbook_first_follow(g)
    cache = {} if _cache is None else _cache
    out = set(items)
    work = list(out)
    while work:
        it = work.pop()
        rhs = it.rule.rhs
        if it.pos >= len(rhs) or rhs[it.pos] not in g.nonterminals:
            continue
        key = (it.rule, it.pos)
        rest = cache.get(key)
        if rest is None:
            rest = cache[key] = textbook_first_seq(ff, rhs[it.pos + 1:])
        lookaheads = set(rest - {EPSILON})
        if EPSILON in rest:
            lookaheads.add(it.lookahead)
        for r in g.by_lhs[rhs[it.pos]]:
            for b in lookaheads:
                new = Item(r, 0, None, b)
                if new not in out:
                    out.add(new)
                    work.append(new)
    return frozenset(out)


def build_lr1_automaton(g: Grammar, construction: str = MODIFIED, *, step_fn=None, rng=None) -> Automaton:
    """Canonical LR(1) automaton, either over ``g`` directly or over its expansion."""
    if construction == STANDARD:
        g = expand_grammar(g) if g.has_permutations else g
        _require_flat(g)
    g = _prepared(g)
    start = g.by_lhs[g.start][0]
    cache = {}
    if construction == MODIFIED:
        ff = first_follow(g)
        mover = step_fn or step

        def close(items):
            return lr1_closure(g, items, ff, cache)

        def successors(items):
            moved = defaultdict(set)
            for it in items:
                for sym in next_symbols(it):
                    moved[sym].add(mover(it, sym))
            return {sym: close(k) for sym, k in moved.items()}
    else:
        ff = textbook_first_follow(g)

        def close(items):
            return textbook_lr1_closure(g, items, ff, cache)

        def successors(items):
            moved = defaultdict(list)
            for it in items:
                rhs = it.rule.rhs
                if it.pos < len(rhs):
                    moved[rhs[it.pos]].append(Item(it.rule, it.pos + 1, None, it.lookahead))
            return {sym: close(k) for sym, k in moved.items()}

    initial = close({Item(start, 0, None, END)})
    states, transitions = explore(initial, successors, rng)
    return Automaton(g, states, transitions, construction, "lr1")


def merge_lalr(a: Automaton) -> Automaton:
    """Merge LR(1) states that share an LR(0) core."""
    if a.kind != "lr1":
        raise ValueError("LALR merging starts from an LR(1) automaton")
    group_of, groups = {}, []
    for s in a.states[:-1]:
        core = frozenset(i.core for i in s.items)
        if core not in group_of:
            group_of[core] = len(groups)
            groups.append([])
        groups[group_of[core]].append(s.id)
    new_id = {}
    for gid, members in enumerate(groups):
        for q in members:
            new_id[q] = gid
    error = len(groups)
    new_id[a.error] = error
    from .automaton import State
    states = [State(gid, frozenset().union(*(a.states[q].items for q in members)))
              for gid, members in enumerate(groups)]
    states.append(State(error, frozenset(), True))
    transitions = []
    for members in groups:
        edges = {}
        for q in members:
            for sym, t in a.transitions[q].items():
                edges[sym] = new_id[t]
        transitions.append(edges)
    transitions.append({})
    return Automaton(a.grammar, states, transitions, a.construction, "lalr")


def build_lr1(g: Grammar, construction: str = MODIFIED, **kw) -> ParseTable:
    return build_lr1_table(build_lr1_automaton(g, construction, **kw))


def build_lalr(g: Grammar, construction: str = MODIFIED, **kw) -> ParseTable:
    return build_lr1_table(merge_lalr(build_lr1_automaton(g, construction, **kw)))


def build_table(g: Grammar, kind: str = "slr", construction: str = MODIFIED, **kw) -> ParseTable:
    """One entry point for every table kind and construction."""
    from .automaton import build_modified, build_standard
    if kind == "slr":
        if construction == MODIFIED:
            return build_slr(build_modified(g, **kw))
        flat = expand_grammar(g) if g.has_permutations else g
        return build_slr(build_standard(flat, **kw))
    if kind == "lr1":
        return build_lr1(g, construction, **kw)
    if kind == "lalr":
        return build_lalr(g, construction, **kw)
    raise ValueError("unknown table kind %r (expected slr, lr1 or lalr)" % kind)


###############################################################################
# Dumps
###############################################################################

def dump_text(t: ParseTable) -> str:
    g = t.grammar
    out = []
    for s in t.automaton.states:
        if s.is_error:
            continue
        out.append("state %d" % s.id)
        for term in t.terminals:
            acts = t.actions.get((s.id, term))
            if acts:
                out.append("  ACTION %-12s %s" % (term, " | ".join(sorted(map(str, acts)))))
        for nt in sorted(g.nonterminals):
            if (s.id, nt) in t.gotos:
                out.append("  GOTO   %-12s %d" % (nt, t.gotos[(s.id, nt)]))
    if t.conflicts:
        out.append("conflicts: %d" % len(t.conflicts))
        for q, sym, acts in t.conflicts:
            out.append("  state %d on %s: %s" % (q, sym, " | ".join(sorted(map(str, acts)))))
            for it in sorted(render_item(i) for i in t.automaton.states[q].items):
                out.append("      " + it)
    return "\n".join(out) + "\n"


def dump_jsonl(t: ParseTable) -> str:
    lines = []
    for s in t.automaton.states:
        if s.is_error:
            continue
        for term in t.terminals:
            acts = t.actions.get((s.id, term))
            if acts:
                lines.append(json.dumps({"state": s.id, "symbol": term,
                                         "actions": sorted(map(str, acts))}))
        for nt in sorted(t.grammar.nonterminals):
            if (s.id, nt) in t.gotos:
                lines.append(json.dumps({"state": s.id, "goto": nt, "target": t.gotos[(s.id, nt)]}))
    return "\n".join(lines) + "\n"
