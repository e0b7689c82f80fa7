"""
LR(0) automata, built two ways.

:func:`build_modified` works directly on a grammar with permutation phrases,
using items whose dot can sit inside a permutation (see :mod:`permlr.items`).
:func:`build_standard` is the textbook subset construction over a grammar
without permutation phrases, normally the expanded grammar. It shares no
closure or goto code with the modified builder, so either one can serve as a
check on the other.

Both produce an :class:`Automaton`: states are numbered breadth-first from the
initial state, visiting outgoing symbols in sorted order. The empty error
state is always the last one. ``transitions`` stores only non-error edges;
:meth:`Automaton.delta` completes the function.
"""

from __future__ import annotations

import random
from collections import defaultdict, deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, NamedTuple

from .grammar import AUGMENTED, END, Grammar, GrammarError, augment, require_valid
from .items import Item, next_symbols, render_item, step

MODIFIED, STANDARD = "modified", "standard"


class State(NamedTuple):
    id: int
    items: frozenset
    is_error: bool = False

    @property
    def kernel(self) -> frozenset:
        return kernel(self.items)


def kernel(items) -> frozenset:
    """Items past the start of their rule, plus the augmentation item."""
    return frozenset(i for i in items if i.pos or i.seen is not None or i.rule.id == 0)


@dataclass
class Automaton:
    grammar: Grammar  # augmented
    states: list
    transitions: list  # per state: {symbol: target}, error edges omitted
    construction: str = MODIFIED
    kind: str = "lr0"  # "lr0" | "lr1" | "lalr"
    initial: int = 0

    @property
    def error(self) -> int:
        return len(self.states) - 1

    def delta(self, state: int, symbol: str) -> int:
        return self.transitions[state].get(symbol, self.error)

    def run(self, symbols, state: int | None = None) -> int:
        q = self.initial if state is None else state
        for s in symbols:
            q = self.delta(q, s)
        return q

    @property
    def alphabet(self) -> list:
        g = self.grammar
        return sorted((g.nonterminals | g.terminals) - {g.start})

    @property
    def size(self) -> int:
        """Number of states, not counting the error state."""
        return len(self.states) - 1

    @property
    def edge_count(self) -> int:
        return sum(map(len, self.transitions))

    @cached_property
    def predecessors(self) -> list:
        preds = [[] for _ in self.states]
        for q, edges in enumerate(self.transitions):
            for sym, target in edges.items():
                preds[target].append((q, sym))
        return preds

    @cached_property
    def by_items(self) -> dict:
        return {s.items: s.id for s in self.states}

    def summary(self) -> dict:
        """State and transition counts, plus how many states hold items of each rule."""
        per_rule = defaultdict(set)
        for s in self.states:
            for it in s.items:
                for rid in (it.rule.origins if self.construction == STANDARD else (it.rule.id,)):
                    per_rule[rid].add(s.id)
        return {
            "construction": self.construction,
            "kind": self.kind,
            "states": self.size,
            "transitions": self.edge_count,
            "items": sum(len(s.items) for s in self.states),
            "per_rule": {rid: len(v) for rid, v in sorted(per_rule.items())},
        }


def explore(initial: frozenset, successors: Callable, rng: random.Random | None = None) -> tuple:
    """
    Worklist construction of a deterministic automaton over item sets.

    ``successors(items)`` maps each symbol to the (closed) target item set.
    The result is renumbered canonically, so the order in which the worklist is
    drained -- randomised when ``rng`` is given -- cannot change the output.
    """
    index = {initial: 0}
    found = [initial]
    edges = [None]
    work = [0]
    while work:
        if rng is None:
            q = work.pop()
        else:
            q = work.pop(rng.randrange(len(work)))
        out = {}
        targets = list(successors(found[q]).items())
        if rng is not None:
            rng.shuffle(targets)
        for sym, items in targets:
            if not items:
                continue
            t = index.get(items)
            if t is None:
                t = index[items] = len(found)
                found.append(items)
                edges.append(None)
                work.append(t)
            out[sym] = t
        edges[q] = out
    return _renumber(found, edges)


def _renumber(found, edges) -> tuple:
    order, seen = [0], {0: 0}
    queue = deque([0])
    while queue:
        q = queue.popleft()
        for sym in sorted(edges[q]):
            t = edges[q][sym]
            if t not in seen:
                seen[t] = len(order)
                order.append(t)
                queue.append(t)
    states = [State(seen[q], found[q]) for q in order]
    transitions = [{sym: seen[t] for sym, t in edges[q].items()} for q in order]
    states.append(State(len(states), frozenset(), True))
    transitions.append({})
    return states, transitions


def _prepared(g: Grammar) -> Grammar:
    require_valid(g)
    return g if g.flavor == AUGMENTED else augment(g)


###############################################################################
# The modified construction
###############################################################################

def perm_closure(g: Grammar, items) -> frozenset:
    """Add ``[B -> .(1) gamma]`` for every nonterminal ``B`` that can be matched next, to a fixed point."""
    out = set(items)
    work = list(out)
    done = set()
    while work:
        it = work.pop()
        for sym in next_symbols(it):
            if sym in g.nonterminals and sym not in done:
                done.add(sym)
                for r in g.by_lhs[sym]:
                    new = Item(r, 0)
                    if new not in out:
                        out.add(new)
                        work.append(new)
    return frozenset(out)


def perm_goto(g: Grammar, items, symbol: str, step_fn=step) -> frozenset:
    """Closure of the items obtained by stepping over ``symbol``; empty means the error state."""
    moved = {step_fn(it, symbol) for it in items if symbol in next_symbols(it)}
    return perm_closure(g, moved) if moved else frozenset()


def _modified_successors(g: Grammar, step_fn) -> Callable:
    def successors(items):
        moved = defaultdict(set)
        for it in items:
            for sym in next_symbols(it):
                moved[sym].add(step_fn(it, sym))
        return {sym: perm_closure(g, k) for sym, k in moved.items()}
    return successors


def build_modified(g: Grammar, *, step_fn=None, rng: random.Random | None = None) -> Automaton:
    """LR(0) automaton of a grammar with permutation phrases, built with permutation-aware items."""
    g = _prepared(g)
    start = g.by_lhs[g.start][0]
    initial = perm_closure(g, {Item(start, 0)})
    states, transitions = explore(initial, _modified_successors(g, step_fn or step), rng)
    return Automaton(g, states, transitions, MODIFIED)


###############################################################################
# The textbook construction
###############################################################################

def _require_flat(g: Grammar):
    if g.has_permutations:
        raise GrammarError("the standard construction needs a grammar without permutation phrases; expand it first")


def textbook_closure(g: Grammar, items) -> frozenset:
    out = set(items)
    work = list(out)
    added = set()
    while work:
        it = work.pop()
        rhs = it.rule.rhs
        if it.pos < len(rhs):
            sym = rhs[it.pos]
            if sym in g.nonterminals and sym not in added:
                added.add(sym)
                for r in g.by_lhs[sym]:
                    new = Item(r, 0)
                    if new not in out:
                        out.add(new)
                        work.append(new)
    return frozenset(out)


def textbook_goto(g: Grammar, items, symbol: str) -> frozenset:
    moved = {Item(it.rule, it.pos + 1) for it in items
             if it.pos < len(it.rule.rhs) and it.rule.rhs[it.pos] == symbol}
    return textbook_closure(g, moved) if moved else frozenset()


def _textbook_successors(g: Grammar) -> Callable:
    def successors(items):
        moved = defaultdict(list)
        for it in items:
            rhs = it.rule.rhs
            if it.pos < len(rhs):
                moved[rhs[it.pos]].append(Item(it.rule, it.pos + 1))
        return {sym: textbook_closure(g, k) for sym, k in moved.items()}
    return successors


def build_standard(g: Grammar, *, rng: random.Random | None = None, max_states: int | None = None) -> Automaton:
    """Classic LR(0) automaton; ``g`` must be free of permutation phrases."""
    _require_flat(g)
    g = _prepared(g)
    start = g.by_lhs[g.start][0]
    initial = textbook_closure(g, {Item(start, 0)})
    successors = _textbook_successors(g)
    if max_states is not None:
        successors = _budgeted(successors, max_states)
    states, transitions = explore(initial, successors, rng)
    return Automaton(g, states, transitions, STANDARD)


class BudgetExceeded(RuntimeError):
    pass


def _budgeted(successors, limit):
    seen = set()

    def wrapped(items):
        out = successors(items)
        seen.update(out.values())
        if len(seen) >= limit:
            raise BudgetExceeded("automaton exceeds %d states" % limit)
        return out
    return wrapped


###############################################################################
# Output
###############################################################################

def _dot_escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def to_dot(a: Automaton, include_error: bool = False) -> str:
    """Graphviz source; one box per state listing its items."""
    levels = a.construction == MODIFIED
    lines = ["digraph automaton {", "  rankdir=LR;", '  node [shape=box, fontname="monospace"];']
    for s in a.states:
        if s.is_error and not include_error:
            continue
        if s.is_error:
            label = "%d: error\\l" % s.id
        else:
            body = sorted(render_item(i, levels) for i in s.items)
            label = "%d\\l" % s.id + "".join(_dot_escape(b) + "\\l" for b in body)
        lines.append('  s%d [label="%s"];' % (s.id, label))
    for s in a.states:
        if s.is_error:
            continue
        for sym in sorted(a.transitions[s.id]):
            lines.append('  s%d -> s%d [label="%s"];' % (s.id, a.transitions[s.id][sym], _dot_escape(sym)))
        if include_error:
            dead = [sym for sym in a.alphabet if sym not in a.transitions[s.id]]
            if dead:
                lines.append('  s%d -> s%d [label="%s", style=dashed];'
                             % (s.id, a.error, _dot_escape(",".join(dead))))
    lines.append("}")
    return "\n".join(lines) + "\n"


def describe(a: Automaton) -> str:
    """Plain-text state listing."""
    levels = a.construction == MODIFIED
    out = []
    for s in a.states:
        if s.is_error:
            out.append("state %d: error" % s.id)
            continue
        out.append("state %d" % s.id)
        for line in sorted(render_item(i, levels) for i in s.items):
            out.append("    " + line)
        for sym in sorted(a.transitions[s.id]):
            out.append("    on %s -> %d" % (sym, a.transitions[s.id][sym]))
    return "\n".join(out) + "\n"


def accepting_item(a: Automaton, state: int) -> bool:
    """Does the state contain ``[S' -> S .]`` (with lookahead $end for LR(1) automata)?"""
    return any(it.rule.id == 0 and it.is_final and it.lookahead in (None, END) for it in a.states[state].items)
