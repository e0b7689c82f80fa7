"""
Table-driven shift/reduce parsing.

:func:`parse` is the ordinary deterministic LR driver and refuses tables with
conflicts. :func:`trial_parse` and :class:`Recognizer` follow every action in
a conflicted cell instead; they exist so that ambiguous grammars can still be
checked for acceptance, and are not meant as a production GLR parser.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

from .grammar import END, Perm
from .items import pop_count
from .tables import ParseTable


class ConflictError(RuntimeError):
    """The table has conflicting cells, so deterministic parsing is undefined."""


class Token(NamedTuple):
    terminal: str
    lexeme: str | None = None
    position: int = 0


class ParseEvent(NamedTuple):
    kind: str  # "shift" | "reduce" | "accept" | "error"
    token: Token | None = None
    rule: int | None = None
    children: int = 0
    state: int | None = None
    expected: tuple = ()
    lhs: str | None = None

    def __str__(self):
        if self.kind == "shift":
            return "shift %s" % self.token.terminal
        if self.kind == "reduce":
            return "reduce %d (%s)" % (self.rule, self.lhs)
        if self.kind == "accept":
            return "accept"
        return "error in state %d on %s; expected: %s" % (
            self.state, self.token.terminal, " ".join(self.expected) or "(nothing)")


@dataclass
class Node:
    symbol: str
    rule: int | None = None  # None for a terminal leaf
    children: list = field(default_factory=list)
    token: Token | None = None
    # per permutation segment, the order in which its elements arrived
    permutation_order: tuple = ()

    def frontier(self) -> list:
        if self.rule is None:
            return [self.token]
        return [t for c in self.children for t in c.frontier()]

    def pretty(self, indent: int = 0) -> str:
        pad = "  " * indent
        if self.rule is None:
            return "%s%s\n" % (pad, self.symbol)
        extra = ""
        if self.permutation_order:
            extra = "  order=" + ";".join(" ".join(o) for o in self.permutation_order)
        return "%s%s [rule %d]%s\n" % (pad, self.symbol, self.rule, extra) + "".join(
            c.pretty(indent + 1) for c in self.children)


class ParseResult(NamedTuple):
    accepted: bool
    events: list
    tree: Node | None = None


def tokenize(text: str) -> list:
    """Whitespace-separated terminal names; a trailing ``$end`` is optional."""
    return [Token(word, word, i) for i, word in enumerate(text.split())]


def _with_end(tokens) -> list:
    tokens = [t if isinstance(t, Token) else Token(t, t, i) for i, t in enumerate(tokens)]
    if not tokens or tokens[-1].terminal != END:
        tokens.append(Token(END, None, len(tokens)))
    return tokens


def actions_at(t: ParseTable, state: int, terminal: str) -> frozenset:
    """The raw, possibly conflicting, action set of a cell."""
    return t.action_set(state, terminal)


def expected_terminals(t: ParseTable, state: int) -> tuple:
    return tuple(term for term in t.terminals if (state, term) in t.actions)


def _node_for(t: ParseTable, rule_id: int, children: list) -> Node:
    rule = t.grammar.rule(rule_id)
    orders, at = [], 0
    for seg in rule.rhs:
        if isinstance(seg, Perm):
            n = seg.width
            orders.append(tuple(c.symbol for c in children[at:at + n]))
            at += n
        else:
            at += 1
    return Node(rule.lhs, rule_id, children, permutation_order=tuple(orders))


def parse(t: ParseTable, tokens) -> ParseResult:
    """Run the LR driver; every step is recorded as a :class:`ParseEvent`."""
    if t.conflicts:
        raise ConflictError("table has %d conflicting cells" % len(t.conflicts))
    g = t.grammar
    tokens = _with_end(tokens)
    states, nodes, events = [t.automaton.initial], [], []
    i = 0
    while True:
        tok = tokens[i]
        (act,) = t.action_set(states[-1], tok.terminal)
        if act.kind == "shift":
            states.append(act.arg)
            nodes.append(Node(tok.terminal, token=tok))
            events.append(ParseEvent("shift", tok))
            i += 1
        elif act.kind == "reduce":
            rule = g.rule(act.arg)
            n = pop_count(rule)
            children = nodes[len(nodes) - n:]
            del states[len(states) - n:]
            del nodes[len(nodes) - n:]
            nodes.append(_node_for(t, rule.id, children))
            states.append(t.gotos[(states[-1], rule.lhs)])
            events.append(ParseEvent("reduce", rule=rule.id, children=n, lhs=rule.lhs))
        elif act.kind == "accept":
            events.append(ParseEvent("accept"))
            return ParseResult(True, events, nodes[-1] if nodes else None)
        else:
            events.append(ParseEvent("error", tok, state=states[-1],
                                     expected=expected_terminals(t, states[-1])))
            return ParseResult(False, events)


class TooAmbiguous(RuntimeError):
    pass


class Recognizer:
    """
    Breadth-first exploration of every action in every cell.

    A configuration is a stack of states (a tuple). ``feed`` consumes one
    terminal and returns the surviving configurations; an empty set means the
    input so far is not a prefix of any sentence.
    """

    def __init__(self, t: ParseTable, limit: int = 100_000):
        self.table = t
        self.limit = limit
        self._cells = {}
        # flattened cells: shifts as target states, reduces as (pop count, lhs)
        for (q, term), acts in t.actions.items():
            shifts, reduces, acc = [], [], False
            for act in acts:
                if act.kind == "shift":
                    shifts.append(act.arg)
                elif act.kind == "reduce":
                    rule = t.grammar.rule(act.arg)
                    reduces.append((pop_count(rule), rule.lhs))
                elif act.kind == "accept":
                    acc = True
            self._cells[q, term] = (tuple(shifts), tuple(reduces), acc)

    def start(self) -> frozenset:
        return frozenset({(self.table.automaton.initial,)})

    def feed(self, configs, terminal: str) -> frozenset:
        shifted, _ = self._advance(configs, terminal)
        return frozenset(shifted)

    def accepts(self, configs) -> bool:
        return self._advance(configs, END)[1]

    def _advance(self, configs, terminal):
        cells, gotos = self._cells, self.table.gotos
        empty = ((), (), False)
        seen = set(configs)
        work = list(configs)
        shifted, accepted = set(), False
        while work:
            stack = work.pop()
            shifts, reduces, acc = cells.get((stack[-1], terminal), empty)
            accepted = accepted or acc
            for q in shifts:
                shifted.add(stack + (q,))
            for n, lhs in reduces:
                base = stack[:len(stack) - n]
                target = gotos.get((base[-1], lhs))
                if target is None:
                    continue
                new = base + (target,)
                if new not in seen:
                    seen.add(new)
                    work.append(new)
                    if len(seen) > self.limit:
                        raise TooAmbiguous("more than %d configurations" % self.limit)
        return shifted, accepted

    def recognize(self, terminals) -> bool:
        configs = self.start()
        for term in terminals:
            if term == END:
                break
            configs = self.feed(configs, term)
            if not configs:
                return False
        return self.accepts(configs)


def trial_parse(t: ParseTable, tokens, limit: int = 100_000) -> ParseResult:
    """
    Like :func:`parse` but tolerant of conflicts: explores all actions and
    returns the events of the first accepting path found. On rejection the
    error event reports the furthest position reached.
    """
    g = t.grammar
    tokens = _with_end(tokens)
    # configuration: (stack of states, stack of nodes, events)
    configs = [((t.automaton.initial,), (), ())]
    for i, tok in enumerate(tokens):
        seen = {c[0] for c in configs}
        work = list(configs)
        nxt = []
        while work:
            stack, nodes, events = work.pop(0)
            for act in sorted(t.action_set(stack[-1], tok.terminal)):
                if act.kind == "shift":
                    nxt.append((stack + (act.arg,), nodes + (Node(tok.terminal, token=tok),),
                                events + (ParseEvent("shift", tok),)))
                elif act.kind == "accept":
                    result_events = list(events) + [ParseEvent("accept")]
                    return ParseResult(True, result_events, nodes[-1] if nodes else None)
                elif act.kind == "reduce":
                    rule = g.rule(act.arg)
                    n = pop_count(rule)
                    base = stack[:len(stack) - n]
                    target = t.gotos.get((base[-1], rule.lhs))
                    if target is None:
                        continue
                    new_stack = base + (target,)
                    if new_stack in seen:
                        continue
                    seen.add(new_stack)
                    if len(seen) > limit:
                        raise TooAmbiguous("more than %d configurations" % limit)
                    node = _node_for(t, rule.id, list(nodes[len(nodes) - n:]))
                    work.append((new_stack, nodes[:len(nodes) - n] + (node,),
                                 events + (ParseEvent("reduce", rule=rule.id, children=n, lhs=rule.lhs),)))
        if not nxt:
            # only terminals that some configuration could actually consume
            rec = Recognizer(t, limit)
            stacks = [c[0] for c in configs]
            expected = tuple(x for x in t.terminals if any(rec._advance(stacks, x)))
            err = ParseEvent("error", tok, state=configs[0][0][-1], expected=expected)
            return ParseResult(False, list(configs[0][2]) + [err])
        configs = nxt
    raise AssertionError("unreachable: input always ends with $end")
