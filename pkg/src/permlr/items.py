"""
LR items whose dot can sit *inside* a permutation phrase.

A level-1 dot sits between top-level segments, as in ordinary LR(0) items.
A level-2 dot sits inside the permutation segment at ``pos`` and remembers
only which elements have been matched (``seen``), not in what order. This is
what lets all orderings of a permutation phrase share states.

Items are tuples, so they hash and compare cheaply; ``seen`` is a frozenset
of element tuples and is ``None`` for a level-1 dot.
"""

from __future__ import annotations

from typing import NamedTuple

from .grammar import Perm, Phrase, Rule, phrase_length, render_phrase, _quote


class StepError(ValueError):
    """The dot cannot move over the requested symbol."""


class DotState(NamedTuple):
    position: int
    seen: Perm | None = None
    expected: Perm | None = None

    @property
    def level(self) -> int:
        return 1 if self.seen is None else 2


class Item(NamedTuple):
    rule: Rule
    pos: int
    seen: frozenset | None = None
    lookahead: str | None = None

    @property
    def level(self) -> int:
        return 1 if self.seen is None else 2

    @property
    def expected(self) -> frozenset | None:
        if self.seen is None:
            return None
        return self.rule.rhs[self.pos].elements - self.seen

    @property
    def dot(self) -> DotState:
        if self.seen is None:
            return DotState(self.pos)
        return DotState(self.pos, Perm(self.seen), Perm(self.expected))

    @property
    def core(self) -> "Item":
        return Item(self.rule, self.pos, self.seen)

    @property
    def is_final(self) -> bool:
        return self.seen is None and self.pos == len(self.rule.rhs)

    def with_lookahead(self, lookahead) -> "Item":
        return Item(self.rule, self.pos, self.seen, lookahead)

    def __str__(self):
        return render_item(self)


def item_phrases(p: Phrase) -> set:
    """Every dot placement over ``p``: level-1 between segments, level-2 per proper split of each permutation."""
    out = {DotState(i) for i in range(len(p) + 1)}
    for i, seg in enumerate(p):
        if isinstance(seg, Perm):
            for seen in _proper_subsets(seg.elements):
                out.add(DotState(i, Perm(seen), Perm(seg.elements - seen)))
    return out


def _proper_subsets(elements: frozenset):
    ordered = sorted(elements)
    n = len(ordered)
    for mask in range(1, (1 << n) - 1):
        yield frozenset(e for b, e in enumerate(ordered) if mask >> b & 1)


def rule_items(rule: Rule) -> set:
    """All LR(0) items of ``rule``."""
    return {Item(rule, d.position, None if d.seen is None else d.seen.elements) for d in item_phrases(rule.rhs)}


def remainder(item: Item) -> Phrase:
    """The phrase after the dot."""
    rhs = item.rule.rhs
    if item.seen is None:
        return rhs[item.pos:]
    return (Perm(item.expected),) + rhs[item.pos + 1:]


def prefix(item: Item) -> Phrase:
    """The phrase before the dot."""
    rhs = item.rule.rhs
    if item.seen is None:
        return rhs[:item.pos]
    return rhs[:item.pos] + (Perm(item.seen),)


def prefix_length(item: Item) -> int:
    """How many symbols the dot has passed."""
    n = phrase_length(item.rule.rhs[:item.pos])
    if item.seen is not None:
        n += sum(map(len, item.seen))
    return n


def next_symbols(x) -> frozenset:
    """Symbols that can be matched first: of a phrase, or of the remainder of an item."""
    if isinstance(x, Item):
        if x.seen is not None:
            return frozenset(e[0] for e in x.expected)
        rhs = x.rule.rhs
        if x.pos == len(rhs):
            return frozenset()
        seg = rhs[x.pos]
    else:
        if not x:
            return frozenset()
        seg = x[0]
    if isinstance(seg, str):
        return frozenset((seg,))
    return frozenset(e[0] for e in seg.elements)


def step(item: Item, symbol: str) -> Item:
    """Move the dot of ``item`` over ``symbol``; the rule and lookahead never change."""
    rule, pos, seen = item.rule, item.pos, item.seen
    key = (symbol,)
    if seen is None:
        if pos < len(rule.rhs):
            seg = rule.rhs[pos]
            if seg == symbol:
                return Item(rule, pos + 1, None, item.lookahead)
            if isinstance(seg, Perm) and key in seg.elements:
                _require_symbols_only(seg)
                if len(seg.elements) == 1:
                    # entering and finishing a one-element permutation in the same move
                    return Item(rule, pos + 1, None, item.lookahead)
                return Item(rule, pos, frozenset((key,)), item.lookahead)
    else:
        seg = rule.rhs[pos]
        expected = seg.elements - seen
        if key in expected:
            if len(expected) == 1:
                return Item(rule, pos + 1, None, item.lookahead)
            return Item(rule, pos, seen | {key}, item.lookahead)
    raise StepError("cannot step %s over %s" % (render_item(item), symbol))


def _require_symbols_only(seg: Perm):
    if any(len(e) != 1 for e in seg.elements):
        raise StepError("permutation elements longer than one symbol are not supported: %s" % seg)


def drop_front(p: Phrase, symbol: str) -> Phrase:
    """``p`` with ``symbol`` removed from its front: trimmed, or taken out of a leading permutation."""
    if not p:
        raise StepError("cannot remove %s from the empty phrase" % symbol)
    head, rest = p[0], p[1:]
    if head == symbol:
        return rest
    if isinstance(head, Perm) and (symbol,) in head.elements:
        left = head.elements - {(symbol,)}
        return ((Perm(left),) if left else ()) + rest
    raise StepError("%s does not start %s" % (symbol, render_phrase(p)))


def pop_count(rule: Rule) -> int:
    """Stack entries popped when reducing by ``rule``."""
    return phrase_length(rule.rhs)


def render_item(item: Item, levels: bool = True) -> str:
    """``X -> A <<C>> .(2) <<B>> D``; level-1 dots render as ``.(1)`` (or ``.`` with ``levels=False``)."""
    rhs = item.rule.rhs
    parts = [_render_seg(s) for s in rhs[:item.pos]]
    if item.seen is None:
        parts.append(".(1)" if levels else ".")
        parts.extend(_render_seg(s) for s in rhs[item.pos:])
    else:
        parts.append(str(Perm(item.seen)))
        parts.append(".(2)")
        parts.append(str(Perm(item.expected)))
        parts.extend(_render_seg(s) for s in rhs[item.pos + 1:])
    text = "%s -> %s" % (item.rule.lhs, " ".join(parts))
    if item.lookahead is not None:
        text = "[%s, %s]" % (text, item.lookahead)
    return text


def _render_seg(s) -> str:
    return _quote(s) if isinstance(s, str) else str(s)
