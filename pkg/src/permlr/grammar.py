"""
Grammars with permutation phrases.

A right-hand side is a flat tuple of *segments*. A segment is either a symbol
name (a plain ``str``) or a :class:`Perm`, an unordered set of simple phrases
that must all be matched, in any order. ``X -> Y << A || B || C D >>`` is the
segment tuple ``('Y', Perm({('A',), ('B',), ('C', 'D')}))``.

Every grammar with permutation phrases stands for an ordinary context-free
grammar in which each permutation phrase is replaced by all orderings of its
elements. :func:`expand_grammar` builds that grammar; it is what the standard
LR construction runs on, and what the modified construction is checked against.

The text format read by :func:`parse_grammar`::

    # comment
    catalog     -> catalogItem | catalog catalogItem ;
    catalogItem -> << id || name || addresses >> ;
    addresses   -> addressesItem addresses | %empty ;

An identifier is a nonterminal iff it appears on some left-hand side.
Quoted names (``'a'``) are always terminals.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, NamedTuple, Union

END = "$end"
EPSILON = "%empty"

CFGP, EXPANDED, AUGMENTED = "cfgp", "expanded-cfg", "augmented"


class Diagnostic(NamedTuple):
    message: str
    line: int = 0
    column: int = 0

    def __str__(self):
        if self.line and self.column:
            return "%d:%d: %s" % (self.line, self.column, self.message)
        if self.line:
            return "%d: %s" % (self.line, self.message)
        return self.message


class GrammarError(ValueError):
    """Raised when a grammar cannot be read or is unfit for the requested construction."""

    def __init__(self, diagnostics):
        if isinstance(diagnostics, (str, Diagnostic)):
            diagnostics = [diagnostics]
        self.diagnostics = [d if isinstance(d, Diagnostic) else Diagnostic(d) for d in diagnostics]
        super().__init__("; ".join(map(str, self.diagnostics)))


class Symbol(NamedTuple):
    name: str
    kind: str  # "terminal" | "nonterminal"


@dataclass(frozen=True)
class Perm:
    """A permutation phrase: a set of non-empty simple phrases (tuples of symbol names)."""

    elements: frozenset

    def __post_init__(self):
        if not self.elements:
            raise GrammarError("empty permutation phrase")
        for e in self.elements:
            if not isinstance(e, tuple) or not e:
                raise GrammarError("permutation element must be a non-empty simple phrase")

    @classmethod
    def of(cls, *elements) -> "Perm":
        """Build from symbols or symbol sequences; repeated elements are an error, not collapsed."""
        seen = []
        for e in elements:
            e = (e,) if isinstance(e, str) else tuple(e)
            if e in seen:
                raise GrammarError("duplicate permutation element %s" % " ".join(e))
            seen.append(e)
        return cls(frozenset(seen))

    def __len__(self):
        return len(self.elements)

    def __iter__(self) -> Iterator[tuple]:
        return iter(sorted(self.elements))

    def __contains__(self, item):
        if isinstance(item, str):
            item = (item,)
        return item in self.elements

    def __or__(self, other: "Perm") -> "Perm":
        return Perm(self.elements | other.elements)

    def __sub__(self, other) -> "Perm":
        if isinstance(other, Perm):
            other = other.elements
        return Perm(self.elements - frozenset(other))

    @property
    def width(self) -> int:
        """Total number of symbols over all elements."""
        return sum(map(len, self.elements))

    def __str__(self):
        return "<<%s>>" % " || ".join(" ".join(map(_quote, e)) for e in self)

    def __repr__(self):
        return "Perm(%s)" % str(self)


Segment = Union[str, Perm]
Phrase = tuple  # of Segment


def phrase(*segments) -> Phrase:
    """Flatten segments (symbols, Perms, or nested phrases) into one phrase tuple."""
    out = []
    for s in segments:
        if isinstance(s, (str, Perm)):
            out.append(s)
        else:
            out.extend(phrase(*s))
    return tuple(out)


def phrase_length(p: Phrase) -> int:
    """Number of symbols matched by any expansion of ``p``."""
    return sum(1 if isinstance(s, str) else s.width for s in p)


def render_phrase(p: Phrase) -> str:
    if not p:
        return EPSILON
    return " ".join(_quote(s) if isinstance(s, str) else str(s) for s in p)


@dataclass(frozen=True)
class Rule:
    id: int
    lhs: str
    rhs: Phrase
    # Source rule ids; an expanded rule lists every rule it was enumerated from.
    origins: tuple = field(default=(), compare=False)
    line: int = field(default=0, compare=False)
    _hash: int = field(default=0, compare=False, repr=False)

    def __post_init__(self):
        if not self.origins:
            object.__setattr__(self, "origins", (self.id,))
        object.__setattr__(self, "_hash", hash((self.id, self.lhs, self.rhs)))

    def __hash__(self):
        return self._hash

    @property
    def is_permutation_rule(self) -> bool:
        return any(isinstance(s, Perm) for s in self.rhs)

    def __str__(self):
        return "%s -> %s" % (self.lhs, render_phrase(self.rhs))


@dataclass(frozen=True)
class Grammar:
    rules: tuple
    start: str
    flavor: str = CFGP

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(self.rules))

    @cached_property
    def nonterminals(self) -> frozenset:
        return frozenset(r.lhs for r in self.rules)

    @cached_property
    def terminals(self) -> frozenset:
        found = set()
        for r in self.rules:
            for s in _phrase_symbols(r.rhs):
                if s not in self.nonterminals:
                    found.add(s)
        return frozenset(found)

    @cached_property
    def symbols(self) -> dict:
        table = {n: Symbol(n, "nonterminal") for n in self.nonterminals}
        table.update((t, Symbol(t, "terminal")) for t in self.terminals)
        return table

    @cached_property
    def by_lhs(self) -> dict:
        table = {n: [] for n in self.nonterminals}
        for r in self.rules:
            table[r.lhs].append(r)
        return {n: tuple(rs) for n, rs in table.items()}

    @cached_property
    def by_id(self) -> dict:
        return {r.id: r for r in self.rules}

    def rule(self, rule_id: int) -> Rule:
        return self.by_id[rule_id]

    @property
    def has_permutations(self) -> bool:
        return any(r.is_permutation_rule for r in self.rules)

    def is_nonterminal(self, name: str) -> bool:
        return name in self.nonterminals

    def __str__(self):
        return render(self)


def _phrase_symbols(p: Phrase) -> Iterator[str]:
    for s in p:
        if isinstance(s, str):
            yield s
        else:
            for e in s.elements:
                yield from e


_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*'*\Z")


def _quote(name: str) -> str:
    return name if _IDENT.match(name) else "'%s'" % name


def render(g: Grammar) -> str:
    """Grammar source text; :func:`parse_grammar` reads it back to an equal grammar."""
    return "".join("%s ;\n" % r for r in g.rules)


###############################################################################
# Reading grammar text
###############################################################################

_TOKEN = re.compile(
    r"""
    (?P<space>[ \t\r\f]+)
  | (?P<newline>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<arrow>->)
  | (?P<open><<)
  | (?P<close>>>)
  | (?P<sep>\|\|)
  | (?P<bar>\|)
  | (?P<semi>;)
  | (?P<empty>%empty)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*'*)
  | (?P<quoted>'[^'\n]*'|"[^"\n]*")
    """,
    re.VERBOSE,
)


class _Tok(NamedTuple):
    kind: str
    text: str
    line: int
    column: int


def _tokenize(text: str) -> list:
    tokens, line, line_start, pos = [], 1, 0, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        column = pos - line_start + 1
        if not m:
            raise GrammarError(Diagnostic("unexpected character %r" % text[pos], line, column))
        kind = m.lastgroup
        if kind == "newline":
            line, line_start = line + 1, m.end()
        elif kind not in ("space", "comment"):
            value = m.group()
            if kind == "quoted":
                value = value[1:-1]
                if not value:
                    raise GrammarError(Diagnostic("empty quoted terminal", line, column))
            tokens.append(_Tok(kind, value, line, column))
        pos = m.end()
    tokens.append(_Tok("eof", "", line, pos - line_start + 1))
    return tokens


class _Reader:
    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.at = 0
        self.quoted = {}  # name -> first position it was written quoted

    def peek(self) -> _Tok:
        return self.tokens[self.at]

    def take(self, *kinds) -> _Tok:
        tok = self.tokens[self.at]
        if tok.kind not in kinds:
            want = " or ".join(_DESCRIBE[k] for k in kinds)
            got = _DESCRIBE.get(tok.kind, tok.kind) if tok.kind != "ident" else "identifier %r" % tok.text
            raise GrammarError(Diagnostic("expected %s, found %s" % (want, got), tok.line, tok.column))
        self.at += 1
        return tok

    def name(self) -> str:
        tok = self.take("ident", "quoted")
        if tok.text == END:
            raise GrammarError(Diagnostic("reserved symbol %s" % END, tok.line, tok.column))
        if tok.kind == "quoted":
            self.quoted.setdefault(tok.text, tok)
        return tok.text

    def grammar(self) -> Grammar:
        rules = []
        while self.peek().kind != "eof":
            lhs_tok = self.take("ident")
            self.take("arrow")
            while True:
                rules.append(Rule(len(rules) + 1, lhs_tok.text, self.alternative(), line=lhs_tok.line))
                if self.take("bar", "semi").kind == "semi":
                    break
        if not rules:
            raise GrammarError(Diagnostic("grammar has no rules", 1, 1))
        lhs = {r.lhs for r in rules}
        for name, tok in self.quoted.items():
            if name in lhs:
                raise GrammarError(Diagnostic("quoted terminal %r is also a left-hand side" % name, tok.line, tok.column))
        return Grammar(tuple(rules), rules[0].lhs, CFGP)

    def alternative(self) -> Phrase:
        if self.peek().kind == "empty":
            self.at += 1
            return ()
        segments = []
        while self.peek().kind in ("ident", "quoted", "open"):
            if self.peek().kind == "open":
                segments.append(self.permutation())
            else:
                segments.append(self.name())
        return tuple(segments)

    def permutation(self) -> Perm:
        open_tok = self.take("open")
        elements = []
        while True:
            tok = self.peek()
            element = []
            while self.peek().kind in ("ident", "quoted"):
                element.append(self.name())
            if self.peek().kind == "open":
                t = self.peek()
                raise GrammarError(Diagnostic("nested permutation phrase", t.line, t.column))
            if not element:
                t = self.peek()
                if t.kind == "close" and not elements:
                    raise GrammarError(Diagnostic("empty permutation phrase", open_tok.line, open_tok.column))
                raise GrammarError(Diagnostic("empty permutation element", t.line, t.column))
            if tuple(element) in elements:
                raise GrammarError(Diagnostic("duplicate permutation element %s" % " ".join(element), tok.line, tok.column))
            elements.append(tuple(element))
            if self.take("sep", "close").kind == "close":
                return Perm(frozenset(elements))


_DESCRIBE = {
    "arrow": "'->'", "open": "'<<'", "close": "'>>'", "sep": "'||'", "bar": "'|'",
    "semi": "';'", "empty": "'%empty'", "ident": "identifier", "quoted": "quoted terminal",
    "eof": "end of input",
}


def parse_grammar(text: str) -> Grammar:
    """Read grammar source text. Raises :class:`GrammarError` carrying line/column diagnostics."""
    return _Reader(text).grammar()


def parse_phrase(text: str) -> Phrase:
    """Read a single right-hand side, e.g. ``"Y << A || B || C D >>"``."""
    reader = _Reader(text)
    p = reader.alternative()
    reader.take("eof")
    return p


def load_grammar(path) -> Grammar:
    with open(path, encoding="utf-8") as fh:
        return parse_grammar(fh.read())


###############################################################################
# Expansion
###############################################################################

def expand_segment(segment: Segment) -> list:
    if isinstance(segment, str):
        return [(segment,)]
    return [sum(order, ()) for order in itertools.permutations(sorted(segment.elements))]


def iter_expansions(p: Phrase) -> Iterator[tuple]:
    """Expansions of ``p`` in a deterministic order (may repeat if elements overlap)."""
    for parts in itertools.product(*map(expand_segment, p)):
        yield sum(parts, ())


def expand_phrase(p: Phrase) -> set:
    """All simple phrases (symbol tuples) that ``p`` stands for."""
    return set(iter_expansions(p))


def expand_grammar(g: Grammar) -> Grammar:
    """
    Replace every permutation rule by its enumerated sequences.

    Sequences produced by more than one source rule appear once and list every
    origin. Rule 0 (an augmentation rule) keeps its id; all others are
    renumbered from 1 in source order.
    """
    found = {}
    for r in g.rules:
        for rhs in iter_expansions(r.rhs):
            key = (r.lhs, rhs)
            if key in found:
                if r.id not in found[key][1]:
                    found[key][1].append(r.id)
            else:
                found[key] = (r, [r.id])
    rules, next_id = [], 1
    for (lhs, rhs), (source, origins) in found.items():
        if source.id == 0:
            rid = 0
        else:
            rid, next_id = next_id, next_id + 1
        rules.append(Rule(rid, lhs, rhs, origins=tuple(origins), line=source.line))
    flavor = AUGMENTED if g.flavor == AUGMENTED else EXPANDED
    return Grammar(tuple(rules), g.start, flavor)


def augment(g: Grammar) -> Grammar:
    """Add rule 0, ``S' -> S``, with a fresh start symbol."""
    if g.flavor == AUGMENTED:
        raise GrammarError("grammar is already augmented")
    start = g.start + "'"
    taken = set(g.symbols)
    while start in taken:
        start += "'"
    if any(r.id == 0 for r in g.rules):
        raise GrammarError("rule id 0 is reserved for the augmentation rule")
    top = Rule(0, start, (g.start,), origins=(0,))
    return Grammar((top,) + g.rules, start, AUGMENTED)


###############################################################################
# Validation
###############################################################################

def validate(g: Grammar) -> list:
    """
    Problems that make ``g`` unfit for LR construction, as a list of diagnostics.

    Multi-symbol permutation elements are legal for :func:`expand_phrase` but
    not for the automaton builders, so they are reported here.
    """
    out = []
    for r in g.rules:
        for s in r.rhs:
            if isinstance(s, Perm):
                for e in sorted(s.elements):
                    if len(e) != 1:
                        out.append(Diagnostic(
                            "rule %d: permutation element of length %d: unsupported for LR construction"
                            % (r.id, len(e)), r.line))
        if END in _phrase_symbols(r.rhs) or r.lhs == END:
            out.append(Diagnostic("rule %d: reserved symbol %s" % (r.id, END), r.line))

    if g.start not in g.nonterminals:
        out.append(Diagnostic("start symbol %s has no rules" % g.start))
        return out

    reached, todo = {g.start}, [g.start]
    while todo:
        for r in g.by_lhs[todo.pop()]:
            for s in _phrase_symbols(r.rhs):
                if s in g.nonterminals and s not in reached:
                    reached.add(s)
                    todo.append(s)
    for n in sorted(g.nonterminals - reached):
        out.append(Diagnostic("unreachable nonterminal %s" % n))

    generating, changed = set(), True
    while changed:
        changed = False
        for r in g.rules:
            if r.lhs not in generating and all(
                    s in generating or s not in g.nonterminals for s in _phrase_symbols(r.rhs)):
                generating.add(r.lhs)
                changed = True
    for n in sorted(g.nonterminals - generating):
        out.append(Diagnostic("non-generating nonterminal %s" % n))
    return out


def require_valid(g: Grammar) -> None:
    problems = validate(g)
    if problems:
        raise GrammarError(problems)


def rules_from(pairs: Iterable, start: str | None = None) -> Grammar:
    """Convenience constructor: ``rules_from([("S", phrase(...)), ...])``."""
    rules = tuple(Rule(i, lhs, phrase(rhs)) for i, (lhs, rhs) in enumerate(pairs, 1))
    return Grammar(rules, start or rules[0].lhs, CFGP)
