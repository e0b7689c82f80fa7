"""LR parser generation for grammars with permutation phrases."""

from .grammar import (END, EPSILON, Diagnostic, Grammar, GrammarError, Perm, Rule, Symbol, augment,
                      expand_grammar, expand_phrase, load_grammar, parse_grammar, parse_phrase, phrase,
                      render, validate)
from .items import DotState, Item, StepError, item_phrases, next_symbols, pop_count, render_item, step
from .automaton import Automaton, State, build_modified, build_standard, perm_closure, perm_goto, to_dot
from .tables import (Action, FirstFollowTables, ParseTable, build_lalr, build_lr1, build_slr, build_table,
                     first, first_follow, follow, lr1_closure)
from .runtime import ConflictError, ParseResult, Recognizer, Token, actions_at, parse, trial_parse
from .oracle import (EquivalenceReport, RuleStateReport, check_equivalence, complexity_bounds,
                     is_independent, map_state, paths, rule_states)

__version__ = "0.1.0"
