"""
Command-line front end.

    permlr build GRAMMAR [--table slr|lr1|lalr] [--construction modified|standard|both]
    permlr parse GRAMMAR [TOKENS...] [--trial]
    permlr stats GRAMMAR [--format text|jsonl]
    permlr check GRAMMAR [--max-len N] [--behavioral-only]
    permlr dot   GRAMMAR [--include-error]

Exit codes:

    0  success (accepted, no mismatches)
    1  input rejected, or the equivalence check found mismatches
    2  grammar could not be read or failed validation
    3  conflicted table where a deterministic one is required
    4  expanded automaton over the size budget
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .automaton import MODIFIED, STANDARD, BudgetExceeded, build_modified, build_standard, describe, to_dot
from .grammar import GrammarError, expand_grammar, load_grammar, require_valid
from .oracle import (MAP_BUDGET, build_pair, check_equivalence, estimate_expanded_states, faulty_step,
                     format_reports, format_reports_jsonl, grammar_report)
from .runtime import ConflictError, TooAmbiguous, parse, tokenize, trial_parse
from .tables import build_table, dump_jsonl, dump_text

EXIT_OK, EXIT_REJECT, EXIT_GRAMMAR, EXIT_CONFLICT, EXIT_BUDGET = 0, 1, 2, 3, 4

TABLES = ("slr", "lr1", "lalr")
CONSTRUCTIONS = (MODIFIED, STANDARD, "both")


def _color() -> bool:
    return os.environ.get("PERMLR_COLOR", "0") == "1"


def _paint(text: str, code: str) -> str:
    return "\033[%sm%s\033[0m" % (code, text) if _color() else text


def _load(path: str):
    g = load_grammar(path)
    require_valid(g)
    return g


def _constructions(choice: str) -> tuple:
    return (MODIFIED, STANDARD) if choice == "both" else (choice,)


def _summary_text(label: str, table) -> str:
    a = table.automaton
    s = a.summary()
    lines = [
        _paint("%s %s" % (label, table.kind), "1"),
        "  states:      %d (+1 error state)" % s["states"],
        "  transitions: %d" % s["transitions"],
        "  items:       %d" % s["items"],
        "  rules:       %d" % (len(a.grammar.rules) - 1),
        "  conflicts:   %d" % len(table.conflicts),
    ]
    return "\n".join(lines) + "\n"


def _summary_record(label: str, table) -> dict:
    s = table.automaton.summary()
    return {"construction": label, "table": table.kind, "states": s["states"],
            "transitions": s["transitions"], "items": s["items"],
            "rules": len(table.grammar.rules) - 1, "conflicts": len(table.conflicts)}


def cmd_build(args) -> int:
    g = _load(args.grammar)
    tables = [(c, build_table(g, args.table, c)) for c in _constructions(args.construction)]
    out = []
    for label, t in tables:
        if args.format == "jsonl":
            out.append(json.dumps(_summary_record(label, t)) + "\n")
        else:
            out.append(_summary_text(label, t))
            if args.dump:
                out.append(dump_text(t))
        if args.format == "jsonl" and args.dump:
            out.append(dump_jsonl(t))
    conflicted = [label for label, t in tables if t.conflicts]
    if args.require_deterministic and conflicted:
        for label, t in tables:
            if t.conflicts:
                print("permlr: %s %s table has %d conflicting cells" % (label, t.kind, len(t.conflicts)),
                      file=sys.stderr)
                for q, sym, acts in t.conflicts[:10]:
                    print("  state %d on %s: %s" % (q, sym, " | ".join(sorted(map(str, acts)))),
                          file=sys.stderr)
        return EXIT_CONFLICT
    sys.stdout.write("".join(out))
    return EXIT_OK


def _read_tokens(args) -> list:
    if args.tokens:
        return tokenize(" ".join(args.tokens))
    return tokenize(sys.stdin.read())


def cmd_parse(args) -> int:
    g = _load(args.grammar)
    construction = STANDARD if args.construction == STANDARD else MODIFIED
    t = build_table(g, args.table, construction)
    tokens = _read_tokens(args)
    if t.conflicts and not args.trial:
        print("permlr: %s table has %d conflicting cells; use --trial to explore all actions"
              % (t.kind, len(t.conflicts)), file=sys.stderr)
        return EXIT_CONFLICT
    result = trial_parse(t, tokens) if args.trial else parse(t, tokens)
    lines = [str(e) for e in result.events]
    if result.accepted and result.tree is not None and args.tree:
        lines.append(result.tree.pretty().rstrip("\n"))
    sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK if result.accepted else EXIT_REJECT


def cmd_stats(args) -> int:
    g = _load(args.grammar)
    if g.has_permutations and estimate_expanded_states(g) >= args.budget and not args.behavioral_only:
        print("permlr: the expanded automaton would have at least %d states (budget %d); "
              "pass --behavioral-only to report the modified side only"
              % (estimate_expanded_states(g), args.budget), file=sys.stderr)
        return EXIT_BUDGET
    _, _, reports = grammar_report(g, with_expanded=not args.behavioral_only)
    if args.format == "jsonl":
        sys.stdout.write(format_reports_jsonl(reports))
    else:
        sys.stdout.write(format_reports(reports, _color()))
    return EXIT_OK


def cmd_check(args) -> int:
    g = _load(args.grammar)
    over = estimate_expanded_states(g) >= args.budget
    if over and not args.behavioral_only:
        print("permlr: the expanded automaton would have at least %d states (budget %d); "
              "pass --behavioral-only to skip the state map" % (estimate_expanded_states(g), args.budget),
              file=sys.stderr)
        return EXIT_BUDGET
    step_fn = faulty_step(args.fault) if args.fault else None
    pair = build_pair(g, args.table, step_fn)
    report = check_equivalence(g, args.max_len, args.table, name=os.path.basename(args.grammar),
                               verify_map=False if args.behavioral_only else None,
                               budget=args.budget, samples=args.samples, seed=args.seed, pair=pair)
    if args.format == "jsonl":
        sys.stdout.write(json.dumps(report.record()) + "\n")
    else:
        verdict = _paint("ok", "32") if report.ok else _paint("MISMATCH", "31")
        sys.stdout.write(str(report) + verdict + "\n")
    return EXIT_OK if report.ok else EXIT_REJECT


def cmd_dot(args) -> int:
    g = _load(args.grammar)
    if args.construction == STANDARD:
        a = build_standard(expand_grammar(g) if g.has_permutations else g)
    else:
        a = build_modified(g)
    sys.stdout.write(describe(a) if args.listing else to_dot(a, args.include_error))
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="permlr", description="LR parser generator for grammars with permutation phrases",
                                formatter_class=argparse.RawDescriptionHelpFormatter,
                                epilog="exit codes: 0 ok, 1 rejected/mismatch, 2 grammar error, "
                                       "3 conflicted table, 4 over size budget")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, construction_default=MODIFIED, constructions=CONSTRUCTIONS):
        sp.add_argument("grammar", help="grammar file")
        sp.add_argument("--table", choices=TABLES, default="slr")
        sp.add_argument("--construction", choices=constructions, default=construction_default)
        sp.add_argument("--format", choices=("text", "jsonl"), default="text")

    sp = sub.add_parser("build", help="build automata and tables, print a summary")
    common(sp)
    sp.add_argument("--require-deterministic", action="store_true", help="exit 3 if any table has conflicts")
    sp.add_argument("--dump", action="store_true", help="also print the ACTION/GOTO table")
    sp.set_defaults(func=cmd_build)

    sp = sub.add_parser("parse", help="parse a whitespace-separated token stream")
    common(sp, constructions=(MODIFIED, STANDARD))
    sp.add_argument("tokens", nargs="*", help="terminal names; read from standard input if absent")
    sp.add_argument("--trial", action="store_true", help="explore every action of conflicted cells")
    sp.add_argument("--tree", action="store_true", help="print the parse tree on success")
    sp.set_defaults(func=cmd_parse)

    sp = sub.add_parser("stats", help="per-rule state counts against the closed-form bounds")
    common(sp)
    sp.add_argument("--behavioral-only", action="store_true", help="skip the expanded automaton")
    sp.add_argument("--budget", type=int, default=MAP_BUDGET, help=argparse.SUPPRESS)
    sp.set_defaults(func=cmd_stats)

    sp = sub.add_parser("check", help="compare the modified and expanded pipelines on all short words")
    common(sp)
    sp.add_argument("--max-len", type=int, default=8)
    sp.add_argument("--behavioral-only", action="store_true",
                    help="skip the state map, allowing grammars over the size budget")
    sp.add_argument("--samples", type=int, default=0, help="random longer words to try as well")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--budget", type=int, default=MAP_BUDGET, help=argparse.SUPPRESS)
    sp.add_argument("--fault", choices=("stuck-exit", "stale-seen"), help=argparse.SUPPRESS)
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("dot", help="Graphviz source of the LR(0) automaton")
    common(sp, constructions=(MODIFIED, STANDARD))
    sp.add_argument("--include-error", action="store_true")
    sp.add_argument("--listing", action="store_true", help="plain-text state listing instead of DOT")
    sp.set_defaults(func=cmd_dot)
    return p


def main(argv=None) -> int:
    parser = make_parser()
    args, extra = parser.parse_known_args(argv)
    if extra:
        # token lists may be split by options, as in `parse g.g --trial a b`
        if args.command != "parse" or any(x.startswith("-") for x in extra):
            parser.error("unrecognized arguments: %s" % " ".join(extra))
        args.tokens = list(args.tokens) + extra
    if getattr(args, "max_len", 0) < 0:
        print("permlr: --max-len must be non-negative", file=sys.stderr)
        return EXIT_GRAMMAR
    try:
        return args.func(args)
    except GrammarError as exc:
        for d in exc.diagnostics or [exc]:
            print("%s: %s" % (args.grammar, d), file=sys.stderr)
        return EXIT_GRAMMAR
    except OSError as exc:
        print("permlr: %s" % exc, file=sys.stderr)
        return EXIT_GRAMMAR
    except ConflictError as exc:
        print("permlr: %s" % exc, file=sys.stderr)
        return EXIT_CONFLICT
    except BudgetExceeded as exc:
        print("permlr: %s" % exc, file=sys.stderr)
        return EXIT_BUDGET
    except TooAmbiguous as exc:
        print("permlr: %s" % exc, file=sys.stderr)
        return EXIT_REJECT


if __name__ == "__main__":
    sys.exit(main())
