"""Command-line entry point.

Exit codes: 0 success, 1 input error, 2 internal invariant failure,
3 programs not equivalent (``oracle compare``).
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .analysis import DIM_MODES, dimension_bound_setup, dimension_instrument, emit_dot, pred_dep_graph
from .derivation import NodeBudgetExceeded, UnfoldingRule
from .oracle import GridSpec, NotConverged, equivalent_on_grid
from .parser import ParseError, parse_constrained_facts, parse_program, render
from .properties import PropertySet, dimension_ladder, guard_properties
from .specializer import SpecializationError, specialize

log = logging.getLogger("chcspec")


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _read(path: str) -> str:
    try:
        return sys.stdin.read() if path == "-" else Path(path).read_text()
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}") from e


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _pred(text: str) -> tuple[str, int]:
    name, sep, arity = text.rpartition("/")
    if not sep or not name or not arity.isdigit():
        raise InputError(f"bad predicate {text!r}; expected name/arity")
    return name, int(arity)


def _entry_facts(text: str):
    if text.startswith("@"):
        text = _read(text[1:])
    text = text.strip()
    if not text.endswith("."):
        text += "."
    return parse_constrained_facts(text)


def _properties(args, program):
    if args.props and args.gen_props:
        raise InputError("give exactly one of --props and --gen-props")
    if args.props:
        return PropertySet(parse_constrained_facts(_read(args.props)))
    if args.gen_props == "guards":
        return guard_properties(program)
    if args.gen_props and args.gen_props.startswith("dim:") and args.gen_props[4:].isdigit():
        return dimension_ladder(program, int(args.gen_props[4:]))
    if args.gen_props:
        raise InputError(f"bad --gen-props {args.gen_props!r}; expected guards or dim:<d>")
    raise InputError("give exactly one of --props and --gen-props")


def cmd_specialize(args) -> int:
    program = parse_program(_read(args.program))
    facts = _entry_facts(args.entry)
    props = _properties(args, program)
    try:
        rule = UnfoldingRule.parse(args.unfold)
    except ValueError as e:
        raise InputError(str(e)) from e
    result = specialize(program, facts, props, rule, args.abstract, max_iterations=args.max_iterations,
                        node_budget=args.node_budget, frontier=args.frontier,
                        prune=not args.no_prune, minimize=args.minimize)
    log.info("fixpoint: %d facts after %d iterations, %d clauses",
             len(result.facts), len(result.trace.iterations), len(result.program))
    _write(args.output, render(result.program))
    if args.dot:
        _write(args.dot, emit_dot(pred_dep_graph(result.program, [f.key for f in facts])))
    if args.trace:
        _write(args.trace, "\n".join(result.trace.lines()) + "\n")
    if args.trace_json:
        _write(args.trace_json, "".join(json.dumps(r) + "\n" for r in result.trace.records()))
    return 0


def cmd_graph(args) -> int:
    program = parse_program(_read(args.program))
    entries = [_pred(e) for e in args.entry]
    _write(args.output, emit_dot(pred_dep_graph(program, entries)))
    return 0


def cmd_dim(args) -> int:
    program = parse_program(_read(args.program))
    inst = dimension_instrument(program)
    name, arity = _pred(args.entry)
    if (name, arity) in program.predicates():
        arity += 1
    if args.bound is None:
        _write(args.output, render(inst))
        return 0
    facts, props = dimension_bound_setup(inst, (name, arity), args.mode, args.bound)
    if args.props_out:
        _write(args.props_out, "".join(f"{f}\n" for f in props))
    if args.entry_out:
        _write(args.entry_out, "".join(f"{f}\n" for f in facts))
    if args.no_specialize:
        _write(args.output, render(inst))
        return 0
    result = specialize(inst, facts, props, UnfoldingRule.parse(args.unfold), "all")
    _write(args.output, render(result.program))
    return 0


def _grid(text: str) -> tuple[int, int]:
    lo, sep, hi = text.partition("..")
    try:
        return int(lo), int(hi)
    except ValueError:
        raise InputError(f"bad grid {text!r}; expected lo..hi") from None


def cmd_oracle(args) -> int:
    p1 = parse_program(_read(args.first))
    p2 = parse_program(_read(args.second))
    pairs = []
    for e in args.entry:
        a, _, b = e.partition("=")
        ka = _pred(a)
        kb = (b, ka[1]) if b and "/" not in b else (_pred(b) if b else ka)
        pairs.append((ka, kb))
    lo, hi = _grid(args.grid)
    try:
        grid = GridSpec(lo, hi, args.iters, args.dim_cap)
    except ValueError as e:
        raise InputError(str(e)) from e
    ok, witness = equivalent_on_grid(p1, p2, pairs, grid)
    if ok:
        print("equivalent")
        return 0
    pred, vals, side = witness
    print(f"not equivalent: {pred}{vals} derivable only in the {side} program")
    return 3


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="chcspec", description="Polyvariant specialisation of constrained Horn clauses.")
    p.add_argument("--log-level", default="WARNING")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    s = sub.add_parser("specialize", help="specialise a program for entry facts")
    s.add_argument("-p", "--program", required=True)
    s.add_argument("-e", "--entry", required=True, help="constrained facts, or @file")
    s.add_argument("--props", help="file of property facts")
    s.add_argument("--gen-props", help="guards | dim:<d>")
    s.add_argument("--unfold", default="branch-recursive", help="one-step | branch-recursive | depth:<k>")
    s.add_argument("--abstract", choices=("all", "recursive"), default="all")
    s.add_argument("--minimize", action="store_true")
    s.add_argument("--no-prune", action="store_true", help="keep clauses of unproductive versions")
    s.add_argument("--frontier", action="store_true", help="evaluate only new facts each iteration")
    s.add_argument("--max-iterations", type=int, default=1000)
    s.add_argument("--node-budget", type=int)
    s.add_argument("-o", "--output")
    s.add_argument("--dot")
    s.add_argument("--trace")
    s.add_argument("--trace-json")
    s.add_argument("--config", help="JSON file of option defaults")
    s.set_defaults(func=cmd_specialize)

    g = sub.add_parser("graph", help="predicate dependency graph as DOT")
    g.add_argument("program")
    g.add_argument("--entry", action="append", default=[])
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_graph)

    d = sub.add_parser("dim-instrument", help="add tree-dimension arguments and bound them")
    d.add_argument("-p", "--program", required=True)
    d.add_argument("--entry", required=True, help="pred/arity, original or instrumented")
    d.add_argument("--bound", type=int)
    d.add_argument("--mode", choices=DIM_MODES, default="atmost")
    d.add_argument("--unfold", default="one-step")
    d.add_argument("--no-specialize", action="store_true", help="only instrument")
    d.add_argument("--props-out")
    d.add_argument("--entry-out")
    d.add_argument("-o", "--output")
    d.set_defaults(func=cmd_dim)

    o = sub.add_parser("oracle", help="ground-evaluation oracle")
    osub = o.add_subparsers(dest="action", parser_class=_Parser, required=True)
    c = osub.add_parser("compare", help="compare two programs on a grid")
    c.add_argument("first")
    c.add_argument("second")
    c.add_argument("--entry", action="append", required=True, help="p/n or p/n=q")
    c.add_argument("--grid", default="-5..5")
    c.add_argument("--iters", type=int, default=12)
    c.add_argument("--dim-cap", type=int, default=8)
    c.set_defaults(func=cmd_oracle)
    return p


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        try:
            cfg = json.loads(_read(args.config))
        except json.JSONDecodeError as e:
            raise InputError(f"bad config {args.config}: {e}") from e
        if not isinstance(cfg, dict):
            raise InputError("config must be a JSON object")
        sub = parser._subparsers._group_actions[0].choices[args.command]  # type: ignore[union-attr]
        known = {a.dest for a in sub._actions}
        unknown = set(k.replace("-", "_") for k in cfg) - known
        if unknown:
            raise InputError(f"unknown config keys: {', '.join(sorted(unknown))}")
        sub.set_defaults(**{k.replace("-", "_"): v for k, v in cfg.items()})
        args = parser.parse_args(argv)
    return args


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    # let "--grid -3..3" through even though the value starts with a dash
    for i in range(len(argv) - 1):
        if argv[i] == "--grid" and argv[i + 1].startswith("-"):
            argv[i:i + 2] = [f"--grid={argv[i + 1]}", ""]
    argv = [a for a in argv if a != ""]
    try:
        args = _apply_config(parser, argv)
        logging.basicConfig(level=args.log_level.upper(), format="%(levelname)s %(name)s: %(message)s")
        if not getattr(args, "func", None):
            parser.print_usage(sys.stderr)
            return 1
        return args.func(args)
    except (InputError, ParseError) as e:
        print(f"chcspec: error: {e}", file=sys.stderr)
        return 1
    except (SpecializationError, NodeBudgetExceeded, NotConverged) as e:
        print(f"chcspec: internal error: {e}", file=sys.stderr)
        return 2
    except SystemExit as e:
        return int(e.code or 0)
