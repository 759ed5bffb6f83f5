"""Command-line front end: ``hocrwl <command> [options]``."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass

from .analysis import DISTINGUISHED, EQUIVALENT, FO, HO, ext_equiv, observe, unsoundness_witness
from .calculus import SearchBudget, denote, derive
from .checks import SUITES, CheckConfig, run_suite
from .letrw import random_trace, reachable_patterns
from .parser import ParseError, load_program, parse_expr, print_context, print_rule, print_signature
from .syntax import Program, SyntaxValidationError
from .transforms import distinguish

EXPECTED_MARK = "[expected under extra variables]"


@dataclass(frozen=True)
class RunConfig:
    program_path: list[str] | None
    prelude: bool
    extra_variables: bool
    left_fo: bool
    budget: SearchBudget
    steps: int
    output: str
    seed: int

    def load(self) -> Program:
        # with no program file the prelude alone is loaded
        prelude = self.prelude or self.program_path is None
        return load_program(self.program_path, prelude=prelude,
                            extra_variables=self.extra_variables, left_fo=self.left_fo)


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("program and budget")
    g.add_argument("-p", "--program", metavar="FILE", action="append",
                   help="program file, repeatable (default: prelude only)")
    g.add_argument("--prelude", action="store_true", help="prepend the standard prelude (0, s, plus)")
    g.add_argument("--extra-variables", action="store_true", help="allow extra variables in rules")
    g.add_argument("--left-fo", action="store_true", help="require first-order rule parameters")
    g.add_argument("--depth", type=int, default=8, help="maximum nesting of OR steps (default 8)")
    g.add_argument("--pattern-size", type=int, default=4,
                   help="size bound for extra-variable instances (default 4)")
    g.add_argument("--steps", type=int, default=200, help="let-rewriting step bound (default 200)")
    g.add_argument("--json", action="store_true", help="machine-readable output")
    g.add_argument("--seed", type=int, default=0, help="seed for generated corpora and traces")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    ap = argparse.ArgumentParser(prog="hocrwl", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("denote", parents=[common], help="enumerate the denotation of an expression")
    p.add_argument("expr")
    p.add_argument("--emit-proof", metavar="PATTERN", help="print a proof tree for this value")

    p = sub.add_parser("observe", parents=[common], help="total values of an expression")
    p.add_argument("expr")
    p.add_argument("--fo", action="store_true", help="first-order values only")
    p.add_argument("--engine", choices=("calculus", "letrw"), default="calculus")

    p = sub.add_parser("ext-equiv", parents=[common], help="n-extensional equivalence")
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("n", type=int)
    p.add_argument("--size-bound", type=int, default=2, help="argument pattern size (default 2)")

    p = sub.add_parser("distinguish", parents=[common], help="build a distinguishing context")
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("--fo", action="store_true", help="use the first-order variant")
    p.add_argument("--emit-extension", metavar="FILE",
                   help="write the extension rules as a program file")

    p = sub.add_parser("unsound", parents=[common],
                       help="search for a context separating n-extensionally equal expressions")
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("n", type=int)
    p.add_argument("--ho", action="store_true", help="observe all total values, not only FO ones")

    p = sub.add_parser("check", parents=[common], help="run a property suite")
    p.add_argument("suite", choices=(*SUITES, "all"))
    p.add_argument("--programs", type=int, default=30, help="corpus size when no program is given")
    p.add_argument("--queries", type=int, default=5, help="queries per program")

    p = sub.add_parser("trace", parents=[common], help="a random let-rewriting trace")
    p.add_argument("expr")
    return ap


def _config(args) -> RunConfig:
    budget = SearchBudget(args.depth, args.pattern_size)
    if args.steps < 1:
        raise ValueError("--steps must be positive")
    return RunConfig(args.program, args.prelude, args.extra_variables, args.left_fo, budget,
                     args.steps, "json" if args.json else "text", args.seed)


def _emit(cfg: RunConfig, text: str, data) -> None:
    if cfg.output == "json":
        print(json.dumps(data, indent=2))
    else:
        print(text)


def _values(vs) -> str:
    return ", ".join(str(v) for v in vs)


def cmd_denote(cfg: RunConfig, prog: Program, args) -> int:
    e = parse_expr(args.expr, prog.signature)
    den = denote(prog, e, cfg.budget)
    status = "complete" if den.complete_at_bound else "incomplete (bound reached)"
    data = {"expr": str(e), "values": [str(v) for v in den.sorted()],
            "depth": cfg.budget.max_or_depth, "complete_at_bound": den.complete_at_bound}
    text = f"{_values(den.sorted())}\n[depth {cfg.budget.max_or_depth}, {status}]"
    code = 0
    if args.emit_proof is not None:
        t = parse_expr(args.emit_proof, prog.signature, allow_bottom=True)
        pt = derive(prog, e, t, cfg.budget)
        if pt is None:
            text += f"\nno proof of {e} ~> {t} within the bound"
            data["proof"] = None
            code = 1
        else:
            text += "\n" + pt.render()
            data["proof"] = pt.to_json()
    _emit(cfg, text, data)
    return code


def cmd_observe(cfg: RunConfig, prog: Program, args) -> int:
    e = parse_expr(args.expr, prog.signature)
    kind = FO if args.fo else HO
    if args.engine == "letrw":
        r = reachable_patterns(prog, e, cfg.steps)
        vals = r.values
        if kind == FO:
            from .syntax import is_fo_pattern
            vals = frozenset(v for v in vals if is_fo_pattern(v, prog.signature))
        from .calculus import pattern_key
        shown, exhausted = sorted(vals, key=pattern_key), r.exhausted
    else:
        obs = observe(prog, e, kind, cfg.budget)
        shown, exhausted = obs.sorted(), obs.exhausted
    status = "exhausted" if exhausted else "bound reached"
    _emit(cfg, f"{_values(shown)}\n[{kind}, {args.engine}, {status}]",
          {"expr": str(e), "kind": kind, "engine": args.engine,
           "values": [str(v) for v in shown], "exhausted": exhausted})
    return 0


def cmd_ext_equiv(cfg: RunConfig, prog: Program, args) -> int:
    a = parse_expr(args.left, prog.signature)
    b = parse_expr(args.right, prog.signature)
    v = ext_equiv(prog, a, b, args.n, args.size_bound, cfg.budget)
    if v.status == DISTINGUISHED:
        side = "left" if v.value_in_left else "right"
        text = (f"distinguished at {' '.join(str(t) for t in v.witness) or '()'}"
                f"\n[{v.value} only on the {side}; this is a proof of non-equivalence]")
    elif v.status == EQUIVALENT and a == b:
        text = "equivalent-at-bound\n[identical expressions]"
    elif v.status == EQUIVALENT:
        text = (f"equivalent-at-bound\n[{v.tuples_checked} argument tuples up to size "
                f"{args.size_bound}; not a proof]")
    else:
        text = (f"inconclusive\n[denotations differ at {' '.join(map(str, v.witness))} "
                f"but neither side was exhausted]")
    _emit(cfg, text, v.to_json())
    return 0


def cmd_distinguish(cfg: RunConfig, prog: Program, args) -> int:
    a = parse_expr(args.left, prog.signature)
    b = parse_expr(args.right, prog.signature)
    r = distinguish(prog, a, b, cfg.budget, FO if args.fo else HO)
    if r is None:
        _emit(cfg, "no difference found at bound", {"difference": None})
        return 0
    d = r.distinguisher
    side = "left" if r.in_left else "right"
    lines = [
        f"witness: {r.target} (in the {side} denotation only)",
        f"context: {d.label()} [ ]   ({d.entry} [ ])",
        f"observes {d.hat_target}: left {'yes' if r.observed_left else 'no'}, "
        f"right {'yes' if r.observed_right else 'no'}"
        + ("" if r.confirmed else "  [not confirmed at bound]"),
        "extension rules:",
        *("  " + print_rule(rule) for rule in d.rules),
    ]
    if args.emit_extension:
        with open(args.emit_extension, "w", encoding="utf-8") as fh:
            fh.write(print_signature(d.signature_additions) + "\n")
            fh.writelines(print_rule(rule) + "\n" for rule in d.rules)
        lines.append(f"extension written to {args.emit_extension}")
    _emit(cfg, "\n".join(lines), r.to_json())
    return 0 if r.confirmed else 1


def cmd_unsound(cfg: RunConfig, prog: Program, args) -> int:
    a = parse_expr(args.left, prog.signature)
    b = parse_expr(args.right, prog.signature)
    r = unsoundness_witness(prog, a, b, args.n, cfg.budget, kind=HO if args.ho else FO)
    if r.status == "witness":
        side = "left" if r.value_in_left else "right"
        text = (f"witness context: {print_context(r.context)}\n"
                f"  left:  {_values(r.left.sorted())}\n  right: {_values(r.right.sorted())}\n"
                f"  {r.value} is observed only on the {side}")
    elif r.status == "not-applicable":
        text = f"not-applicable: the expressions are not {args.n}-extensionally equivalent"
    else:
        text = f"none found ({r.contexts_checked} contexts)"
    _emit(cfg, text, r.to_json())
    return 0


def cmd_check(cfg: RunConfig, prog: Program | None, args) -> int:
    ccfg = CheckConfig(budget=cfg.budget, steps=cfg.steps, programs=args.programs,
                       queries=args.queries, seed=cfg.seed)
    names = SUITES if args.suite == "all" else (args.suite,)
    results = [run_suite(n, prog, ccfg) for n in names]
    lines = []
    for r in results:
        lines.append(r.summary())
        lines += [f"  failure: {f}" for f in r.failures[:10]]
        if r.expected:
            lines.append(f"  {EXPECTED_MARK} a safe extension changed a denotation:")
            lines += [f"  {n}" for n in r.notes if n.startswith("expected")][:5]
        lines += [f"  note: {n}" for n in r.notes if not n.startswith("expected")][:5]
    _emit(cfg, "\n".join(lines), [r.to_json() for r in results])
    return 0 if all(r.ok for r in results) else 1


def cmd_trace(cfg: RunConfig, prog: Program, args) -> int:
    e = parse_expr(args.expr, prog.signature)
    tr = random_trace(prog, e, cfg.seed, cfg.steps)
    lines = [str(tr.start)]
    lines += [f"  -{s.rule}-> {s.snapshot}" for s in tr.steps]
    if not tr.maximal:
        lines.append("  [step bound reached]")
    _emit(cfg, "\n".join(lines), tr.to_json())
    return 0


COMMANDS = {
    "denote": cmd_denote, "observe": cmd_observe, "ext-equiv": cmd_ext_equiv,
    "distinguish": cmd_distinguish, "unsound": cmd_unsound, "check": cmd_check,
    "trace": cmd_trace,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _config(args)
        if args.command == "check" and args.program is None:
            prog = None  # a generated corpus
        else:
            prog = cfg.load()
        return COMMANDS[args.command](cfg, prog, args)
    except (ParseError, SyntaxValidationError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
