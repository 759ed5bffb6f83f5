"""Program extensions and distinguishing contexts.

A safe extension adds rules for function symbols that neither the base
program nor the expressions of interest mention.  A distinguisher for a
pattern ``t`` is a small family of fresh functions ``g_s`` (one per
subpattern ``s`` of ``t``) whose entry point maps an expression to the
total pattern ``hat(t)`` exactly when the expression can produce ``t``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .calculus import DEFAULT_BUDGET, DenotationSet, Denoter, SearchBudget, denote, pattern_key
from .syntax import (
    HOLE, App, ApplyRight, Context, Expr, Program, ProgramRule, Signature, Sym, Var,
    _Bottom, apply, check_symbols, is_pattern, spine, subterms, validate_program,
)

HO = "HO"
FO = "FO"


class UnsafeExtensionError(ValueError):
    def __init__(self, symbols: Iterable[str], reason: str):
        self.symbols = tuple(sorted(symbols))
        super().__init__(f"{reason}: {', '.join(self.symbols)}")


# -- symbol sets -----------------------------------------------------------


def defs(rules: Iterable[ProgramRule]) -> set[str]:
    """Function symbols defined by ``rules``."""
    return {r.function for r in rules}


def fs(e: Expr, sig: Signature) -> set[str]:
    """Function symbols occurring in ``e``."""
    return {x.name for x in subterms(e) if type(x) is Sym and x.name in sig.functions}


def fs_program(p: Program) -> set[str]:
    out: set[str] = set()
    for r in p.rules:
        out.add(r.function)
        for x in (*r.params, r.rhs):
            out |= fs(x, p.signature)
    return out


# -- safe extensions -------------------------------------------------------


@dataclass(frozen=True)
class SafeExtension:
    base: Program
    rules: tuple[ProgramRule, ...]
    merged: Program
    protected: tuple[Expr, ...] = ()


def _infer_extension_signature(base: Program, rules: Sequence[ProgramRule]) -> Signature:
    funs: dict[str, int] = {}
    for r in rules:
        if r.function in base.signature.constructors:
            raise UnsafeExtensionError([r.function], "extension defines a constructor")
        prev = funs.setdefault(r.function, len(r.params))
        if prev != len(r.params):
            raise UnsafeExtensionError([r.function], "inconsistent arity in extension")
    new = {f: a for f, a in funs.items() if f not in base.signature}
    return base.signature.extend(functions=new)


def safe_extend(base: Program, rules: Iterable[ProgramRule], protected: Iterable[Expr] = (),
                *, signature: Signature | None = None) -> SafeExtension:
    """Merge ``rules`` into ``base`` after checking that no symbol they
    define occurs in ``base`` or in the ``protected`` expressions.

    ``signature`` declares the symbols the extension introduces; when it is
    omitted, new function symbols are declared with the arity of their
    rules.
    """
    rules = tuple(rules)
    protected = tuple(protected)
    sig = signature if signature is not None else _infer_extension_signature(base, rules)
    for name, ar in base.signature.constructors.items():
        if sig.constructors.get(name) != ar:
            raise ValueError(f"extension signature drops or changes {name!r}")
    for name, ar in base.signature.functions.items():
        if sig.functions.get(name) != ar:
            raise ValueError(f"extension signature drops or changes {name!r}")
    for e in protected:
        check_symbols(e, base.signature)
    touched = fs_program(base)
    for e in protected:
        touched |= fs(e, base.signature)
    clash = defs(rules) & touched
    if clash:
        raise UnsafeExtensionError(clash, "extension defines symbols already in use")
    merged = base.with_rules((*base.rules, *rules), signature=sig, left_fo=False)
    diags = validate_program(merged)
    if diags:
        raise ValueError("; ".join(d.message for d in diags))
    return SafeExtension(base, rules, merged, protected)


@dataclass(frozen=True)
class InvarianceVerdict:
    equal: bool
    stabilized: bool
    base: DenotationSet
    extended: DenotationSet
    added: frozenset = frozenset()
    removed: frozenset = frozenset()
    expected: bool = False  # a difference is possible in extra-variable mode

    def to_json(self) -> dict:
        return {"equal": self.equal, "stabilized": self.stabilized, "expected": self.expected,
                "added": sorted(map(str, self.added)), "removed": sorted(map(str, self.removed))}


def safe_extension_invariance_check(se: SafeExtension, e: Expr,
                                    budget: SearchBudget = DEFAULT_BUDGET) -> InvarianceVerdict:
    """Compare ``⟦e⟧`` under the base program and under the extension."""
    before = denote(se.base, e, budget)
    after = denote(se.merged, e, budget)
    stabilized = before.complete_at_bound and after.complete_at_bound
    if stabilized:
        added = after.elements - before.elements
        removed = before.elements - after.elements
    else:
        # only flag differences that survive a doubled budget on the other side
        bigger = budget.scaled(2)
        added = after.elements - denote(se.base, e, bigger).elements
        removed = before.elements - denote(se.merged, e, bigger).elements
    return InvarianceVerdict(not added and not removed, stabilized, before, after,
                             frozenset(added), frozenset(removed), se.base.has_extra_variables)


# -- hat and distinguishers ------------------------------------------------


class FreshNames:
    """Allocates generated symbol names that avoid a given set."""

    def __init__(self, avoid: Iterable[str] = ()):
        self.avoid = set(avoid)
        self._given: dict[tuple, str] = {}

    def _fresh(self, key, base: str) -> str:
        if key in self._given:
            return self._given[key]
        name = base if base not in self.avoid else "#" + base
        i = 1
        while name in self.avoid:
            i += 1
            name = f"#{base}{i}"
        self.avoid.add(name)
        self._given[key] = name
        return name

    def bot(self) -> str:
        return self._fresh(("bot",), "bot")

    def applied(self, head: str, m: int) -> str:
        return self._fresh(("app", head, m), f"{head}_{m}")

    def g(self, s: Expr) -> str:
        text = str(s).replace("_|_", "bot")
        return self._fresh(("g", s), "#g_" + re.sub(r"[^A-Za-z0-9_'#]+", "_", text).strip("_"))

    def generated(self) -> dict[tuple, str]:
        return dict(self._given)


def hat(t: Expr, variant: str = HO, names: FreshNames | None = None) -> Expr:
    """Replace ``⊥`` by a fresh constant; in the FO variant also replace each
    applied symbol ``h`` with ``m`` arguments by a fresh ``m``-ary
    constructor."""
    if variant not in (HO, FO):
        raise ValueError(f"unknown variant {variant!r}")
    names = names or FreshNames()
    head, args = spine(t)
    if type(head) is _Bottom:
        return Sym(names.bot())
    if type(head) is Var:
        return head
    new_head = Sym(names.applied(head.name, len(args))) if variant == FO else head
    return apply(new_head, [hat(a, variant, names) for a in args])


@dataclass(frozen=True)
class Distinguisher:
    target: Expr
    variant: str
    entry: str
    hat_target: Expr
    rules: tuple[ProgramRule, ...]
    signature_additions: Signature
    labels: dict = field(default_factory=dict, compare=False)

    @property
    def context(self) -> Context:
        return ApplyRight(Sym(self.entry), HOLE)

    def label(self, name: str | None = None) -> str:
        return self.labels[name or self.entry]


def gen_distinguisher(t: Expr, variant: str = HO, avoid: Iterable[str] = (), *,
                      signature: Signature | None = None) -> Distinguisher:
    """Build the rules of ``g_t`` for a pattern ``t``."""
    if variant not in (HO, FO):
        raise ValueError(f"unknown variant {variant!r}")
    avoid = set(avoid)
    if signature is not None:
        avoid |= set(signature.names())
        if not is_pattern(t, signature):
            raise ValueError(f"{t} is not a pattern")
    names = FreshNames(avoid)
    cons: dict[str, int] = {}
    funs: dict[str, int] = {}
    labels: dict[str, str] = {}
    rules: list[ProgramRule] = []
    done: set[Expr] = set()

    def build(s: Expr) -> str:
        g = names.g(s)
        if s in done:
            return g
        done.add(s)
        funs[g] = 1
        labels[g] = f"g_{{{s}}}"
        head, args = spine(s)
        if type(head) is Var:
            rules.append(ProgramRule(g, (Var("U"),), Var("U")))
        elif type(head) is _Bottom:
            b = names.bot()
            cons[b] = 0
            rules.append(ProgramRule(g, (Var("X"),), Sym(b)))
        else:
            xs = [Var(f"X{i + 1}") for i in range(len(args))]
            if variant == FO:
                out_head = names.applied(head.name, len(args))
                cons[out_head] = len(args)
            else:
                out_head = head.name
            subs = [App(Sym(build(a)), x) for a, x in zip(args, xs)]
            rules.insert(0, ProgramRule(g, (apply(head, xs),), apply(Sym(out_head), subs)))
        return g

    entry = build(t)
    # re-run hat with the same allocator so names agree with the rules
    h = hat(t, variant, names)
    sig_add = Signature(cons, funs)
    ordered = sorted(rules, key=lambda r: 0 if r.function == entry else 1)
    return Distinguisher(t, variant, entry, h, tuple(ordered), sig_add, labels)


# -- distinguishing two expressions ----------------------------------------


@dataclass(frozen=True)
class DistinguishReport:
    target: Expr
    in_left: bool
    distinguisher: Distinguisher
    extension: SafeExtension
    left: DenotationSet
    right: DenotationSet
    observed_left: bool
    observed_right: bool
    confirmed: bool
    kind: str

    @property
    def context(self) -> Context:
        return self.distinguisher.context

    def to_json(self) -> dict:
        from .parser import print_rule
        return {
            "target": str(self.target), "value_in": "left" if self.in_left else "right",
            "context": f"{self.distinguisher.label()} [ ]", "entry": self.distinguisher.entry,
            "hat": str(self.distinguisher.hat_target), "kind": self.kind,
            "rules": [print_rule(r) for r in self.distinguisher.rules],
            "observed_left": self.observed_left, "observed_right": self.observed_right,
            "confirmed": self.confirmed,
        }


def _pattern_height(t: Expr) -> int:
    _, args = spine(t)
    return 1 + max((_pattern_height(a) for a in args), default=0)


def distinguish(program: Program, e: Expr, e2: Expr, budget: SearchBudget = DEFAULT_BUDGET,
                kind: str = HO) -> DistinguishReport | None:
    """Turn a denotational difference between ``e`` and ``e2`` into a
    context that separates their observations, or ``None`` if no
    certain difference exists at the budget."""
    left = denote(program, e, budget)
    right = denote(program, e2, budget)
    candidates = []
    if right.complete_at_bound:
        candidates += [(t, True) for t in sorted(left.elements - right.elements, key=pattern_key)]
    if left.complete_at_bound:
        candidates += [(t, False) for t in sorted(right.elements - left.elements, key=pattern_key)]
    if not candidates:
        return None
    t, in_left = candidates[0]
    variant = FO if kind == FO else HO
    dist = gen_distinguisher(t, variant, program.signature.names(), signature=program.signature)
    sig = program.signature.extend(constructors=dist.signature_additions.constructors,
                                   functions=dist.signature_additions.functions)
    se = safe_extend(program, dist.rules, (e, e2), signature=sig)
    b2 = budget.with_depth(budget.max_or_depth + _pattern_height(t) + 1)
    d = Denoter(se.merged, max_pattern_size=budget.max_pattern_size)
    g = Sym(dist.entry)
    ol = denote(se.merged, App(g, e), b2, denoter=d)
    orr = denote(se.merged, App(g, e2), b2, denoter=d)
    seen_l = dist.hat_target in ol.elements
    seen_r = dist.hat_target in orr.elements
    other = orr if in_left else ol
    confirmed = (seen_l != seen_r) and (seen_l == in_left) and other.complete_at_bound
    return DistinguishReport(t, in_left, dist, se, left, right, seen_l, seen_r, confirmed, variant)


__all__ = [
    "HO", "FO", "UnsafeExtensionError", "defs", "fs", "fs_program", "SafeExtension", "safe_extend",
    "InvarianceVerdict", "safe_extension_invariance_check", "FreshNames", "hat", "Distinguisher",
    "gen_distinguisher", "DistinguishReport", "distinguish",
]
