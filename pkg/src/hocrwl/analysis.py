"""Semantic comparisons built on the calculus: observations, n-extensional
equivalence, compositionality and unsoundness witnesses for extensional
semantics.

Every verdict here is bounded.  ``equivalent-at-bound`` only says that no
difference showed up on the enumerated grid; a reported difference is only
returned as ``distinguished`` when the side that lacks the value was
searched exhaustively, so it is a genuine counterexample.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from .calculus import DEFAULT_BUDGET, DenotationSet, Denoter, SearchBudget, denote, pattern_key
from .syntax import (
    HOLE, ApplyLeft, ApplyRight, Context, Expr, Program, Sym, Var, apply,
    apply_context, ground_patterns, is_fo_pattern,
)

HO = "HO"
FO = "FO"

EQUIVALENT = "equivalent-at-bound"
DISTINGUISHED = "distinguished"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class Observation:
    kind: str
    values: frozenset
    exhausted: bool

    def sorted(self) -> list[Expr]:
        return sorted(self.values, key=pattern_key)


def _filter_observable(program: Program, den: DenotationSet, kind: str) -> frozenset:
    vals = den.total()
    if kind == FO:
        vals = frozenset(t for t in vals if is_fo_pattern(t, program.signature))
    return vals


def observe(program: Program, e: Expr, kind: str = HO, budget: SearchBudget = DEFAULT_BUDGET,
            *, denoter: Denoter | None = None) -> Observation:
    """Total values of ``e`` (only FO-patterns when ``kind`` is ``FO``)."""
    if kind not in (HO, FO):
        raise ValueError(f"unknown observation kind {kind!r}")
    den = denote(program, e, budget, denoter=denoter)
    return Observation(kind, _filter_observable(program, den, kind), den.complete_at_bound)


# -- extensional equivalence ----------------------------------------------


def argument_grid(program: Program, size_bound: int) -> list[Expr]:
    """Candidate arguments: ground partial patterns up to ``size_bound``,
    total ones first, then a single free variable standing for an unknown."""
    pool = sorted(ground_patterns(program.signature, size_bound),
                  key=lambda t: (t.has_bottom, t.size, str(t)))
    return pool + [Var("X")]


@dataclass(frozen=True)
class EquivVerdict:
    status: str
    n: int
    witness: tuple[Expr, ...] | None = None
    value: Expr | None = None
    value_in_left: bool | None = None
    tuples_checked: int = 0
    left: DenotationSet | None = None
    right: DenotationSet | None = None

    @property
    def equivalent(self) -> bool:
        return self.status == EQUIVALENT

    def to_json(self) -> dict:
        out = {"status": self.status, "n": self.n, "tuples_checked": self.tuples_checked}
        if self.witness is not None:
            out["witness"] = [str(t) for t in self.witness]
            out["value"] = str(self.value)
            out["value_in"] = "left" if self.value_in_left else "right"
        return out


def _certain_difference(a: DenotationSet, b: DenotationSet):
    """A value present on one side and provably absent from the other."""
    if b.complete_at_bound:
        extra = sorted(a.elements - b.elements, key=pattern_key)
        if extra:
            return extra[0], True
    if a.complete_at_bound:
        extra = sorted(b.elements - a.elements, key=pattern_key)
        if extra:
            return extra[0], False
    return None


def ext_equiv(program: Program, e: Expr, e2: Expr, n: int, size_bound: int = 2,
              budget: SearchBudget = DEFAULT_BUDGET, *, denoter: Denoter | None = None) -> EquivVerdict:
    """Compare ``⟦e t1..tn⟧`` and ``⟦e2 t1..tn⟧`` over a grid of pattern
    tuples; pattern arguments suffice by compositionality."""
    if n < 0:
        raise ValueError("n must be non-negative")
    d = denoter or Denoter(program, max_pattern_size=budget.max_pattern_size)
    if e == e2:
        return EquivVerdict(EQUIVALENT, n)
    grid = argument_grid(program, size_bound)
    uncertain = None
    checked = 0
    for args in product(grid, repeat=n):
        checked += 1
        left = denote(program, apply(e, args), budget, denoter=d)
        right = denote(program, apply(e2, args), budget, denoter=d)
        if left.elements == right.elements:
            continue
        diff = _certain_difference(left, right)
        if diff is None:
            # retry with more room before giving up on this tuple
            bigger = budget.scaled(2)
            left = denote(program, apply(e, args), bigger, denoter=d)
            right = denote(program, apply(e2, args), bigger, denoter=d)
            diff = _certain_difference(left, right)
        if diff is not None:
            return EquivVerdict(DISTINGUISHED, n, tuple(args), diff[0], diff[1], checked, left, right)
        if left.elements != right.elements and uncertain is None:
            uncertain = EquivVerdict(INCONCLUSIVE, n, tuple(args), None, None, 0, left, right)
    if uncertain is not None:
        return EquivVerdict(INCONCLUSIVE, n, uncertain.witness, None, None, checked,
                            uncertain.left, uncertain.right)
    return EquivVerdict(EQUIVALENT, n, tuples_checked=checked)


@dataclass
class ExtSemantics:
    arity: int
    table: dict = field(default_factory=dict)

    def __eq__(self, other):
        if not isinstance(other, ExtSemantics) or other.arity != self.arity:
            return NotImplemented
        if self.table.keys() != other.table.keys():
            return False
        return all(self.table[k].elements == other.table[k].elements for k in self.table)

    def __getitem__(self, args) -> DenotationSet:
        if not isinstance(args, tuple):
            args = (args,)
        return self.table[args]


def ext_semantics(program: Program, e: Expr, n: int, size_bound: int = 2,
                  budget: SearchBudget = DEFAULT_BUDGET, *, denoter: Denoter | None = None) -> ExtSemantics:
    """Tabulate ``t1..tn ↦ ⟦e t1..tn⟧`` over the bounded argument grid."""
    if n < 0:
        raise ValueError("n must be non-negative")
    d = denoter or Denoter(program, max_pattern_size=budget.max_pattern_size)
    grid = argument_grid(program, size_bound)
    return ExtSemantics(n, {args: denote(program, apply(e, args), budget, denoter=d)
                            for args in product(grid, repeat=n)})


# -- compositionality ------------------------------------------------------


@dataclass(frozen=True)
class CompositionVerdict:
    equal: bool
    stabilized: bool
    direct: frozenset
    via_values: frozenset
    missing_from_union: frozenset = frozenset()
    missing_from_direct: frozenset = frozenset()

    def to_json(self) -> dict:
        return {
            "equal": self.equal, "stabilized": self.stabilized,
            "missing_from_union": sorted(map(str, self.missing_from_union)),
            "missing_from_direct": sorted(map(str, self.missing_from_direct)),
        }


def _through_values(program, c, e, budget, d) -> tuple[frozenset, bool]:
    inner = denote(program, e, budget, denoter=d)
    complete = inner.complete_at_bound
    out: set = set()
    for t in inner.elements:
        part = denote(program, apply_context(c, t), budget, denoter=d)
        complete &= part.complete_at_bound
        out |= part.elements
    return frozenset(out), complete


def check_compositionality(program: Program, e: Expr, c: Context,
                           budget: SearchBudget = DEFAULT_BUDGET, *,
                           denoter: Denoter | None = None) -> CompositionVerdict:
    """Compare ``⟦C[e]⟧`` with the union of ``⟦C[t]⟧`` over ``t ∈ ⟦e⟧``.

    When both sides are exhaustive the sets must coincide.  Otherwise each
    side is only required to be included in the other side computed with
    twice the budget.
    """
    d = denoter or Denoter(program, max_pattern_size=budget.max_pattern_size)
    direct = denote(program, apply_context(c, e), budget, denoter=d)
    union, union_complete = _through_values(program, c, e, budget, d)
    stabilized = direct.complete_at_bound and union_complete
    if stabilized:
        return CompositionVerdict(direct.elements == union, True, direct.elements, union,
                                  direct.elements - union, union - direct.elements)
    bigger = budget.scaled(2)
    direct2 = denote(program, apply_context(c, e), bigger, denoter=d)
    union2, _ = _through_values(program, c, e, bigger, d)
    missing_u = direct.elements - union2
    missing_d = union - direct2.elements
    return CompositionVerdict(not missing_u and not missing_d, False, direct.elements, union,
                              missing_u, missing_d)


# -- unsoundness of extensional semantics ---------------------------------


@dataclass(frozen=True)
class UnsoundnessReport:
    status: str  # witness, none, not-applicable
    context: Context | None = None
    value: Expr | None = None
    value_in_left: bool | None = None
    kind: str = FO
    left: Observation | None = None
    right: Observation | None = None
    contexts_checked: int = 0
    equivalence: EquivVerdict | None = None

    def to_json(self) -> dict:
        from .parser import print_context
        out = {"status": self.status, "kind": self.kind, "contexts_checked": self.contexts_checked}
        if self.context is not None:
            out["context"] = print_context(self.context)
            out["value"] = str(self.value)
            out["value_in"] = "left" if self.value_in_left else "right"
            out["left"] = [str(t) for t in self.left.sorted()]
            out["right"] = [str(t) for t in self.right.sorted()]
        return out


def candidate_contexts(program: Program, max_args: int = 3, filler_size: int = 1,
                       nesting: int = 1):
    """Contexts ``h a1 .. [ ] .. am`` over the program's symbols with up to
    ``max_args`` arguments; fillers are small total ground patterns.  With
    ``nesting > 1`` such contexts are also placed inside one another."""
    sig = program.signature
    fillers = [t for t in ground_patterns(sig, filler_size) if not t.has_bottom]
    heads = [Sym(f) for f in sorted(sig.functions, key=lambda f: (sig.functions[f], f))]
    heads += [Sym(c) for c in sorted(sig.constructors) if sig.constructors[c] > 0]
    yield HOLE
    layers = [HOLE]
    for _ in range(nesting):
        new_layer = []
        for inner in layers:
            for m in range(1, max_args + 1):
                for head in heads:
                    ar = sig.constructors.get(head.name)
                    if ar is not None and m > ar:
                        continue
                    for pos in range(m):
                        for fill in product(fillers, repeat=m - 1):
                            c: Context = ApplyRight(apply(head, fill[:pos]), inner)
                            for a in fill[pos:]:
                                c = ApplyLeft(c, a)
                            new_layer.append(c)
                            yield c
        layers = new_layer


def unsoundness_witness(program: Program, e: Expr, e2: Expr, n: int,
                        budget: SearchBudget = DEFAULT_BUDGET, *, kind: str = FO,
                        size_bound: int = 2, max_args: int = 3, nesting: int = 1) -> UnsoundnessReport:
    """Look for a context separating the observations of two expressions
    that the n-extensional semantics identifies."""
    d = Denoter(program, max_pattern_size=budget.max_pattern_size)
    eq = ext_equiv(program, e, e2, n, size_bound, budget, denoter=d)
    if not eq.equivalent:
        return UnsoundnessReport("not-applicable", kind=kind, equivalence=eq)
    if e == e2:
        return UnsoundnessReport("none", kind=kind, equivalence=eq)
    checked = 0
    for c in candidate_contexts(program, max_args=max_args, nesting=nesting):
        checked += 1
        left = denote(program, apply_context(c, e), budget, denoter=d)
        right = denote(program, apply_context(c, e2), budget, denoter=d)
        lo = _filter_observable(program, left, kind)
        ro = _filter_observable(program, right, kind)
        if lo == ro:
            continue
        lobs = Observation(kind, lo, left.complete_at_bound)
        robs = Observation(kind, ro, right.complete_at_bound)
        if right.complete_at_bound and lo - ro:
            value = sorted(lo - ro, key=pattern_key)[0]
            return UnsoundnessReport("witness", c, value, True, kind, lobs, robs, checked, eq)
        if left.complete_at_bound and ro - lo:
            value = sorted(ro - lo, key=pattern_key)[0]
            return UnsoundnessReport("witness", c, value, False, kind, lobs, robs, checked, eq)
    return UnsoundnessReport("none", kind=kind, contexts_checked=checked, equivalence=eq)


__all__ = [
    "HO", "FO", "EQUIVALENT", "DISTINGUISHED", "INCONCLUSIVE", "Observation", "observe",
    "EquivVerdict", "ext_equiv", "ExtSemantics", "ext_semantics", "CompositionVerdict",
    "check_compositionality", "UnsoundnessReport", "candidate_contexts", "unsoundness_witness",
    "argument_grid",
]
