"""Bounded proof search for the HOCRWL calculus.

Four rules derive statements ``e ⇝ t``:

* ``B``:  ``e ⇝ ⊥`` for every ``e``;
* ``RR``: ``X ⇝ X`` for a variable;
* ``DC``: ``h e1..em ⇝ h t1..tm`` from ``ei ⇝ ti`` when ``h t1..tm`` is a
  partial pattern;
* ``OR``: ``f e1..en a1..am ⇝ t`` from ``ei ⇝ pi θ`` and ``r θ a1..am ⇝ t``
  for a program rule ``f p1..pn -> r``.

Only ``OR`` can recurse without bound, so the search budget counts nested
``OR`` nodes along a branch.  Results are memoised per (expression, budget);
a result computed without ever hitting the budget is a fixpoint and is reused
for every larger budget.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from itertools import islice, product
from typing import Iterable, Iterator

from .syntax import (
    BOT, App, Expr, Program, ProgramRule, Sym, SyntaxValidationError, Var,
    apply, apply_substitution, check_symbols, ground_patterns, is_pattern, match_pattern,
    spine,
)

sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))


@dataclass(frozen=True)
class SearchBudget:
    max_or_depth: int = 8
    max_pattern_size: int = 4
    max_results: int | None = None

    def __post_init__(self):
        if self.max_or_depth < 1 or self.max_pattern_size < 1:
            raise ValueError("search budget fields must be positive")
        if self.max_results is not None and self.max_results < 1:
            raise ValueError("max_results must be positive")

    def with_depth(self, depth: int) -> "SearchBudget":
        return SearchBudget(depth, self.max_pattern_size, self.max_results)

    def scaled(self, factor: int) -> "SearchBudget":
        return self.with_depth(self.max_or_depth * factor)


DEFAULT_BUDGET = SearchBudget()


def pattern_key(t: Expr):
    """Presentation order: smaller first, partial before total, then text."""
    return (t.size, not t.has_bottom, str(t))


@dataclass(frozen=True)
class DenotationSet:
    elements: frozenset
    bound: SearchBudget
    complete_at_bound: bool

    def __contains__(self, t: Expr) -> bool:
        return t in self.elements

    def __iter__(self) -> Iterator[Expr]:
        return iter(self.sorted())

    def __len__(self) -> int:
        return len(self.elements)

    def sorted(self) -> list[Expr]:
        return sorted(self.elements, key=pattern_key)

    def total(self) -> frozenset:
        """The observable part: elements without ``⊥``."""
        return frozenset(t for t in self.elements if not t.has_bottom)


@dataclass(frozen=True, eq=False)
class ProofTree:
    expr: Expr
    value: Expr
    rule: str  # B, RR, DC or OR
    premises: tuple["ProofTree", ...] = ()
    program_rule: ProgramRule | None = None
    theta: dict = field(default_factory=dict)

    @property
    def conclusion(self) -> tuple[Expr, Expr]:
        return self.expr, self.value

    @property
    def depth(self) -> int:
        return 1 + max((p.depth for p in self.premises), default=0)

    @property
    def or_depth(self) -> int:
        below = max((p.or_depth for p in self.premises), default=0)
        return below + (self.rule == "OR")

    def nodes(self) -> Iterator["ProofTree"]:
        yield self
        for p in self.premises:
            yield from p.nodes()

    def to_json(self) -> dict:
        node = {
            "rule": self.rule,
            "conclusion": {"expr": str(self.expr), "value": str(self.value)},
            "premises": [p.to_json() for p in self.premises],
        }
        if self.rule == "OR":
            node["program_rule"] = str(self.program_rule)
            node["theta"] = {x: str(t) for x, t in sorted(self.theta.items())}
        return node

    def render(self, indent: str = "") -> str:
        head = f"{indent}{self.expr} ~> {self.value}  [{self.rule}"
        if self.rule == "OR":
            bindings = ", ".join(f"{x}/{t}" for x, t in sorted(self.theta.items()))
            head += f": {self.program_rule}; {{{bindings}}}"
        lines = [head + "]"]
        lines += [p.render(indent + "  ") for p in self.premises]
        return "\n".join(lines)


class WorkLimitExceeded(Exception):
    """Raised inside a search that evaluated more subterms than allowed."""


class Denoter:
    """Memoised enumeration of ``⟦e⟧`` for one program.

    One instance may serve many queries; budgets are passed per call.
    """

    def __init__(self, program: Program, *, max_pattern_size: int = DEFAULT_BUDGET.max_pattern_size,
                 extra_variables: bool | None = None, max_values: int = 100_000,
                 max_work: int | None = None):
        self.program = program
        self.max_values = max_values
        self.max_work = max_work
        self.work = 0
        self.sig = program.signature
        self.extra_variables = program.extra_variables if extra_variables is None else extra_variables
        self.max_pattern_size = max_pattern_size
        self._fixed: dict[Expr, tuple[frozenset, int]] = {}
        self._cut: dict[tuple[Expr, int], frozenset] = {}
        self._extra_space: tuple[list[Expr], bool] | None = None

    # -- enumeration -------------------------------------------------------

    def den(self, e: Expr, k: int) -> tuple[frozenset, bool]:
        """Values of ``e`` with at most ``k`` nested OR nodes, and whether the
        bound was never hit."""
        fixed = self._fixed.get(e)
        if fixed is not None and fixed[1] <= k:
            return fixed[0], True
        cut = self._cut.get((e, k))
        if cut is not None:
            return cut, False
        self.work += 1
        if self.max_work is not None and self.work > self.max_work:
            raise WorkLimitExceeded(self.work)
        vals, complete = self._compute(e, k)
        if complete:
            if fixed is None or k < fixed[1]:
                self._fixed[e] = (vals, k)
        else:
            self._cut[(e, k)] = vals
        return vals, complete

    def _compute(self, e: Expr, k: int) -> tuple[frozenset, bool]:
        head, args = spine(e)
        out = {BOT}
        th = type(head)
        if th is Var:
            if not args:
                out.add(e)
            return frozenset(out), True
        if th is not Sym:  # ⊥ (possibly over-applied)
            return frozenset(out), True
        name = head.name
        complete = True
        ar = self.sig.constructors.get(name)
        if ar is not None:
            if len(args) <= ar:
                complete = self._dc(head, args, k, out)
            return frozenset(out), complete
        ar = self.sig.functions.get(name)
        if ar is None:
            raise SyntaxValidationError(f"undeclared symbol {name!r}")
        if len(args) < ar:
            complete = self._dc(head, args, k, out)
            return frozenset(out), complete
        rules = self.program.rules_for(name)
        if not rules:
            return frozenset(out), True
        if k <= 0:
            return frozenset(out), False
        for _rule, _theta, body in self._or_instances(name, ar, args, k):
            if body is None:  # an argument search hit the bound
                complete = False
                continue
            vals, c = self.den(body, k - 1)
            complete &= c
            out |= vals
            if len(out) > self.max_values:
                return frozenset(out), False
        return frozenset(out), complete

    def _dc(self, head: Expr, args: list[Expr], k: int, out: set) -> bool:
        complete = True
        choices = []
        for a in args:
            vals, c = self.den(a, k)
            complete &= c
            choices.append(vals)
        room = self.max_values - len(out)
        total = 1
        for vals in choices:
            total *= len(vals)
        if total > room:
            complete = False
        for combo in islice(product(*choices), max(room, 0)):
            out.add(apply(head, combo))
        return complete

    def _or_instances(self, name: str, n: int, args: list[Expr], k: int, ordered: bool = False):
        """Yield ``(rule, θ, body)`` for every OR instance at budget ``k``.

        ``(None, None, None)`` marks a cut: an argument search hit the budget,
        or extra variables ranged over a truncated pattern space.
        """
        rest = args[n:]
        arg_vals = []
        cut = False
        for a in args[:n]:
            vals, c = self.den(a, k - 1)
            cut |= not c
            arg_vals.append(sorted(vals, key=pattern_key) if ordered else vals)
        if cut:
            yield None, None, None
        for rule in self.program.rules_for(name):
            per_param = []
            for p, vals in zip(rule.params, arg_vals):
                matches = []
                for v in vals:
                    theta = match_pattern(p, v)
                    if theta is not None:
                        matches.append(theta)
                if not matches:
                    break
                per_param.append(matches)
            else:
                extra = sorted(rule.extra_vars()) if self.extra_variables else []
                extra_choices = self._extra_choices(extra)
                if extra and not self.extra_space()[1]:
                    yield None, None, None
                for combo in product(*per_param):
                    theta = {}
                    for part in combo:
                        theta.update(part)
                    for inst in extra_choices:
                        full = {**theta, **inst} if inst else theta
                        body = apply(apply_substitution(rule.rhs, full), rest)
                        yield rule, full, body

    def _extra_choices(self, extra: list[str]) -> list[dict]:
        if not extra:
            return [{}]
        space, _ = self.extra_space()
        return [dict(zip(extra, combo)) for combo in product(space, repeat=len(extra))]

    def extra_space(self) -> tuple[list[Expr], bool]:
        """Ground partial patterns used to instantiate extra variables, and
        whether they cover every ground pattern of the signature."""
        if self._extra_space is None:
            space = ground_patterns(self.sig, self.max_pattern_size)
            bigger = ground_patterns(self.sig, self.max_pattern_size + 1)
            self._extra_space = (space, len(bigger) == len(space))
        return self._extra_space

    # -- proof reconstruction ---------------------------------------------

    def derive(self, e: Expr, t: Expr, k: int) -> ProofTree | None:
        if t == BOT:
            return ProofTree(e, t, "B")
        if t not in self.den(e, k)[0]:
            return None
        head, args = spine(e)
        if type(head) is Var and not args:
            return ProofTree(e, t, "RR")
        thead, targs = spine(t)
        if thead == head and len(targs) == len(args) and self._dc_applies(head, len(args)):
            premises = []
            for a, ta in zip(args, targs):
                sub = self.derive(a, ta, k)
                if sub is None:
                    break
                premises.append(sub)
            else:
                return ProofTree(e, t, "DC", tuple(premises))
        if type(head) is Sym and head.name in self.sig.functions:
            n = self.sig.functions[head.name]
            if len(args) >= n and k > 0:
                for rule, theta, body in self._or_instances(head.name, n, args, k, ordered=True):
                    if rule is None or t not in self.den(body, k - 1)[0]:
                        continue
                    premises = [self.derive(a, apply_substitution(p, theta), k - 1)
                                for a, p in zip(args, rule.params)]
                    premises.append(self.derive(body, t, k - 1))
                    if all(premises):
                        return ProofTree(e, t, "OR", tuple(premises), rule, dict(theta))
        return None  # pragma: no cover - membership implies a proof

    def _dc_applies(self, head: Expr, m: int) -> bool:
        if type(head) is not Sym:
            return False
        ar = self.sig.constructors.get(head.name)
        if ar is not None:
            return m <= ar
        return m < self.sig.functions.get(head.name, 0)


def _validated(program: Program, e: Expr) -> None:
    if e.lets:
        raise SyntaxValidationError("the calculus works on let-free expressions")
    check_symbols(e, program.signature)


def denote(program: Program, e: Expr, budget: SearchBudget = DEFAULT_BUDGET, *,
           denoter: Denoter | None = None, extra_variables: bool | None = None) -> DenotationSet:
    """The partial patterns derivable for ``e`` within ``budget``."""
    _validated(program, e)
    d = denoter or Denoter(program, max_pattern_size=budget.max_pattern_size,
                           extra_variables=extra_variables,
                           **({"max_values": budget.max_results} if budget.max_results else {}))
    d.work = 0
    try:
        vals, complete = d.den(e, budget.max_or_depth)
    except WorkLimitExceeded:
        # nothing half-computed was memoised; ⊥ is always a sound answer
        return DenotationSet(frozenset({BOT}), budget, False)
    if budget.max_results is not None and len(vals) > budget.max_results:
        vals = frozenset(sorted(vals, key=pattern_key)[:budget.max_results])
        complete = False
    return DenotationSet(vals, budget, complete)


def derive(program: Program, e: Expr, t: Expr, budget: SearchBudget = DEFAULT_BUDGET, *,
           denoter: Denoter | None = None, extra_variables: bool | None = None) -> ProofTree | None:
    """A proof of ``e ⇝ t`` within ``budget``, or ``None``.

    ``None`` is not a refutation unless the denotation was complete at the
    bound.
    """
    _validated(program, e)
    if not is_pattern(t, program.signature):
        raise ValueError(f"{t} is not a partial pattern")
    d = denoter or Denoter(program, max_pattern_size=budget.max_pattern_size,
                           extra_variables=extra_variables)
    d.work = 0
    try:
        return d.derive(e, t, budget.max_or_depth)
    except WorkLimitExceeded:
        return None


# -- proof checking --------------------------------------------------------


def _canonical_rule(r: ProgramRule) -> ProgramRule:
    order: list[str] = []
    for x in (*r.params, r.rhs):
        for v in _vars_in_order(x):
            if v not in order:
                order.append(v)
    ren = {v: Var(f"_{i}") for i, v in enumerate(order)}
    return ProgramRule(r.function, tuple(apply_substitution(p, ren) for p in r.params),
                       apply_substitution(r.rhs, ren))


def _vars_in_order(e: Expr) -> Iterable[str]:
    if type(e) is Var:
        yield e.name
    elif type(e) is App:
        yield from _vars_in_order(e.fun)
        yield from _vars_in_order(e.arg)


def proof_errors(program: Program, pt: ProofTree, *, extra_variables: bool | None = None) -> list[str]:
    """Every local rule violation in ``pt`` as ``path: message`` strings;
    the path lists premise indices from the root (``root`` for the root)."""
    allow_extra = program.extra_variables if extra_variables is None else extra_variables
    known = {_canonical_rule(r) for r in program.rules}
    errors: list[str] = []
    _check_node(program, pt, (), allow_extra, known, errors)
    return errors


def check_proof(program: Program, pt: ProofTree, *, extra_variables: bool | None = None) -> bool:
    return not proof_errors(program, pt, extra_variables=extra_variables)


def _check_node(program, pt, path, allow_extra, known, errors):
    sig = program.signature
    where = ".".join(map(str, path)) or "root"

    def fail(msg):
        errors.append(f"{where}: {msg}")

    try:
        value_ok = is_pattern(pt.value, sig)
    except SyntaxValidationError as exc:
        fail(str(exc))
        return
    if not value_ok:
        fail(f"{pt.value} is not a partial pattern")
    head, args = spine(pt.expr)

    if pt.rule == "B":
        if pt.value != BOT:
            fail("rule B must conclude bottom")
        if pt.premises:
            fail("rule B has no premises")
    elif pt.rule == "RR":
        if type(pt.expr) is not Var or pt.value != pt.expr:
            fail("rule RR needs a variable on both sides")
        if pt.premises:
            fail("rule RR has no premises")
    elif pt.rule == "DC":
        thead, targs = spine(pt.value)
        if type(head) is not Sym or head.name not in sig:
            fail("rule DC needs a signature symbol at the head")
        elif thead != head or len(targs) != len(args):
            fail("rule DC must keep the head symbol and argument count")
        elif len(pt.premises) != len(args):
            fail(f"rule DC needs {len(args)} premises, found {len(pt.premises)}")
        else:
            for i, (prem, a, ta) in enumerate(zip(pt.premises, args, targs)):
                if prem.conclusion != (a, ta):
                    fail(f"premise {i} must conclude {a} ~> {ta}")
    elif pt.rule == "OR":
        r = pt.program_rule
        theta = pt.theta
        if r is None:
            fail("rule OR must record a program rule")
            return
        if _canonical_rule(r) not in known:
            fail(f"{r} is not a rule of the program")
        n = len(r.params)
        if type(head) is not Sym or head.name != r.function or len(args) < n:
            fail(f"the conclusion is not an application of {r.function} to {n} arguments")
        elif len(pt.premises) != n + 1:
            fail(f"rule OR needs {n + 1} premises, found {len(pt.premises)}")
        else:
            for x, img in theta.items():
                if not is_pattern(img, sig):
                    fail(f"theta({x}) = {img} is not a partial pattern")
            if not allow_extra and not set(theta) <= r.param_vars():
                fail(f"theta binds extra variables {sorted(set(theta) - r.param_vars())}")
            if not allow_extra and r.extra_vars():
                fail(f"the rule has extra variables {sorted(r.extra_vars())}")
            for i, (prem, a, p) in enumerate(zip(pt.premises, args, r.params)):
                expected = (a, apply_substitution(p, theta))
                if prem.conclusion != expected:
                    fail(f"premise {i} must conclude {expected[0]} ~> {expected[1]}")
            body = apply(apply_substitution(r.rhs, theta), args[n:])
            if pt.premises[-1].conclusion != (body, pt.value):
                fail(f"last premise must conclude {body} ~> {pt.value}")
    else:
        fail(f"unknown rule {pt.rule!r}")
        return

    for i, prem in enumerate(pt.premises):
        _check_node(program, prem, (*path, i), allow_extra, known, errors)
