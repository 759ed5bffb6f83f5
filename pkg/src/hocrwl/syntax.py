"""Term language: signatures, applicative expressions, patterns, contexts,
substitutions and programs.

Expressions are immutable and hash-consed in the weak sense that every node
caches its hash, its ``⊥`` flag and its size, so they can be used freely as
dictionary keys by the search engines.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import product
from typing import Iterable, Iterator, Mapping

BOTTOM_NAME = "_|_"


class SyntaxValidationError(ValueError):
    """An expression or program does not fit its signature."""


# -- signatures ------------------------------------------------------------


class Signature:
    """Constructor and function symbols with their arities.

    ``⊥`` is implicit: it is a 0-ary constructor that is never stored here and
    can never be declared.
    """

    __slots__ = ("constructors", "functions")

    def __init__(self, constructors: Mapping[str, int] = (), functions: Mapping[str, int] = ()):
        cs = dict(constructors)
        fs = dict(functions)
        clash = cs.keys() & fs.keys()
        if clash:
            raise SyntaxValidationError(
                f"symbols declared both as constructor and function: {sorted(clash)}")
        if BOTTOM_NAME in cs or BOTTOM_NAME in fs:
            raise SyntaxValidationError("the bottom symbol is reserved")
        for name, ar in (*cs.items(), *fs.items()):
            if ar < 0:
                raise SyntaxValidationError(f"negative arity for {name}")
        self.constructors = cs
        self.functions = fs

    def __repr__(self):
        cs = ", ".join(f"{c}/{a}" for c, a in sorted(self.constructors.items()))
        fs = ", ".join(f"{f}/{a}" for f, a in sorted(self.functions.items()))
        return f"Signature(CS={{{cs}}}, FS={{{fs}}})"

    def __eq__(self, other):
        return (isinstance(other, Signature) and self.constructors == other.constructors
                and self.functions == other.functions)

    def __hash__(self):
        return hash((frozenset(self.constructors.items()), frozenset(self.functions.items())))

    def __contains__(self, name: str) -> bool:
        return name in self.constructors or name in self.functions

    def is_constructor(self, name: str) -> bool:
        return name in self.constructors

    def is_function(self, name: str) -> bool:
        return name in self.functions

    def arity(self, name: str) -> int:
        if name in self.constructors:
            return self.constructors[name]
        if name in self.functions:
            return self.functions[name]
        raise SyntaxValidationError(f"undeclared symbol {name!r}")

    def names(self) -> set[str]:
        return set(self.constructors) | set(self.functions)

    def extend(self, constructors: Mapping[str, int] = (), functions: Mapping[str, int] = ()) -> "Signature":
        """Return a new signature with extra symbols; redeclaring with a
        different arity or kind is an error."""
        cs = dict(self.constructors)
        fs = dict(self.functions)
        for name, ar in dict(constructors).items():
            if name in fs or cs.get(name, ar) != ar:
                raise SyntaxValidationError(f"conflicting declaration for {name}")
            cs[name] = ar
        for name, ar in dict(functions).items():
            if name in cs or fs.get(name, ar) != ar:
                raise SyntaxValidationError(f"conflicting declaration for {name}")
            fs[name] = ar
        return Signature(cs, fs)


# -- expressions -----------------------------------------------------------


class Expr:
    """Base class of applicative expressions (plus ``Let`` for the rewriting
    engine).  Subclasses set ``_hash``, ``has_bottom``, ``size`` and
    ``lets`` (number of let nodes)."""

    __slots__ = ("_hash", "has_bottom", "size", "lets")

    def __hash__(self):
        return self._hash

    def __call__(self, *args: "Expr") -> "Expr":
        return apply(self, args)

    @property
    def total(self) -> bool:
        return not self.has_bottom

    def __str__(self):
        from .parser import print_expr
        return print_expr(self)


class Var(Expr):
    __slots__ = ("name",)
    __hash__ = Expr.__hash__

    def __init__(self, name: str):
        self.name = name
        self._hash = hash(("V", name))
        self.has_bottom = False
        self.size = 1
        self.lets = 0

    def __eq__(self, other):
        return self is other or (type(other) is Var and other.name == self.name)

    def __repr__(self):
        return f"Var({self.name!r})"


class Sym(Expr):
    __slots__ = ("name",)
    __hash__ = Expr.__hash__

    def __init__(self, name: str):
        self.name = name
        self._hash = hash(("S", name))
        self.has_bottom = False
        self.size = 1
        self.lets = 0

    def __eq__(self, other):
        return self is other or (type(other) is Sym and other.name == self.name)

    def __repr__(self):
        return f"Sym({self.name!r})"


class _Bottom(Expr):
    __slots__ = ()
    __hash__ = Expr.__hash__

    def __init__(self):
        self._hash = hash("BOT")
        self.has_bottom = True
        self.size = 1
        self.lets = 0

    def __eq__(self, other):
        return type(other) is _Bottom

    def __repr__(self):
        return "BOT"

    def __reduce__(self):
        return (_bottom, ())


def _bottom():
    return BOT


BOT: Expr = _Bottom()
Bottom = _Bottom


class App(Expr):
    __slots__ = ("fun", "arg")
    __hash__ = Expr.__hash__

    def __init__(self, fun: Expr, arg: Expr):
        self.fun = fun
        self.arg = arg
        self._hash = hash(("A", fun._hash, arg._hash))
        self.has_bottom = fun.has_bottom or arg.has_bottom
        self.size = fun.size + arg.size
        self.lets = fun.lets + arg.lets

    def __eq__(self, other):
        return self is other or (
            type(other) is App and self._hash == other._hash
            and self.fun == other.fun and self.arg == other.arg)

    def __repr__(self):
        return f"App({self.fun!r}, {self.arg!r})"


class Let(Expr):
    """``let var = bound in body``; only produced by the rewriting engine."""

    __slots__ = ("var", "bound", "body")
    __hash__ = Expr.__hash__

    def __init__(self, var: str, bound: Expr, body: Expr):
        self.var = var
        self.bound = bound
        self.body = body
        self._hash = hash(("L", var, bound._hash, body._hash))
        self.has_bottom = bound.has_bottom or body.has_bottom
        self.size = 1 + bound.size + body.size
        self.lets = 1 + bound.lets + body.lets

    def __eq__(self, other):
        return self is other or (
            type(other) is Let and self._hash == other._hash and self.var == other.var
            and self.bound == other.bound and self.body == other.body)

    def __repr__(self):
        return f"Let({self.var!r}, {self.bound!r}, {self.body!r})"


def apply(head: Expr, args: Iterable[Expr]) -> Expr:
    e = head
    for a in args:
        e = App(e, a)
    return e


def spine(e: Expr) -> tuple[Expr, list[Expr]]:
    """Uncurry ``h e1 ... em`` into ``(h, [e1, ..., em])``."""
    args = []
    while type(e) is App:
        args.append(e.arg)
        e = e.fun
    args.reverse()
    return e, args


def variables(e: Expr) -> set[str]:
    """Free variables (let binders are not counted as free)."""
    out: set[str] = set()
    _collect_vars(e, out)
    return out


def _collect_vars(e, out):
    t = type(e)
    if t is Var:
        out.add(e.name)
    elif t is App:
        _collect_vars(e.fun, out)
        _collect_vars(e.arg, out)
    elif t is Let:
        _collect_vars(e.bound, out)
        inner: set[str] = set()
        _collect_vars(e.body, inner)
        inner.discard(e.var)
        out |= inner


def symbols(e: Expr) -> set[str]:
    out: set[str] = set()
    stack = [e]
    while stack:
        x = stack.pop()
        t = type(x)
        if t is Sym:
            out.add(x.name)
        elif t is App:
            stack += (x.fun, x.arg)
        elif t is Let:
            stack += (x.bound, x.body)
    return out


def subterms(e: Expr) -> Iterator[Expr]:
    """Pre-order traversal."""
    stack = [e]
    while stack:
        x = stack.pop()
        yield x
        t = type(x)
        if t is App:
            stack += (x.arg, x.fun)
        elif t is Let:
            stack += (x.body, x.bound)


def check_symbols(e: Expr, sig: Signature) -> None:
    for name in symbols(e):
        if name not in sig:
            raise SyntaxValidationError(f"undeclared symbol {name!r}")


# -- patterns --------------------------------------------------------------


def is_pattern(e: Expr, sig: Signature) -> bool:
    """Partial patterns: ``X``, ``c t1..tn`` (n <= ar c), ``f t1..tm`` (m < ar f)
    with ``⊥`` counted as a 0-ary constructor."""
    head, args = spine(e)
    th = type(head)
    if th is Var:
        return not args
    if th is _Bottom:
        return not args
    if th is not Sym:
        return False
    name = head.name
    if name in sig.constructors:
        if len(args) > sig.constructors[name]:
            return False
    elif name in sig.functions:
        if len(args) >= sig.functions[name]:
            return False
    else:
        raise SyntaxValidationError(f"undeclared symbol {name!r}")
    return all(is_pattern(a, sig) for a in args)


def is_fo_pattern(e: Expr, sig: Signature) -> bool:
    """First-order constructor terms: variables and fully applied
    constructors only (``⊥`` is allowed as a 0-ary leaf)."""
    head, args = spine(e)
    th = type(head)
    if th is Var or th is _Bottom:
        return not args
    if th is not Sym:
        return False
    if head.name not in sig:
        raise SyntaxValidationError(f"undeclared symbol {head.name!r}")
    if sig.constructors.get(head.name) != len(args):
        return False
    return all(is_fo_pattern(a, sig) for a in args)


def match_pattern(p: Expr, v: Expr) -> dict[str, Expr] | None:
    """Match a linear, ⊥-free parameter ``p`` against a value ``v``.

    Returns the unique substitution with ``p θ == v`` or ``None``.
    """
    theta: dict[str, Expr] = {}
    return theta if _match(p, v, theta) else None


def _match(p, v, theta):
    tp = type(p)
    if tp is Var:
        theta[p.name] = v
        return True
    if tp is App:
        return type(v) is App and _match(p.fun, v.fun, theta) and _match(p.arg, v.arg, theta)
    return p == v


# -- substitutions and contexts -------------------------------------------

PSubstitution = Mapping[str, Expr]


def apply_substitution(e: Expr, theta: PSubstitution) -> Expr:
    """Simultaneous replacement of free variables."""
    if not theta:
        return e
    return _subst(e, theta)


def _subst(e, theta):
    t = type(e)
    if t is Var:
        return theta.get(e.name, e)
    if t is App:
        f = _subst(e.fun, theta)
        a = _subst(e.arg, theta)
        if f is e.fun and a is e.arg:
            return e
        return App(f, a)
    if t is Let:
        inner = theta
        if e.var in theta:
            inner = {k: v for k, v in theta.items() if k != e.var}
        b = _subst(e.bound, theta)
        body = _subst(e.body, inner) if inner else e.body
        if b is e.bound and body is e.body:
            return e
        return Let(e.var, b, body)
    return e


class Context:
    """One-hole contexts ``[] | C e | e C``."""

    __slots__ = ()


@dataclass(frozen=True)
class Hole(Context):
    pass


@dataclass(frozen=True)
class ApplyLeft(Context):
    """``C e``: the hole is in the function position."""
    ctx: Context
    arg: Expr


@dataclass(frozen=True)
class ApplyRight(Context):
    """``e C``: the hole is in the argument position."""
    fun: Expr
    ctx: Context


HOLE = Hole()


def apply_context(c: Context, e: Expr) -> Expr:
    if isinstance(c, Hole):
        return e
    if isinstance(c, ApplyLeft):
        return App(apply_context(c.ctx, e), c.arg)
    if isinstance(c, ApplyRight):
        return App(c.fun, apply_context(c.ctx, e))
    raise TypeError(f"not a context: {c!r}")


def context_depth(c: Context) -> int:
    d = 0
    while not isinstance(c, Hole):
        c = c.ctx
        d += 1
    return d


# -- programs --------------------------------------------------------------


@dataclass(frozen=True)
class ProgramRule:
    function: str
    params: tuple[Expr, ...]
    rhs: Expr

    @property
    def lhs(self) -> Expr:
        return apply(Sym(self.function), self.params)

    def param_vars(self) -> set[str]:
        out: set[str] = set()
        for p in self.params:
            out |= variables(p)
        return out

    def extra_vars(self) -> set[str]:
        return variables(self.rhs) - self.param_vars()

    def __str__(self):
        from .parser import print_rule
        return print_rule(self)


@dataclass(frozen=True)
class Diagnostic:
    rule_index: int | None
    kind: str
    message: str

    def __str__(self):
        where = f"rule {self.rule_index}: " if self.rule_index is not None else ""
        return f"{where}{self.kind}: {self.message}"


@dataclass(frozen=True)
class Program:
    signature: Signature
    rules: tuple[ProgramRule, ...] = ()
    extra_variables: bool = False
    left_fo: bool = False

    @cached_property
    def rules_by_function(self) -> dict[str, tuple[ProgramRule, ...]]:
        table: dict[str, list[ProgramRule]] = {}
        for r in self.rules:
            table.setdefault(r.function, []).append(r)
        return {f: tuple(rs) for f, rs in table.items()}

    def rules_for(self, f: str) -> tuple[ProgramRule, ...]:
        return self.rules_by_function.get(f, ())

    @cached_property
    def has_extra_variables(self) -> bool:
        return any(r.extra_vars() for r in self.rules)

    def with_rules(self, rules: Iterable[ProgramRule], signature: Signature | None = None,
                   **flags) -> "Program":
        return Program(signature or self.signature, tuple(rules),
                       flags.get("extra_variables", self.extra_variables),
                       flags.get("left_fo", self.left_fo))

    def __str__(self):
        from .parser import print_program
        return print_program(self)


def is_linear(params: Iterable[Expr]) -> bool:
    seen: set[str] = set()
    for p in params:
        for x in subterms(p):
            if type(x) is Var:
                if x.name in seen:
                    return False
                seen.add(x.name)
    return True


def validate_program(p: Program) -> list[Diagnostic]:
    sig = p.signature
    out: list[Diagnostic] = []
    for i, r in enumerate(p.rules):
        if r.function not in sig.functions:
            kind = "constructor-defined" if r.function in sig.constructors else "undeclared"
            out.append(Diagnostic(i, kind, f"{r.function!r} is not a declared function"))
            continue
        ar = sig.functions[r.function]
        if len(r.params) != ar:
            out.append(Diagnostic(i, "arity-mismatch",
                                  f"{r.function} has arity {ar} but the rule has {len(r.params)} parameters"))
        undeclared = set()
        for e in (*r.params, r.rhs):
            undeclared |= {s for s in symbols(e) if s not in sig}
        if undeclared:
            out.append(Diagnostic(i, "undeclared", f"undeclared symbols {sorted(undeclared)}"))
            continue
        for j, t in enumerate(r.params):
            if t.has_bottom:
                out.append(Diagnostic(i, "bottom-in-lhs", f"parameter {j + 1} contains bottom"))
            elif not is_pattern(t, sig):
                out.append(Diagnostic(i, "non-pattern", f"parameter {j + 1} is not a pattern"))
            elif p.left_fo and not is_fo_pattern(t, sig):
                out.append(Diagnostic(i, "ho-pattern", f"parameter {j + 1} is a HO-pattern in a left-FO program"))
        if not is_linear(r.params):
            out.append(Diagnostic(i, "non-linear", "a variable occurs more than once in the left side"))
        extra = r.extra_vars()
        if extra and not p.extra_variables:
            out.append(Diagnostic(i, "extra-variable", f"extra variables {sorted(extra)} in the right side"))
    return out


def ground_patterns(sig: Signature, max_size: int, *, partial: bool = True) -> list[Expr]:
    """All ground (partial) patterns over ``sig`` with at most ``max_size``
    symbol occurrences, ordered by size then by construction order."""
    by_size: dict[int, list[Expr]] = {}
    heads = [(Sym(c), a) for c, a in sorted(sig.constructors.items())]
    heads += [(Sym(f), a - 1) for f, a in sorted(sig.functions.items()) if a > 0]
    for size in range(1, max_size + 1):
        level: list[Expr] = [BOT] if (size == 1 and partial) else []
        for head, max_args in heads:
            for k in range(0, max_args + 1):
                for args in _arg_tuples(by_size, k, size - 1):
                    level.append(apply(head, args))
        by_size[size] = level
    return [t for s in range(1, max_size + 1) for t in by_size[s]]


def _arg_tuples(by_size, k, budget):
    if k == 0:
        if budget == 0:
            yield ()
        return
    for s in range(1, budget - (k - 1) + 1):
        for first in by_size.get(s, ()):
            for rest in _arg_tuples(by_size, k - 1, budget - s):
                yield (first, *rest)


def bottom_prefixes(t: Expr) -> set[Expr]:
    """Every pattern obtained from ``t`` by replacing subpatterns with ``⊥``."""
    head, args = spine(t)
    out = {BOT}
    if type(head) is Var and not args:
        out.add(t)
        return out
    choices = [bottom_prefixes(a) for a in args]
    for combo in product(*choices):
        out.add(apply(head, combo))
    return out
