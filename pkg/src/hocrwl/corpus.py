"""Random small programs, expressions, patterns and contexts for the
property suites and ``hocrwl check``."""

from __future__ import annotations

import random
from dataclasses import dataclass

from .syntax import (
    BOT, HOLE, App, ApplyLeft, ApplyRight, Context, Expr, Program, ProgramRule, Signature,
    Sym, Var, apply, ground_patterns, validate_program,
)

CONSTRUCTOR_POOL = [("z", 0), ("a", 0), ("s", 1), ("c", 2)]
FUNCTION_NAMES = ["f", "g", "h", "k"]


@dataclass(frozen=True)
class CorpusConfig:
    max_rules: int = 6
    max_functions: int = 4
    max_pattern_size: int = 3
    max_rhs_size: int = 5
    max_expr_size: int = 4
    recursion_prob: float = 0.15
    ho_prob: float = 0.3


class Generator:
    """Seeded generator; equal seeds give equal corpora."""

    def __init__(self, seed: int = 0, config: CorpusConfig = CorpusConfig()):
        self.rng = random.Random(seed)
        self.cfg = config
        self._var_counter = 0

    # -- signatures and programs ------------------------------------------

    def signature(self) -> Signature:
        rng = self.rng
        cons = [CONSTRUCTOR_POOL[0]] + [c for c in CONSTRUCTOR_POOL[1:] if rng.random() < 0.6]
        nfun = rng.randint(1, self.cfg.max_functions)
        funs = {name: rng.choice((0, 1, 1, 1, 2, 2)) for name in FUNCTION_NAMES[:nfun]}
        return Signature(dict(cons), funs)

    def program(self, sig: Signature | None = None) -> Program:
        sig = sig or self.signature()
        rng = self.rng
        order = list(sig.functions)
        rules = []
        for _ in range(rng.randint(1, self.cfg.max_rules)):
            f = rng.choice(order)
            self._var_counter = 0
            params = tuple(self.param_pattern(sig, self.cfg.max_pattern_size)
                           for _ in range(sig.functions[f]))
            pvars = [x for p in params for x in _var_names(p)]
            if rng.random() < self.cfg.recursion_prob:
                callable_ = order
            else:
                callable_ = order[order.index(f) + 1:]
            rhs = self.expr(sig, rng.randint(1, self.cfg.max_rhs_size), pvars, callable_)
            rules.append(ProgramRule(f, params, rhs))
        prog = Program(sig, tuple(rules))
        assert not validate_program(prog), validate_program(prog)
        return prog

    def param_pattern(self, sig: Signature, size: int) -> Expr:
        """A ⊥-free pattern with fresh variables (so tuples stay linear)."""
        rng = self.rng
        if size <= 1 or rng.random() < 0.45:
            if rng.random() < 0.7:
                return self._fresh_var()
            return self._leaf_symbol(sig)
        heads = [(c, a) for c, a in sig.constructors.items() if a > 0]
        if rng.random() < self.cfg.ho_prob:
            heads += [(f, a - 1) for f, a in sig.functions.items() if a > 1]
        if not heads:
            return self._fresh_var()
        h, max_args = rng.choice(heads)
        nargs = max_args if rng.random() < 0.8 else rng.randint(0, max_args)
        args = []
        budget = size - 1
        for i in range(nargs):
            if budget <= 0:
                break
            s = rng.randint(1, budget - (nargs - i - 1)) if budget > nargs - i - 1 else 1
            args.append(self.param_pattern(sig, s))
            budget -= s
        return apply(Sym(h), args)

    def _fresh_var(self) -> Var:
        self._var_counter += 1
        return Var(f"X{self._var_counter}")

    def _leaf_symbol(self, sig: Signature) -> Expr:
        choices = [c for c, a in sig.constructors.items() if a == 0]
        choices += [h for h, a in {**sig.constructors, **sig.functions}.items()
                    if a > 0 and self.rng.random() < self.cfg.ho_prob]
        return Sym(self.rng.choice(choices))

    # -- expressions -------------------------------------------------------

    def expr(self, sig: Signature, size: int, variables=(), functions=None) -> Expr:
        """Random expression of roughly ``size`` symbols; ``functions``
        restricts which function symbols may appear."""
        rng = self.rng
        funs = list(sig.functions) if functions is None else list(functions)
        cons = list(sig.constructors)
        if size <= 1:
            pool = [Var(v) for v in variables] * 2
            pool += [Sym(c) for c in cons if sig.constructors[c] == 0]
            pool += [Sym(f) for f in funs]
            pool += [Sym(c) for c in cons if sig.constructors[c] > 0 and rng.random() < 0.2]
            return rng.choice(pool)
        kinds = ["con"] * 2 + ["fun"] * 3 * bool(funs) + ["var"] * bool(variables)
        kind = rng.choice(kinds)
        if kind == "var":
            head: Expr = Var(rng.choice(list(variables)))
            nargs = rng.randint(1, 2)
        elif kind == "fun":
            name = rng.choice(funs)
            head = Sym(name)
            ar = sig.functions[name]
            nargs = ar if rng.random() < 0.85 else rng.randint(0, ar + 1)
        else:
            name = rng.choice(cons)
            head = Sym(name)
            ar = sig.constructors[name]
            nargs = ar if rng.random() < 0.9 else rng.randint(0, ar)
        args = []
        budget = size - 1
        for i in range(nargs):
            s = max(1, rng.randint(1, max(1, budget - (nargs - i - 1))))
            args.append(self.expr(sig, s, variables, functions))
            budget -= s
        return apply(head, args)

    def query(self, prog: Program, *, allow_vars: bool = False) -> Expr:
        vs = ["X"] if allow_vars and self.rng.random() < 0.2 else []
        return self.expr(prog.signature, self.rng.randint(1, self.cfg.max_expr_size), vs)

    def partial_pattern(self, sig: Signature, max_size: int = 3) -> Expr:
        pool = ground_patterns(sig, max_size)
        return self.rng.choice(pool)

    def context(self, sig: Signature, depth: int = 3) -> Context:
        """A random context with at most ``depth`` application layers."""
        rng = self.rng
        c: Context = HOLE
        for _ in range(rng.randint(0, depth)):
            other = self.expr(sig, rng.randint(1, 2))
            c = ApplyRight(other, c) if rng.random() < 0.7 else ApplyLeft(c, other)
        return c


def _var_names(e: Expr) -> list[str]:
    if type(e) is Var:
        return [e.name]
    if type(e) is App:
        return _var_names(e.fun) + _var_names(e.arg)
    return []


def fresh_extension(gen: Generator, base: Program, n_rules: int = 3) -> tuple[Program, list[ProgramRule]]:
    """Rules for brand-new function symbols, possibly calling base symbols;
    returns the merged program and the extension rules."""
    rng = gen.rng
    names = {}
    for i in range(rng.randint(1, 2)):
        name = f"new{i}"
        while name in base.signature:
            name += "'"
        names[name] = rng.randint(0, 2)
    sig = base.signature.extend(functions=names)
    rules = []
    for _ in range(rng.randint(1, n_rules)):
        f = rng.choice(list(names))
        gen._var_counter = 0
        params = tuple(gen.param_pattern(sig, 2) for _ in range(names[f]))
        pvars = [x for p in params for x in _var_names(p)]
        rhs = gen.expr(sig, rng.randint(1, 4), pvars)
        rules.append(ProgramRule(f, params, rhs))
    merged = base.with_rules((*base.rules, *rules), signature=sig)
    return merged, rules


__all__ = ["CorpusConfig", "Generator", "fresh_extension", "BOT"]
