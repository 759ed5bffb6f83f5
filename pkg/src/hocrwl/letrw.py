"""Call-time choice rewriting with local bindings.

An operational engine independent of the proof calculus.  States are
expressions extended with ``let X = e in e'``; one step applies one of

* ``Fapp``  ``f t1..tn -> r θ`` for a program rule whose parameters match
  the pattern arguments ``ti``;
* ``LetIn`` ``e1 e2 -> let X = e2 in e1 X`` when ``e2`` still needs
  evaluation (an active call, junk, a variable application or a let);
  this also applies under constructors, so that an argument whose value
  is never needed can stay unevaluated in a binding and be dropped later;
* ``Bind``  ``let X = t in e -> e[X/t]`` for a pattern ``t``;
* ``Elim``  ``let X = e1 in e2 -> e2`` when ``X`` does not occur in ``e2``;
* ``Flat``  ``let X = (let Y = e1 in e2) in e3 -> let Y = e1 in let X = e2 in e3``;
* ``LetAp`` ``(let X = e1 in e2) e3 -> let X = e1 in e2 e3``;

anywhere inside the expression, including let-bound expressions.  Since
``Fapp`` only fires on pattern arguments, an argument is evaluated at most
once no matter how many times the rule body copies it.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .syntax import (
    App, Expr, Let, Program, Sym, Var, _Bottom, apply_substitution, check_symbols,
    is_pattern, match_pattern, spine, variables,
)

Position = tuple[int, ...]  # 0 = function / let-bound part, 1 = argument / let body


@dataclass(frozen=True)
class TraceStep:
    rule: str
    position: Position
    snapshot: Expr

    def to_json(self) -> dict:
        return {"rule": self.rule, "position": ".".join(map(str, self.position)),
                "expr": str(self.snapshot)}


@dataclass(frozen=True)
class Trace:
    start: Expr
    steps: tuple[TraceStep, ...] = ()
    maximal: bool = True

    def __len__(self):
        return len(self.steps)

    @property
    def final(self) -> Expr:
        return self.steps[-1].snapshot if self.steps else self.start

    def to_json(self) -> dict:
        return {"start": str(self.start), "maximal": self.maximal,
                "steps": [s.to_json() for s in self.steps]}


@dataclass(frozen=True)
class Reachable:
    values: frozenset
    exhausted: bool
    states: int = 0
    depth: int = 0

    def __contains__(self, t):
        return t in self.values


class LetRewriter:
    def __init__(self, program: Program):
        if program.has_extra_variables:
            raise ValueError("let-rewriting is only defined for programs without extra variables")
        self.program = program
        self.sig = program.signature

    # -- one step ----------------------------------------------------------

    def steps(self, e: Expr) -> list[tuple[str, Position, Expr]]:
        """All one-step successors of a normalised state, in a fixed order and
        not yet normalised themselves."""
        return list(self._steps(e, (), _fresh_name(e)))

    def _steps(self, e, pos, fresh):
        yield from self._root(e, pos, fresh)
        t = type(e)
        if t is App:
            for rule, p, new in self._steps(e.fun, pos + (0,), fresh):
                yield rule, p, App(new, e.arg)
            for rule, p, new in self._steps(e.arg, pos + (1,), fresh):
                yield rule, p, App(e.fun, new)
        elif t is Let:
            for rule, p, new in self._steps(e.bound, pos + (0,), fresh):
                yield rule, p, Let(e.var, new, e.body)
            for rule, p, new in self._steps(e.body, pos + (1,), fresh):
                yield rule, p, Let(e.var, e.bound, new)

    def _root(self, e, pos, fresh):
        t = type(e)
        if t is Let:
            if is_pattern(e.bound, self.sig):
                yield "Bind", pos, apply_substitution(e.body, {e.var: e.bound})
            if e.var not in variables(e.body):
                yield "Elim", pos, e.body
            if type(e.bound) is Let:
                inner = e.bound
                yield "Flat", pos, Let(inner.var, inner.bound, Let(e.var, inner.body, e.body))
            return
        if t is Sym:
            if self.sig.functions.get(e.name) == 0:
                for rule in self.program.rules_for(e.name):
                    yield "Fapp", pos, rule.rhs
            return
        if t is not App:
            return
        head, args = spine(e)
        if type(head) is Sym and self.sig.functions.get(head.name) == len(args):
            if all(is_pattern(a, self.sig) for a in args):
                for rule in self.program.rules_for(head.name):
                    theta = {}
                    for p, a in zip(rule.params, args):
                        part = match_pattern(p, a)
                        if part is None:
                            break
                        theta.update(part)
                    else:
                        yield "Fapp", pos, apply_substitution(rule.rhs, theta)
        if self._needs_sharing(e.arg):
            yield "LetIn", pos, Let(fresh, e.arg, App(e.fun, Var(fresh)))
        if type(e.fun) is Let:
            f = e.fun
            yield "LetAp", pos, Let(f.var, f.bound, App(f.body, e.arg))

    def _needs_sharing(self, e: Expr) -> bool:
        if type(e) is Let:
            return True
        head, args = spine(e)
        th = type(head)
        if th is Var or th is _Bottom:
            return bool(args)
        if th is Let:
            return True
        ar = self.sig.constructors.get(head.name)
        if ar is not None:
            return len(args) > ar
        return len(args) >= self.sig.functions[head.name]

    # -- search ------------------------------------------------------------

    def reachable(self, e: Expr, max_steps: int, max_states: int = 50_000) -> Reachable:
        start = normalize(e)
        seen = {start}
        frontier = [start]
        depth = 0
        while frontier and depth < max_steps:
            depth += 1
            nxt = []
            for s in frontier:
                for _rule, _pos, succ in self.steps(s):
                    succ = normalize(succ)
                    if succ not in seen:
                        seen.add(succ)
                        nxt.append(succ)
                if len(seen) > max_states:
                    return Reachable(self._values(seen), False, len(seen), depth)
            frontier = nxt
        return Reachable(self._values(seen), not frontier, len(seen), depth)

    def _values(self, states) -> frozenset:
        return frozenset(s for s in states if not s.has_bottom and not s.lets
                         and is_pattern(s, self.sig))

    def random_trace(self, e: Expr, seed: int, max_steps: int) -> Trace:
        rng = random.Random(seed)
        cur = normalize(e)
        start = cur
        out = []
        for _ in range(max_steps):
            succ = self.steps(cur)
            if not succ:
                return Trace(start, tuple(out), True)
            rule, pos, nxt = succ[rng.randrange(len(succ))]
            cur = normalize(nxt)
            out.append(TraceStep(rule, pos, cur))
        return Trace(start, tuple(out), not self.steps(cur))


def _fresh_name(e: Expr) -> str:
    # states are normalised, so binders are exactly #0 .. #(lets-1)
    return f"#{e.lets}"


def normalize(e: Expr) -> Expr:
    """Rename let binders to ``#0, #1, ...`` in pre-order.

    Two states that differ only in the names of their let variables get the
    same normal form, which is what the breadth-first search deduplicates on.
    Free variables are left alone; the ``#`` prefix keeps them apart.
    """
    counter = [0]
    return _rename(e, {}, counter)


def _rename(e, env, counter):
    t = type(e)
    if t is Var:
        return env.get(e.name, e)
    if t is App:
        return App(_rename(e.fun, env, counter), _rename(e.arg, env, counter))
    if t is Let:
        name = f"#{counter[0]}"
        counter[0] += 1
        bound = _rename(e.bound, env, counter)
        body = _rename(e.body, {**env, e.var: Var(name)}, counter)
        return Let(name, bound, body)
    return e


# -- module-level API ------------------------------------------------------


def step(program: Program, e: Expr) -> set[tuple[str, Expr]]:
    """One-step successors of ``e`` as ``(rule name, normalised expression)``."""
    return {(rule, normalize(new))
            for rule, _pos, new in LetRewriter(program).steps(normalize(e))}


def reachable_patterns(program: Program, e: Expr, max_steps: int = 200, *,
                       max_states: int = 50_000) -> Reachable:
    """Total patterns reachable from ``e`` in at most ``max_steps`` steps.

    ``exhausted`` is set when the whole state space was explored.
    """
    check_symbols(e, program.signature)
    return LetRewriter(program).reachable(e, max_steps, max_states)


def random_trace(program: Program, e: Expr, seed: int, max_steps: int = 200) -> Trace:
    check_symbols(e, program.signature)
    return LetRewriter(program).random_trace(e, seed, max_steps)
