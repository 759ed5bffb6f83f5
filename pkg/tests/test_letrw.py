import json
import time

import pytest
from hypothesis import given, settings, strategies as st

from conftest import texts
from hocrwl.calculus import Denoter, SearchBudget, denote
from hocrwl.corpus import Generator
from hocrwl.letrw import LetRewriter, normalize, random_trace, reachable_patterns, step
from hocrwl.parser import parse_expr
from hocrwl.syntax import Let, Sym, is_pattern, spine


def test_bind_step(ex1, E):
    assert step(ex1, E(ex1, "let X = 0 in s X")) == {("Bind", E(ex1, "s 0"))}


def test_sharing_before_application(ex1, E):
    first = step(ex1, E(ex1, "fdouble f 0"))
    assert "LetIn" in {r for r, _ in first}
    frontier = {E(ex1, "fdouble f 0")}
    seen = set()
    for _ in range(3):
        frontier = {new for e in frontier for _, new in step(ex1, e)}
        seen |= frontier
    assert E(ex1, "let #0 = f in fadd #0 #0 0") in seen


def test_golden_observations(ex1, E):
    t0 = time.perf_counter()
    r = reachable_patterns(ex1, E(ex1, "fdouble f 0"))
    assert r.exhausted and texts(r.values) == {"0", "s (s 0)"}
    r = reachable_patterns(ex1, E(ex1, "fdouble f' 0"))
    assert r.exhausted and texts(r.values) == {"0", "s 0", "s (s 0)"}
    assert time.perf_counter() - t0 < 1.0


def test_step_bound_is_reported():
    from hocrwl.parser import parse_program
    p = parse_program("constructor z/0\nconstructor s/1\nloop X -> s (loop X)")
    r = reachable_patterns(p, Sym("loop")(Sym("z")), max_steps=20)
    assert not r.exhausted and r.values == frozenset()


def test_extra_variables_are_refused(ex2, E):
    with pytest.raises(ValueError):
        reachable_patterns(ex2, E(ex2, "f 0"))


def test_normalize_renames_binders(ex1, E):
    a = E(ex1, "let A = f in let B = A 0 in s B")
    b = E(ex1, "let Q = f in let R = Q 0 in s R")
    assert normalize(a) == normalize(b) == E(ex1, "let #0 = f in let #1 = #0 0 in s #1")


def test_traces(ex1, E):
    e = E(ex1, "fdouble f' 0")
    t1 = random_trace(ex1, e, seed=4)
    t2 = random_trace(ex1, e, seed=4)
    assert t1 == t2
    assert t1.maximal and is_pattern(t1.final, ex1.signature)
    doc = json.loads(json.dumps(t1.to_json()))
    for s in doc["steps"]:
        assert parse_expr(s["expr"], ex1.signature) is not None


def _at(e, pos):
    for i in pos:
        e = (e.bound if i == 0 else e.body) if type(e) is Let else (e.fun if i == 0 else e.arg)
    return e


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 100_000), st.integers(0, 1000))
def test_sharing_discipline(seed, trace_seed):
    # only Fapp and Bind copy subterms: Fapp copies pattern arguments and
    # Bind copies a pattern, so a non-pattern expression is never duplicated
    gen = Generator(seed)
    prog = gen.program()
    e = gen.query(prog)
    tr = random_trace(prog, e, trace_seed, max_steps=40)
    prev = normalize(e)
    for s in tr.steps:
        redex = _at(prev, s.position)
        if s.rule == "Fapp":
            _, args = spine(redex)
            assert all(is_pattern(a, prog.signature) for a in args)
        elif s.rule == "Bind":
            assert type(redex) is Let and is_pattern(redex.bound, prog.signature)
        prev = s.snapshot


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 100_000))
def test_reachable_values_are_sound(seed):
    gen = Generator(seed)
    prog = gen.program()
    e = gen.query(prog)
    den = denote(prog, e, SearchBudget(8), denoter=Denoter(prog, max_values=3000, max_work=20_000))
    reach = reachable_patterns(prog, e, 60, max_states=2000)
    if den.complete_at_bound:
        assert reach.values <= den.total()
        if reach.exhausted:
            assert reach.values == den.total()


def test_rewriter_step_positions(ex1, E):
    rw = LetRewriter(ex1)
    succ = rw.steps(E(ex1, "s (f' 0)"))
    assert [(r, p) for r, p, _ in succ] == [("LetIn", ()), ("Fapp", (1,))]


def test_sharing_under_constructors_keeps_undefined_parts():
    # f f -> s (f z) -> s (s (z z)); the junk z z must be parked in a binding
    # so that f (s (s X1)) can match with X1 unevaluated
    from hocrwl.parser import parse_program
    p = parse_program("""constructor a/0
constructor s/1
constructor z/0
f (s (s X1)) -> s
f z -> a
f (s X1) -> z
f X1 -> s (X1 z)
f X1 -> a""")
    e = parse_expr("f (f (f f))", p.signature)
    r = reachable_patterns(p, e, 300)
    assert r.exhausted
    assert texts(r.values) == texts(denote(p, e, SearchBudget(10)).total()) == {"a", "z", "s (s z)"}
