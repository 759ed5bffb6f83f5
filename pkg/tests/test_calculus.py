import json
import time

import pytest
from hypothesis import given, settings, strategies as st

from conftest import texts
from hocrwl.calculus import (
    DenotationSet, Denoter, ProofTree, SearchBudget, check_proof, denote, derive, pattern_key,
    proof_errors,
)
from hocrwl.corpus import Generator
from hocrwl.parser import parse_program
from hocrwl.syntax import (
    BOT, Let, ProgramRule, Sym, SyntaxValidationError, Var, bottom_prefixes,
)


def test_golden_denotations(ex1, E):
    t0 = time.perf_counter()
    d = denote(ex1, E(ex1, "fdouble f 0"))
    assert [str(v) for v in d.sorted()] == ["_|_", "0", "s _|_", "s (s _|_)", "s (s 0)"]
    assert d.complete_at_bound
    d = denote(ex1, E(ex1, "fdouble f' 0"))
    assert texts(d) == {"_|_", "0", "s _|_", "s 0", "s (s _|_)", "s (s 0)"}
    assert time.perf_counter() - t0 < 1.0


@pytest.mark.parametrize("expr, expected", [
    ("f", {"_|_", "g", "h"}),
    ("f'", {"_|_", "f'"}),
    ("f 0", {"_|_", "0", "s _|_", "s 0"}),
    ("f' 0", {"_|_", "0", "s _|_", "s 0"}),
    ("X", {"_|_", "X"}),
    ("0", {"_|_", "0"}),
    ("fadd f'", {"_|_", "fadd _|_", "fadd f'"}),
    ("plus (s 0) (s 0)", {"_|_", "s _|_", "s (s _|_)", "s (s 0)"}),
    ("s (s _|_)", {"_|_", "s _|_", "s (s _|_)"}),
])
def test_small_denotations(ex1, E, expr, expected):
    d = denote(ex1, E(ex1, expr))
    assert texts(d) == expected
    assert d.complete_at_bound


def test_budget_cut_is_reported():
    p = parse_program("constructor z/0\nconstructor s/1\nloop X -> s (loop X)")
    d = denote(p, Sym("loop")(Sym("z")), SearchBudget(3))
    assert not d.complete_at_bound
    assert "s (s (s _|_))" in texts(d)
    assert "s (s (s (s _|_)))" not in texts(d)


def test_budget_validation():
    with pytest.raises(ValueError):
        SearchBudget(0)
    with pytest.raises(ValueError):
        SearchBudget(8, 0)
    assert SearchBudget(4).scaled(2).max_or_depth == 8


def test_max_results_truncates(ex1, E):
    d = denote(ex1, E(ex1, "fdouble f' 0"), SearchBudget(8, 4, max_results=2))
    assert len(d) == 2 and not d.complete_at_bound


def test_work_limit_gives_sound_incomplete_answer(ex1, E):
    d = Denoter(ex1, max_work=3)
    res = denote(ex1, E(ex1, "fdouble f' 0"), denoter=d)
    assert res.elements == {BOT} and not res.complete_at_bound
    d.max_work = None
    assert len(denote(ex1, E(ex1, "fdouble f' 0"), denoter=d)) == 6


def test_let_is_rejected(ex1):
    with pytest.raises(SyntaxValidationError):
        denote(ex1, Let("X", Sym("0"), Var("X")))


def test_pattern_key_order(ex1, E):
    vals = [E(ex1, t) for t in ["s (s 0)", "0", "_|_", "s _|_", "s (s _|_)"]]
    assert [str(v) for v in sorted(vals, key=pattern_key)] == \
        ["_|_", "0", "s _|_", "s (s _|_)", "s (s 0)"]


def test_proof_trees(ex1, E):
    e = E(ex1, "fdouble f 0")
    pt = derive(ex1, e, E(ex1, "s (s 0)"))
    assert pt.conclusion == (e, E(ex1, "s (s 0)"))
    assert pt.rule == "OR" and check_proof(ex1, pt)
    assert pt.or_depth <= 8
    doc = json.loads(json.dumps(pt.to_json()))
    assert doc["rule"] == "OR" and doc["conclusion"]["value"] == "s (s 0)"
    assert doc["theta"] == {"F": "h"}
    assert derive(ex1, e, E(ex1, "s 0")) is None
    with pytest.raises(ValueError):
        derive(ex1, e, E(ex1, "f 0"))


def test_tampered_proofs_are_rejected(ex1, E):
    e = E(ex1, "fdouble f 0")
    pt = derive(ex1, e, E(ex1, "s (s 0)"))
    wrong_value = ProofTree(pt.expr, E(ex1, "s 0"), pt.rule, pt.premises, pt.program_rule, pt.theta)
    assert not check_proof(ex1, wrong_value)
    foreign = ProgramRule("fdouble", (Var("F"),), Sym("0"))
    assert proof_errors(ex1, ProofTree(e, pt.value, "OR", pt.premises, foreign, pt.theta))
    assert not check_proof(ex1, ProofTree(e, E(ex1, "0"), "B"))
    assert not check_proof(ex1, ProofTree(e, E(ex1, "s (s 0)"), "DC", pt.premises))
    dropped = ProofTree(pt.expr, pt.value, "OR", pt.premises[:-1], pt.program_rule, pt.theta)
    assert not check_proof(ex1, dropped)


def test_renamed_rule_is_accepted(ex1, E):
    e = E(ex1, "fdouble f' 0")
    pt = derive(ex1, e, E(ex1, "s 0"))
    renamed = ProgramRule("fdouble", (Var("Q"),), Sym("fadd")(Var("Q"), Var("Q")))
    theta = {"Q": pt.theta["F"]}
    assert check_proof(ex1, ProofTree(pt.expr, pt.value, "OR", pt.premises, renamed, theta))


# -- extra variables -------------------------------------------------------


def _ex2_extended(ex2):
    return ex2.with_rules((*ex2.rules, ProgramRule("g", (Sym("0"),), Sym("1"))))


def test_extra_variable_example(ex2, E):
    b = SearchBudget(8, 3)
    assert texts(denote(ex2, E(ex2, "f 0"), b)) == {"_|_"}
    assert texts(denote(ex2, E(ex2, "f 1"), b)) == {"_|_"}
    ext = _ex2_extended(ex2)
    assert "1" in texts(denote(ext, E(ext, "f 0"), b))
    assert "1" not in texts(denote(ext, E(ext, "f 1"), b))


def test_handwritten_extra_variable_proof(ex2, E):
    ext = _ex2_extended(ex2)
    zero, one, g = Sym("0"), Sym("1"), Sym("g")
    inner = ProofTree(g(zero), one, "OR",
                      (ProofTree(zero, zero, "DC"), ProofTree(one, one, "DC")),
                      ext.rules[1], {})
    pt = ProofTree(E(ext, "f 0"), one, "OR",
                   (ProofTree(zero, zero, "DC"), inner),
                   ext.rules[0], {"X": zero, "Y": g})
    assert check_proof(ext, pt, extra_variables=True)
    assert not check_proof(ext, pt, extra_variables=False)


def test_extra_variable_space_is_reported(ex2):
    space, exhaustive = Denoter(ex2, max_pattern_size=2).extra_space()
    assert set(space) == {BOT, Sym("0"), Sym("1"), Sym("f"), Sym("g")}
    assert exhaustive  # unary functions only occur unapplied in patterns
    p = parse_program("constructor z/0\nconstructor s/1\nf X -> Y", extra_variables=True)
    assert not Denoter(p, max_pattern_size=2).extra_space()[1]
    assert not denote(p, Sym("f")(Sym("z")), SearchBudget(8, 2)).complete_at_bound


# -- properties over a random corpus ---------------------------------------


def _case(seed):
    gen = Generator(seed)
    prog = gen.program()
    return prog, gen.query(prog, allow_vars=True)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 100_000))
def test_monotone_and_fixpoint(seed):
    prog, e = _case(seed)
    d = Denoter(prog, max_values=2000, max_work=20_000)
    small = denote(prog, e, SearchBudget(4), denoter=d)
    big = denote(prog, e, SearchBudget(5), denoter=d)
    if big.complete_at_bound or small.complete_at_bound:
        assert small.elements <= big.elements
    if small.complete_at_bound:
        assert big.elements == small.elements and big.complete_at_bound


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 100_000))
def test_denotations_are_downward_closed(seed):
    prog, e = _case(seed)
    d = denote(prog, e, SearchBudget(5), denoter=Denoter(prog, max_values=2000, max_work=20_000))
    if d.complete_at_bound:
        for t in d.elements:
            assert bottom_prefixes(t) <= d.elements


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 100_000))
def test_every_element_has_a_checked_proof(seed):
    prog, e = _case(seed)
    b = SearchBudget(5)
    d = Denoter(prog, max_values=500, max_work=20_000)
    den = denote(prog, e, b, denoter=d)
    for t in sorted(den.elements, key=pattern_key)[:30]:
        pt = derive(prog, e, t, b, denoter=d)
        assert pt is not None and pt.conclusion == (e, t)
        assert check_proof(prog, pt), proof_errors(prog, pt)


def test_denotation_set_api(ex1, E):
    d = denote(ex1, E(ex1, "f 0"))
    assert isinstance(d, DenotationSet)
    assert E(ex1, "s 0") in d and len(d) == 4
    assert texts(d.total()) == {"0", "s 0"}
