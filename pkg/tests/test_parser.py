import pytest
from hypothesis import given, settings, strategies as st

from hocrwl.corpus import Generator
from hocrwl.parser import (
    ParseError, default_prelude_text, load_program, parse_context, parse_expr, parse_program,
    print_context, print_expr, print_program, print_rule,
)
from hocrwl.syntax import BOT, App, Let, Sym, Var, apply


def test_example_program_signature(ex1):
    sig = ex1.signature
    assert sig.constructors == {"0": 0, "s": 1}
    assert sig.functions == {"f": 0, "f'": 1, "g": 1, "h": 1, "fadd": 3, "fdouble": 1, "plus": 2}
    assert len(ex1.rules) == 9


def test_plus_sugar(ex1):
    e = parse_expr("F X + G X", ex1.signature)
    assert e == apply(Sym("plus"), [App(Var("F"), Var("X")), App(Var("G"), Var("X"))])
    assert parse_expr("0 + 0 + 0", ex1.signature) == parse_expr("plus (plus 0 0) 0", ex1.signature)


def test_bottom_only_where_allowed(ex1):
    with pytest.raises(ParseError):
        parse_expr("s _|_", ex1.signature)
    assert parse_expr("s _|_", ex1.signature, allow_bottom=True) == App(Sym("s"), BOT)
    with pytest.raises(ParseError):
        parse_program("f _|_ -> 0")


@pytest.mark.parametrize("text", ["nope", "s 0 0", "(s 0", "s )", ""])
def test_bad_expressions(ex1, text):
    with pytest.raises(ParseError):
        parse_expr(text, ex1.signature)


def test_parse_error_position():
    with pytest.raises(ParseError) as info:
        parse_program("f X -> X\ng X -> Y")
    assert info.value.line == 2
    assert "extra" in str(info.value)


@pytest.mark.parametrize("src, kind", [
    ("f X X -> X", "non-linear"),
    ("f (g X Y) -> X\ng X Y -> X", "non-pattern"),
    ("f X -> X\nf X Y -> X", "arities"),
    ("constructor c/1\nc X -> X", "constructor"),
])
def test_invalid_programs(src, kind):
    with pytest.raises(ParseError, match=kind):
        parse_program(src)


def test_declarations_override_inference():
    p = parse_program("constructor c/2\nfunction g/1\nf X -> c X")
    assert p.signature.constructors == {"c": 2}
    assert p.signature.functions == {"f": 1, "g": 1}


def test_left_fo_flag():
    src = "constructor 0/0\nfunction g/2\nf (g X) -> X"
    parse_program(src)
    with pytest.raises(ParseError, match="ho-pattern"):
        parse_program(src, left_fo=True)


def test_contexts(ex1):
    c = parse_context("fdouble [ ] 0", ex1.signature)
    assert print_context(c) == "fdouble [ ] 0"
    with pytest.raises(ParseError):
        parse_context("fdouble f 0", ex1.signature)
    with pytest.raises(ParseError):
        parse_context("fadd [ ] [ ] 0", ex1.signature)


def test_let_syntax(ex1):
    e = parse_expr("let X = f' 0 in s X", ex1.signature)
    assert e == Let("X", App(Sym("f'"), Sym("0")), App(Sym("s"), Var("X")))
    nested = "let #0 = (let #1 = 0 in #1) in plus #0 (s #0)"
    assert print_expr(parse_expr(nested, ex1.signature)) == nested
    with pytest.raises(ParseError):
        parse_program("f X -> let Y = X in Y")


def test_printer_parenthesisation(ex1):
    for text in ["fadd f' f' (s (s 0))", "s (plus 0 0)", "F (G X)", "fadd (f' 0) g"]:
        assert print_expr(parse_expr(text, ex1.signature)) == text


def test_prelude_env(tmp_path, monkeypatch):
    alt = tmp_path / "alt.hocrwl"
    alt.write_text("constructor z/0\nplus X Y -> X\n")
    monkeypatch.setenv("HOCRWL_PRELUDE", str(alt))
    assert "z" in load_program(None, prelude=True).signature.constructors
    monkeypatch.delenv("HOCRWL_PRELUDE")
    assert "plus" in default_prelude_text()


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 100_000))
def test_expression_roundtrip(seed):
    gen = Generator(seed)
    prog = gen.program()
    e = gen.query(prog, allow_vars=True)
    assert parse_expr(print_expr(e), prog.signature) == e
    t = gen.partial_pattern(prog.signature)
    assert parse_expr(print_expr(t), prog.signature, allow_bottom=True) == t


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 100_000))
def test_program_roundtrip(seed):
    prog = Generator(seed).program()
    again = parse_program(print_program(prog))
    assert again.signature == prog.signature
    assert again.rules == prog.rules
    assert [print_rule(r) for r in again.rules] == [print_rule(r) for r in prog.rules]
