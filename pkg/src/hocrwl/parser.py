"""Curried surface syntax for programs, expressions and contexts.

Program files hold one rule ``lhs -> rhs`` per line, optionally preceded by
signature headers ``constructor c/N`` and ``function f/N``.  ``--`` starts a
comment.  Identifiers starting with an uppercase letter are variables;
``a + b`` is sugar for ``plus a b``; ``_|_`` is bottom (query expressions
only, and only when explicitly allowed).
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass
from importlib import resources

from .syntax import (
    BOT, App, ApplyLeft, ApplyRight, Context, Expr, Hole, Let, Program, ProgramRule,
    Signature, Sym, SyntaxValidationError, Var, _Bottom, spine, validate_program,
)

PLUS = "plus"
PRELUDE_ENV = "HOCRWL_PRELUDE"
_HOLE_NAME = "[]"


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 1, col: int = 1):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Token:
    kind: str  # ident, (, ), +, ->, bot, hole, =, /
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>--[^\n]*)
  | (?P<arrow>->)
  | (?P<bot>_\|_)
  | (?P<hole>\[\s*\])
  | (?P<ident>[A-Za-z0-9_\#][A-Za-z0-9_'\#]*)
  | (?P<punct>[()+/=])
""", re.VERBOSE)


def tokenize(src: str, line: int = 1) -> list[Token]:
    out = []
    pos = 0
    col0 = 0
    while pos < len(src):
        if src[pos] == "\n":
            line += 1
            pos += 1
            col0 = pos
            continue
        m = _TOKEN_RE.match(src, pos)
        if not m:
            raise ParseError(f"unexpected character {src[pos]!r}", line, pos - col0 + 1)
        kind = m.lastgroup
        if kind not in ("ws", "comment"):
            text = m.group()
            if kind == "punct":
                kind = text
            elif kind == "arrow":
                kind = "->"
            out.append(Token(kind, text, line, pos - col0 + 1))
        pos = m.end()
    return out


_KEYWORDS = ("let", "in")


def is_variable_name(name: str) -> bool:
    # `#0`, `#1`, ... are the binders of normalised let-rewriting states
    return name[:1].isupper() or (name[:1] == "#" and name[1:].isdigit())


class _ExprParser:
    """Recursive descent over a token list; every symbol becomes ``Sym`` and
    every uppercase identifier ``Var``; resolution happens afterwards."""

    def __init__(self, tokens: list[Token], *, allow_bottom: bool, allow_hole: bool = False):
        self.toks = tokens
        self.i = 0
        self.allow_bottom = allow_bottom
        self.allow_hole = allow_hole

    def peek(self) -> Token | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def error(self, msg: str) -> ParseError:
        t = self.peek() or (self.toks[-1] if self.toks else None)
        return ParseError(msg, t.line if t else 1, t.col if t else 1)

    def expect(self, kind: str) -> Token:
        t = self.peek()
        if t is None or t.kind != kind:
            raise self.error(f"expected {kind!r}")
        self.i += 1
        return t

    def parse_all(self) -> Expr:
        e = self.expr()
        if self.peek() is not None:
            raise self.error(f"unexpected token {self.peek().text!r}")
        return e

    def expr(self) -> Expr:
        t = self.peek()
        if t is not None and t.kind == "ident" and t.text == "let":
            return self.let()
        e = self.app()
        while (t := self.peek()) is not None and t.kind == "+":
            self.i += 1
            e = App(App(Sym(PLUS), e), self.app())
        return e

    def let(self) -> Expr:
        self.i += 1
        var = self.expect("ident")
        if not is_variable_name(var.text):
            raise ParseError(f"let binds a variable, not {var.text!r}", var.line, var.col)
        self.expect("=")
        bound = self.expr()
        kw = self.expect("ident")
        if kw.text != "in":
            raise ParseError("expected 'in'", kw.line, kw.col)
        return Let(var.text, bound, self.expr())

    def app(self) -> Expr:
        e = self.atom()
        while (t := self.peek()) is not None and t.kind in ("ident", "(", "bot", "hole"):
            if t.kind == "ident" and t.text in _KEYWORDS:
                break
            e = App(e, self.atom())
        return e

    def atom(self) -> Expr:
        t = self.peek()
        if t is None:
            raise self.error("unexpected end of input")
        self.i += 1
        if t.kind == "ident":
            if t.text in _KEYWORDS:
                raise ParseError(f"unexpected keyword {t.text!r}", t.line, t.col)
            return Var(t.text) if is_variable_name(t.text) else Sym(t.text)
        if t.kind == "(":
            e = self.expr()
            self.expect(")")
            return e
        if t.kind == "bot":
            if not self.allow_bottom:
                raise ParseError("bottom is not allowed here", t.line, t.col)
            return BOT
        if t.kind == "hole":
            if not self.allow_hole:
                raise ParseError("a context hole is not allowed here", t.line, t.col)
            return Var(_HOLE_NAME)
        raise ParseError(f"unexpected token {t.text!r}", t.line, t.col)


def _resolve(e: Expr, sig: Signature, where: Token | None = None) -> None:
    """Check declared symbols and constructor arities."""
    if type(e) is Let:
        _resolve(e.bound, sig, where)
        _resolve(e.body, sig, where)
        return
    head, args = spine(e)
    if type(head) is Sym:
        line, col = (where.line, where.col) if where else (1, 1)
        if head.name not in sig:
            raise ParseError(f"undeclared identifier {head.name!r}", line, col)
        ar = sig.constructors.get(head.name)
        if ar is not None and len(args) > ar:
            raise ParseError(
                f"constructor {head.name} has arity {ar} but is applied to {len(args)} arguments",
                line, col)
    for a in args:
        _resolve(a, sig, where)


def parse_expr(src: str, sig: Signature, *, allow_bottom: bool = False) -> Expr:
    toks = tokenize(src)
    if not toks:
        raise ParseError("empty expression")
    e = _ExprParser(toks, allow_bottom=allow_bottom).parse_all()
    _resolve(e, sig, toks[0])
    return e


def parse_context(src: str, sig: Signature, *, allow_bottom: bool = False) -> Context:
    """Parse an expression with exactly one ``[ ]`` into a ``Context``."""
    toks = tokenize(src)
    if not toks:
        raise ParseError("empty context")
    e = _ExprParser(toks, allow_bottom=allow_bottom, allow_hole=True).parse_all()
    holes = sum(1 for t in toks if t.kind == "hole")
    if holes != 1:
        raise ParseError(f"a context needs exactly one hole, found {holes}", toks[0].line, toks[0].col)
    _resolve(e, sig, toks[0])
    return _to_context(e)


def _to_context(e: Expr) -> Context:
    if e == Var(_HOLE_NAME):
        return Hole()
    if type(e) is App:
        if _has_hole(e.fun):
            return ApplyLeft(_to_context(e.fun), e.arg)
        return ApplyRight(e.fun, _to_context(e.arg))
    raise AssertionError("hole not found")


def _has_hole(e: Expr) -> bool:
    if type(e) is Var:
        return e.name == _HOLE_NAME
    if type(e) is App:
        return _has_hole(e.fun) or _has_hole(e.arg)
    return False


# -- programs --------------------------------------------------------------


_DECL_RE = re.compile(r"^\s*(constructor|function)\s+(\S+?)\s*/\s*(\d+)\s*$")


def _strip_comment(line: str) -> str:
    # `->` never starts with `--`, so the first `--` always opens a comment
    i = line.find("--")
    return line if i < 0 else line[:i]


def parse_program(src: str, *, extra_variables: bool = False, left_fo: bool = False) -> Program:
    """Parse and validate a program; any diagnostic is fatal."""
    declared_cs: dict[str, int] = {}
    declared_fs: dict[str, int] = {}
    raw_rules: list[tuple[Expr, Expr, Token]] = []

    for lineno, line in enumerate(src.splitlines(), start=1):
        text = _strip_comment(line)
        if not text.strip():
            continue
        m = _DECL_RE.match(text)
        if m:
            kind, name, ar = m.group(1), m.group(2), int(m.group(3))
            if is_variable_name(name):
                raise ParseError(f"{name!r} is a variable name, not a symbol", lineno, 1)
            table = declared_cs if kind == "constructor" else declared_fs
            if table.get(name, ar) != ar:
                raise ParseError(f"conflicting arities for {name}", lineno, 1)
            table[name] = ar
            continue
        toks = tokenize(text, lineno)
        arrows = [k for k, t in enumerate(toks) if t.kind == "->"]
        if len(arrows) != 1:
            raise ParseError("a rule needs exactly one '->'", lineno, 1)
        k = arrows[0]
        if k == 0 or k == len(toks) - 1:
            raise ParseError("a rule needs both a left and a right side", lineno, toks[k].col)
        lhs = _ExprParser(toks[:k], allow_bottom=False).parse_all()
        rhs = _ExprParser(toks[k + 1:], allow_bottom=False).parse_all()
        if lhs.lets or rhs.lets:
            raise ParseError("let is not allowed in program rules", lineno, 1)
        raw_rules.append((lhs, rhs, toks[0]))

    functions: dict[str, int] = {}
    rules: list[ProgramRule] = []
    for lhs, rhs, tok in raw_rules:
        head, params = spine(lhs)
        if type(head) is not Sym:
            raise ParseError("a rule's left side must start with a function symbol", tok.line, tok.col)
        if functions.get(head.name, len(params)) != len(params):
            raise ParseError(f"function {head.name} is defined with different arities",
                             tok.line, tok.col)
        functions[head.name] = len(params)
        rules.append(ProgramRule(head.name, tuple(params), rhs))

    functions.update(declared_fs)
    applied: dict[str, int] = {}
    for r in rules:
        for e in (*r.params, r.rhs):
            _observe_arities(e, applied)
    constructors = {name: ar for name, ar in applied.items()
                    if name not in functions and name not in declared_cs}
    constructors.update(declared_cs)
    try:
        sig = Signature(constructors, functions)
    except SyntaxValidationError as exc:
        raise ParseError(str(exc)) from None

    prog = Program(sig, tuple(rules), extra_variables=extra_variables, left_fo=left_fo)
    diags = validate_program(prog)
    if diags:
        tok = raw_rules[diags[0].rule_index][2] if diags[0].rule_index is not None else None
        raise ParseError("; ".join(str(d) for d in diags),
                         tok.line if tok else 1, tok.col if tok else 1)
    return prog


def _observe_arities(e: Expr, applied: dict[str, int]) -> None:
    head, args = spine(e)
    if type(head) is Sym:
        applied[head.name] = max(applied.get(head.name, 0), len(args))
    for a in args:
        _observe_arities(a, applied)


def default_prelude_text() -> str:
    path = os.environ.get(PRELUDE_ENV)
    if path:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    return resources.files("hocrwl").joinpath("prelude.hocrwl").read_text(encoding="utf-8")


def load_program(path, *, prelude: bool = False,
                 extra_variables: bool = False, left_fo: bool = False) -> Program:
    """Load one program file, or several concatenated in order."""
    parts = []
    if prelude:
        parts.append(default_prelude_text())
    if isinstance(path, (str, os.PathLike)):
        path = [path]
    for p in path or ():
        with open(p, encoding="utf-8") as fh:
            parts.append(fh.read())
    return parse_program("\n".join(parts), extra_variables=extra_variables, left_fo=left_fo)


# -- printing --------------------------------------------------------------


def print_expr(e: Expr) -> str:
    t = type(e)
    if t is Var or t is Sym:
        return e.name
    if t is _Bottom:
        return "_|_"
    if t is Let:
        bound = print_expr(e.bound)
        if type(e.bound) is Let:
            bound = f"({bound})"
        return f"let {e.var} = {bound} in {print_expr(e.body)}"
    head, args = spine(e)
    parts = [_print_atom(head)]
    parts += [_print_atom(a) for a in args]
    return " ".join(parts)


def _print_atom(e: Expr) -> str:
    t = type(e)
    if t is App or t is Let:
        return f"({print_expr(e)})"
    return print_expr(e)


def print_context(c: Context) -> str:
    return print_expr(_context_expr(c)).replace(_HOLE_NAME, "[ ]")


def _context_expr(c: Context) -> Expr:
    if isinstance(c, Hole):
        return Var(_HOLE_NAME)
    if isinstance(c, ApplyLeft):
        return App(_context_expr(c.ctx), c.arg)
    return App(c.fun, _context_expr(c.ctx))


def print_rule(r: ProgramRule) -> str:
    lhs = " ".join([r.function, *(_print_atom(p) for p in r.params)])
    return f"{lhs} -> {print_expr(r.rhs)}"


def print_signature(sig: Signature) -> str:
    lines = [f"constructor {c}/{a}" for c, a in sorted(sig.constructors.items())]
    lines += [f"function {f}/{a}" for f, a in sorted(sig.functions.items())]
    return "\n".join(lines)


def print_program(p: Program, *, with_signature: bool = True) -> str:
    lines = []
    if with_signature:
        lines.append(print_signature(p.signature))
    lines += [print_rule(r) for r in p.rules]
    return "\n".join(l for l in lines if l) + "\n"
