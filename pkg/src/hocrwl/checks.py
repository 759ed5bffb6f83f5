"""Property suites run by ``hocrwl check`` and the test-suite.

Each suite works either on one loaded program (with generated queries) or
on a seeded random corpus, and only counts cases whose searches are
exhaustive; everything else is reported as skipped.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import islice, product
from typing import Callable, Iterator

from .analysis import check_compositionality
from .calculus import DEFAULT_BUDGET, Denoter, SearchBudget, denote
from .corpus import Generator, fresh_extension
from .letrw import reachable_patterns
from .syntax import (
    Expr, Program, ProgramRule, Sym, Var, apply, ground_patterns, is_fo_pattern, spine,
)
from .transforms import (
    FO, HO, UnsafeExtensionError, fs_program, gen_distinguisher, safe_extend,
    safe_extension_invariance_check,
)

SUITES = ("compositionality", "oracle", "safe-ext", "distinguisher")


@dataclass
class SuiteResult:
    name: str
    passed: int = 0
    failed: int = 0
    skipped: int = 0
    expected: int = 0  # violations that are correct behaviour (extra variables)
    failures: list[str] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.failed == 0

    def summary(self) -> str:
        verdict = "pass" if self.ok else "FAIL"
        line = (f"{self.name}: {verdict} ({self.passed} passed, {self.failed} failed, "
                f"{self.skipped} skipped")
        if self.expected:
            line += f", {self.expected} expected violations"
        return line + ")"

    def to_json(self) -> dict:
        return {"suite": self.name, "ok": self.ok, "passed": self.passed, "failed": self.failed,
                "skipped": self.skipped, "expected_violations": self.expected,
                "failures": self.failures, "notes": self.notes}


@dataclass(frozen=True)
class CheckConfig:
    budget: SearchBudget = DEFAULT_BUDGET
    steps: int = 200
    max_states: int = 3000
    programs: int = 30
    queries: int = 5
    seed: int = 0
    max_values: int = 5000
    max_work: int = 20_000


def _cases(program: Program | None, cfg: CheckConfig, gen: Generator,
           allow_vars: bool = False) -> Iterator[tuple[Program, Expr]]:
    if program is not None:
        for e in loaded_queries(program, gen, cfg.programs * cfg.queries):
            yield program, e
        return
    for _ in range(cfg.programs):
        p = gen.program()
        for _ in range(cfg.queries):
            yield p, gen.query(p, allow_vars=allow_vars)


def loaded_queries(program: Program, gen: Generator, limit: int) -> list[Expr]:
    """Every function applied to small total ground arguments, followed by
    random expressions, up to ``limit`` queries."""
    sig = program.signature
    small = [t for t in ground_patterns(sig, 1) if not t.has_bottom]
    out: list[Expr] = []
    for f, ar in sorted(sig.functions.items()):
        for args in islice(product(small, repeat=ar), 20):
            out.append(apply(Sym(f), args))
    while len(out) < limit:
        out.append(gen.query(program))
    return out[:limit]


# -- suites ----------------------------------------------------------------


def oracle_suite(program: Program | None = None, cfg: CheckConfig = CheckConfig()) -> SuiteResult:
    """Total values from the calculus against let-rewriting reachability."""
    res = SuiteResult("oracle")
    gen = Generator(cfg.seed)
    if program is not None and program.has_extra_variables:
        res.notes.append("let-rewriting does not apply to programs with extra variables")
        return res
    current, d = None, None
    for p, e in _cases(program, cfg, gen):
        if p is not current:
            current = p
            d = Denoter(p, max_pattern_size=cfg.budget.max_pattern_size, max_values=cfg.max_values,
                        max_work=cfg.max_work)
        den = denote(p, e, cfg.budget, denoter=d)
        if not den.complete_at_bound:
            res.skipped += 1
            continue
        reach = reachable_patterns(p, e, cfg.steps, max_states=cfg.max_states)
        if not reach.exhausted:
            res.skipped += 1
            continue
        calc = den.total()
        if calc == reach.values:
            res.passed += 1
        else:
            res.failed += 1
            res.failures.append(f"{e}: calculus {sorted(map(str, calc))} "
                                f"let-rewriting {sorted(map(str, reach.values))}")
    return res


def compositionality_suite(program: Program | None = None,
                           cfg: CheckConfig = CheckConfig()) -> SuiteResult:
    res = SuiteResult("compositionality")
    gen = Generator(cfg.seed)
    current, d = None, None
    for p, e in _cases(program, cfg, gen):
        if p is not current:
            current = p
            d = Denoter(p, max_pattern_size=cfg.budget.max_pattern_size, max_values=cfg.max_values,
                        max_work=cfg.max_work)
        c = gen.context(p.signature, 3)
        v = check_compositionality(p, e, c, cfg.budget, denoter=d)
        if not v.stabilized:
            res.skipped += 1
            if not v.equal:
                res.notes.append(f"undecided at bound: {e} in {c}")
        elif v.equal:
            res.passed += 1
        else:
            res.failed += 1
            res.failures.append(f"{e} in {c}: {v.to_json()}")
    return res


def distinguisher_case(program: Program, e: Expr, t: Expr, variant: str,
                budget: SearchBudget = DEFAULT_BUDGET) -> bool | None:
    """``t ∈ ⟦e⟧`` against ``hat(t) ∈ ⟦g_t e⟧``.  ``None`` when either side
    is undecided at the budget; otherwise whether they agree."""
    den = denote(program, e, budget)
    if t in den.elements:
        left = True
    elif den.complete_at_bound:
        left = False
    else:
        return None
    dist = gen_distinguisher(t, variant, signature=program.signature)
    sig = program.signature.extend(constructors=dist.signature_additions.constructors,
                                   functions=dist.signature_additions.functions)
    se = safe_extend(program, dist.rules, (e,), signature=sig)
    if variant == FO and not is_fo_pattern(dist.hat_target, sig):
        return False
    height = _height(t)
    out = denote(se.merged, Sym(dist.entry)(e), budget.with_depth(budget.max_or_depth + height + 1))
    if dist.hat_target in out.elements:
        right = True
    elif out.complete_at_bound:
        right = False
    else:
        return None
    return left == right


def _height(t: Expr) -> int:
    _, args = spine(t)
    return 1 + max((_height(a) for a in args), default=0)


def distinguisher_suite(program: Program | None = None, cfg: CheckConfig = CheckConfig()) -> SuiteResult:
    res = SuiteResult("distinguisher")
    gen = Generator(cfg.seed)
    for p, e in _cases(program, cfg, gen):
        den = denote(p, e, cfg.budget)
        members = sorted(den.elements, key=str)
        targets = [gen.rng.choice(members)] if members else []
        targets.append(gen.partial_pattern(p.signature, 3))
        for t in targets:
            for variant in (HO, FO):
                ok = distinguisher_case(p, e, t, variant, cfg.budget)
                if ok is None:
                    res.skipped += 1
                elif ok:
                    res.passed += 1
                else:
                    res.failed += 1
                    res.failures.append(f"{variant} {e} / {t}")
    return res


def small_extensions(program: Program, limit: int = 40) -> list[list[ProgramRule]]:
    """One-rule extensions for function symbols the program never uses:
    declared-but-unused functions get rules with small parameters and
    constant right-hand sides."""
    sig = program.signature
    used = fs_program(program)
    unused = sorted(f for f in sig.functions if f not in used)
    params = [Var("U")] + [Sym(c) for c, a in sorted(sig.constructors.items()) if a == 0]
    rhss = [Sym(c) for c, a in sorted(sig.constructors.items()) if a == 0]
    out = []
    for f in unused:
        for ps in product(params, repeat=sig.functions[f]):
            for r in rhss:
                out.append([ProgramRule(f, ps, r)])
    return out[:limit]


def safe_ext_suite(program: Program | None = None, cfg: CheckConfig = CheckConfig()) -> SuiteResult:
    """Adding fresh-defined rules must not change any denotation, except in
    extra-variable mode where a change is expected."""
    res = SuiteResult("safe-ext")
    gen = Generator(cfg.seed)
    if program is not None:
        exts = small_extensions(program)
        if not exts:
            res.notes.append("no unused function symbols to extend")
            return res
        queries = loaded_queries(program, gen, cfg.queries * 4)
        for rules in exts:
            for e in queries:
                try:
                    se = safe_extend(program, rules, (e,))
                except UnsafeExtensionError:
                    res.skipped += 1
                    continue
                _record(res, safe_extension_invariance_check(se, e, cfg.budget), e, rules)
        return res
    for _ in range(cfg.programs):
        p = gen.program()
        for _ in range(cfg.queries):
            e = gen.query(p)
            merged, rules = fresh_extension(gen, p)
            se = safe_extend(p, rules, (e,), signature=merged.signature)
            _record(res, safe_extension_invariance_check(se, e, cfg.budget), e, rules)
    return res


def _record(res: SuiteResult, v, e: Expr, rules) -> None:
    from .parser import print_rule
    if v.equal:
        if v.stabilized:
            res.passed += 1
        else:
            res.skipped += 1
        return
    text = f"{e} under {'; '.join(print_rule(r) for r in rules)}: {v.to_json()}"
    if not v.stabilized and not v.expected:
        res.skipped += 1
        res.notes.append("undecided at bound: " + text)
    elif v.expected:
        res.expected += 1
        res.notes.append("expected: " + text)
    else:
        res.failed += 1
        res.failures.append(text)


RUNNERS: dict[str, Callable[..., SuiteResult]] = {
    "compositionality": compositionality_suite,
    "oracle": oracle_suite,
    "safe-ext": safe_ext_suite,
    "distinguisher": distinguisher_suite,
}


def run_suite(name: str, program: Program | None = None, cfg: CheckConfig = CheckConfig()) -> SuiteResult:
    try:
        runner = RUNNERS[name]
    except KeyError:
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}") from None
    return runner(program, cfg)


__all__ = ["SUITES", "SuiteResult", "CheckConfig", "run_suite", "oracle_suite",
           "compositionality_suite", "distinguisher_suite", "distinguisher_case", "safe_ext_suite",
           "small_extensions", "loaded_queries"]
