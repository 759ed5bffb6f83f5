import sys
from pathlib import Path

import pytest

from hocrwl.parser import load_program, parse_context, parse_expr

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def ex1():
    return load_program(DATA / "ex1.hocrwl", prelude=True)


@pytest.fixture(scope="session")
def ex2():
    return load_program(DATA / "ex2.hocrwl", extra_variables=True)


@pytest.fixture(scope="session")
def ex3():
    return load_program(DATA / "ex3.hocrwl", extra_variables=True)


@pytest.fixture
def E():
    """Parse helper: ``E(program, "text")``."""
    def parse(program, text, **kw):
        kw.setdefault("allow_bottom", True)
        return parse_expr(text, program.signature, **kw)
    return parse


@pytest.fixture
def C():
    def parse(program, text):
        return parse_context(text, program.signature)
    return parse


def texts(values):
    return {str(v) for v in values}


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
