import functools

import pytest
from hypothesis import settings

from ringproof.cnf import Formula
from ringproof.identities import build_instance
from ringproof.prover import prove_instance

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def formula(n, *clauses):
    return Formula(n, tuple(tuple(sorted(c, key=abs)) for c in clauses))


@functools.lru_cache(maxsize=None)
def instance(identity, kind, n, fault=None):
    return build_instance(identity, kind, n, fault)


@functools.lru_cache(maxsize=None)
def proof(identity, kind, n, ordered=None):
    return prove_instance(instance(identity, kind, n), ordered=ordered)


@pytest.fixture
def xnx():
    """The formula {x}, {not x}."""
    return formula(1, (1,), (-1,))


# acceptance reporting: one line per criterion at the end of the run

CRITERIA = {}  # number -> (title, detail lines)


def note(num, title, *lines):
    CRITERIA[num] = (title, list(lines))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    num = getattr(item.function, "criterion", None)
    if num is None or rep.when != "call" and not (rep.when == "setup" and rep.failed):
        return
    item.config._criteria = getattr(item.config, "_criteria", {})
    item.config._criteria[num] = "PASS" if rep.passed else "FAIL"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = getattr(config, "_criteria", {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(results):
        title, lines = CRITERIA.get(num, ("", []))
        terminalreporter.write_line(f"criterion {num}: {results[num]} - {title}")
        for line in lines:
            terminalreporter.write_line(f"    {line}")
