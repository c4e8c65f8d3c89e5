from fractions import Fraction

import pytest
from hypothesis import settings, strategies as st

from permdot.algebra import Instance, RealSet

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

ACCEPTANCE: dict[str, tuple[bool, str]] = {}


@pytest.fixture
def record():
    """Record one acceptance line; the terminal summary prints them all."""
    def _record(key: str, ok: bool, detail: str = ""):
        ACCEPTANCE[key] = (bool(ok), detail)
        return ok
    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: [int(p) if p.isdigit() else p for p in k.replace(".", " ").split()]):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {key}: {detail}")


rationals = st.builds(
    Fraction,
    st.integers(min_value=-60, max_value=60),
    st.integers(min_value=1, max_value=7),
)


def real_sets(min_size=1, max_size=8):
    return st.lists(rationals, min_size=min_size, max_size=max_size, unique=True).map(RealSet.of)


@st.composite
def instances(draw, min_n=1, max_n=8):
    n = draw(st.integers(min_value=min_n, max_value=max_n))
    a = draw(st.lists(rationals, min_size=n, max_size=n, unique=True))
    b = draw(st.lists(rationals, min_size=n, max_size=n, unique=True))
    return Instance(RealSet.of(a), RealSet.of(b))


@st.composite
def permutations_of(draw, n):
    return draw(st.permutations(list(range(1, n + 1))))
