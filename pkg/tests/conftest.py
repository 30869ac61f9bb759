import pytest
from hypothesis import strategies as st

from sscoupling import IfsSystem, coupling_region


@st.composite
def systems(draw, c_min=0.01):
    c = draw(st.floats(c_min, 0.5))
    t1 = draw(st.floats(0.0, 1.0 - 2.0 * c))
    t2 = draw(st.floats(t1 + c, 1.0 - c))
    return IfsSystem(c, t1, t2)


weights = st.floats(0.01, 0.99)


@st.composite
def weight_triples(draw, interior=True):
    """(p, q, r) with r in the coupling region."""
    p = draw(weights)
    q = draw(weights)
    lo, hi = coupling_region(p, q)
    if interior:
        frac = draw(st.floats(0.01, 0.99))
    else:
        frac = draw(st.floats(0.0, 1.0))
    return p, q, lo + frac * (hi - lo)


@pytest.fixture
def fig1():
    """The c=0.5, t1=0, t2=0.5, p=0.2, q=0.8 configuration."""
    return IfsSystem(0.5, 0.0, 0.5), 0.2, 0.8


_CRITERIA: list[str] = []


@pytest.fixture
def record_criterion():
    """Collect one status line per acceptance criterion for the terminal summary."""

    def record(number: int, result) -> None:
        _CRITERIA.append(f"criterion {number}: {result.line()}")
        print(_CRITERIA[-1])

    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in _CRITERIA:
            terminalreporter.write_line(line)
