import numpy as np
import pytest
from hypothesis import strategies as st

from bellcert.states import BellDiagonalState


def random_states(n, seed=0):
    """Dirichlet-distributed states over the whole simplex."""
    rng = np.random.default_rng(seed)
    return [BellDiagonalState.from_vector(v) for v in rng.dirichlet(np.ones(4), size=n)]


def states_with_fidelity(n, lo, hi, seed=0):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        a = rng.uniform(lo, hi)
        rest = rng.dirichlet(np.ones(3)) * (1 - a)
        out.append(BellDiagonalState(a, *rest))
    return out


@st.composite
def bell_states(draw, min_a=0.0):
    a = draw(st.floats(min_a, 1.0))
    w = [draw(st.floats(0.0, 1.0)) for _ in range(3)]
    s = sum(w)
    rest = [1 / 3] * 3 if s == 0 else [x / s for x in w]
    return BellDiagonalState.from_vector([a] + [(1 - a) * r for r in rest])


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
