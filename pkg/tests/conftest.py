from fractions import Fraction

import hypothesis.strategies as st
from hypothesis import settings

from mukaifm.lattice import MukaiVector, NSLattice

settings.register_profile("default", max_examples=200, deadline=None)
settings.load_profile("default")

HYPERBOLIC = NSLattice(((0, 1), (1, 0)), (2, 1))

small = st.integers(-12, 12)


@st.composite
def vectors(draw, rank=1, lo=-12, hi=12):
    ints = st.integers(lo, hi)
    return MukaiVector(draw(ints), tuple(draw(ints) for _ in range(rank)), draw(ints))


@st.composite
def rational_vectors(draw, rank=1):
    q = st.fractions(min_value=-20, max_value=20, max_denominator=12)
    return MukaiVector(draw(q), tuple(draw(q) for _ in range(rank)), draw(q))


def F(x):
    return Fraction(x)


# acceptance criteria register one line each; printed in the terminal summary
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
