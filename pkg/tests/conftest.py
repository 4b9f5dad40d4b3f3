import random
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from tltl import sampling as sm
from tltl import trace as tr
from tltl.team import Team

GOLDEN = Path(__file__).parent / "golden"

settings.register_profile("default", max_examples=60, deadline=None, derandomize=True,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ALPHABET = ("p", "q")


def labels(nprops=2):
    return st.integers(0, (1 << nprops) - 1)


@st.composite
def lassos(draw, nprops=2, max_prefix=3, max_loop=3):
    prefix = draw(st.lists(labels(nprops), max_size=max_prefix))
    loop = draw(st.lists(labels(nprops), min_size=1, max_size=max_loop))
    return tr.lasso(prefix, loop)


@st.composite
def teams(draw, alphabet=ALPHABET, max_traces=4, max_prefix=3, max_loop=3, min_traces=0):
    ts = draw(st.lists(lassos(len(alphabet), max_prefix, max_loop), min_size=min_traces, max_size=max_traces))
    return Team(alphabet, ts)


@st.composite
def formulas(draw, kinds=sm.FULL, size=5, max_td=None, props=ALPHABET):
    seed = draw(st.integers(0, 2**32 - 1))
    return sm.random_formula(random.Random(seed), props, size, kinds, max_td)


@pytest.fixture
def golden_dir():
    return GOLDEN


# verdict lines from the acceptance suites, shown at the end of every run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
