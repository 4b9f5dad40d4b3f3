import pytest

from tltl import suites

from conftest import GOLDEN

CASES = suites.golden_cases()


def test_no_stale_files():
    assert sorted(p.name for p in GOLDEN.glob("*.txt")) == sorted(CASES)


@pytest.mark.parametrize("name", sorted(CASES))
def test_matches_frozen_output(name):
    assert (GOLDEN / name).read_text(encoding="utf-8") == CASES[name]
