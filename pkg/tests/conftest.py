import itertools

import pytest

from permoll.core import HamProblem, Permutation
from permoll.rng import RandomSource


def ham_oracle(target, x):
    return sum(a == b for a, b in zip(target, x))


def swap_oracle(x, i, j):
    y = list(x)
    y[i - 1], y[j - 1] = y[j - 1], y[i - 1]
    return y


def all_permutations(n):
    return [Permutation(p) for p in itertools.permutations(range(1, n + 1))]


@pytest.fixture
def rng():
    return RandomSource(20240601)


@pytest.fixture
def ham3():
    return HamProblem.identity(3)


# acceptance results, echoed once more at the end of the session
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
