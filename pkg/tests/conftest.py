import itertools

import numpy as np
import pytest

from nkcollab.landscape import generate_model


def brute_locus_value(model, bits, i):
    """Table lookup with the index spelled out as a bit string."""
    word = "".join(str(int(bits[j])) for j in [i] + list(model.neighbors[i]))
    return float(model.payoff_tables[i, int(word, 2)])


def brute_fitness(model, bits):
    return sum(brute_locus_value(model, bits, i) for i in range(model.n)) / model.n


def all_strings(n):
    return [np.array(b, dtype=np.uint8) for b in itertools.product((0, 1), repeat=n)]


@pytest.fixture
def small_model():
    return generate_model(4, 1, 42)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("]")[1].split(".")[0])):
            terminalreporter.write_line(line)
