import numpy as np
import pytest

from njcones.dissim import validate

# the two 5-taxon example matrices (taxa a..e)
EXAMPLE_D = [
    [0, 3, 5, 4, 7],
    [3, 0, 10, 3, 7],
    [5, 10, 0, 6, 5],
    [4, 3, 6, 0, 2],
    [7, 7, 5, 2, 0],
]
EXAMPLE_D_PRIME = [
    [0, 2, 4, 1, 9],
    [2, 0, 10, 3, 8],
    [4, 10, 0, 6, 5],
    [1, 3, 6, 0, 7],
    [9, 8, 5, 7, 0],
]
ABCDE = ("a", "b", "c", "d", "e")


@pytest.fixture
def example_d():
    return validate(EXAMPLE_D, ABCDE)


@pytest.fixture
def example_d_prime():
    return validate(EXAMPLE_D_PRIME, ABCDE)


def random_map(n, rng):
    from njcones.dissim import DissimilarityMap
    return DissimilarityMap(n, rng.random(n * (n - 1) // 2))


class FixedDraws:
    """Stand-in random stream that replays given uniforms."""

    def __init__(self, values):
        self.values = list(values)

    def random(self):
        return self.values.pop(0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240101)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
