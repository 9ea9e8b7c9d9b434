"""Shared test fixtures and utilities for sweep-lab tests."""

import tempfile
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from sweeplab import Rounding, WinRuleSpec, make_scenario
from sweeplab.demos import micro_scenario as build_micro

HALF = Fraction(1, 2)

# Rules drawn by the random scenario generator
RANDOM_RULES = (
    WinRuleSpec.fptp(),
    WinRuleSpec.most_seats(3, Rounding.DHONDT),
    WinRuleSpec.strict_majority(3, Rounding.DHONDT),
    WinRuleSpec.most_seats(4, Rounding.HARE),
    WinRuleSpec.strict_majority(5, Rounding.SAINTE_LAGUE),
)


def random_probability(rng: np.random.Generator) -> Fraction:
    """A rational in [0, 1] with denominator at most 6."""
    d = int(rng.integers(1, 7))
    return Fraction(int(rng.integers(0, d + 1)), d)


def random_scenario(
    rng: np.random.Generator,
    parties=(2, 3),
    voters=(2, 4),
    elections=(2, 3),
    rules=RANDOM_RULES,
    name="random",
):
    """A random small scenario; ranges are inclusive."""
    k = int(rng.integers(parties[0], parties[1] + 1))
    m = int(rng.integers(voters[0], voters[1] + 1))
    n = int(rng.integers(elections[0], elections[1] + 1))
    return make_scenario(
        [chr(ord("A") + s) for s in range(k)],
        [(int(rng.integers(0, k)), random_probability(rng)) for _ in range(m)],
        [rules[int(rng.integers(0, len(rules)))] for _ in range(n)],
        name=name,
    )


def reverse_plurality(counts):
    """Fewest votes wins: breaks vote monotonicity on purpose."""
    low = min(counts)
    tied = [s for s, v in enumerate(counts) if v == low]
    return tuple(Fraction(1, len(tied)) if v == low else Fraction(0) for v in counts)


@pytest.fixture
def temp_dir():
    """Create a temporary directory for test files."""
    with tempfile.TemporaryDirectory() as tmpdir:
        yield Path(tmpdir)


@pytest.fixture
def micro_scenario():
    """One voter for A with turnout 1/2, two FPTP elections."""
    return build_micro()


@pytest.fixture
def three_election_scenario():
    """Two parties, three voters, three FPTP elections."""
    return make_scenario(
        ["A", "B"],
        [(0, "1/2"), (1, "1/3"), (0, "2/3")],
        [WinRuleSpec.fptp()] * 3,
        name="three",
    )


@pytest.fixture
def rng():
    """A seeded generator so randomized tests are reproducible."""
    return np.random.default_rng(20240607)
