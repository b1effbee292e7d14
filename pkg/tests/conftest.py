import random

import pytest

from kresil import TransitionSystem, data_file, load
from kresil.benchmarks import random_system

# Shorthand used across the tests: the shipped four-state example labels its
# states "1".."4"; indices are 0-based, so label n = index n-1.


@pytest.fixture(scope="session")
def fig1() -> TransitionSystem:
    return load(data_file("fig1.tsf.json"))


def build_fig1() -> TransitionSystem:
    """The four-state escalation example, constructed in code."""
    return TransitionSystem(
        num_states=4,
        initial=0,
        errors=[3],
        controlled=[(0, 0), (1, 1), (2, 2), (1, 0), (2, 1)],
        uncontrolled=[(0, 1), (1, 2), (2, 3)],
        labels={0: "1", 1: "2", 2: "3", 3: "4"},
    )


def corpus_system(index: int) -> TransitionSystem:
    """System ``index`` of the 500-strong differential-testing corpus."""
    rng = random.Random(9000 + index)
    density = 0.2 if index % 2 == 0 else 0.4
    return random_system(rng, density=density)


@pytest.fixture(scope="session")
def corpus() -> list[TransitionSystem]:
    return [corpus_system(i) for i in range(500)]
