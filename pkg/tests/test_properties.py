"""Property suite for the game constructions on random systems.

All properties run on seeded random systems of at most 8 states, in both game
modes, with the exhaustive solver as the ground truth where one applies.
"""

import random

from hypothesis import given, settings, strategies as st

from kresil import (
    brute_force_res_k,
    brute_force_safe_k,
    cla,
    frag,
    res_k,
    safe_k,
)
from kresil.benchmarks import random_system

MODES = st.sampled_from(["base", "repair"])
SEEDS = st.integers(min_value=0, max_value=10**6)
KS = st.integers(min_value=0, max_value=3)


def system_for(seed: int):
    rng = random.Random(seed)
    return random_system(rng, density=rng.choice((0.2, 0.3, 0.4)))


def subset_for(universe, seed: int):
    rng = random.Random(seed ^ 0x5EED)
    return frozenset(s for s in universe if rng.random() < 0.6)


@given(SEEDS, SEEDS, KS, MODES)
@settings(max_examples=120, deadline=None)
def test_monotone_in_goal(seed, gseed, k, mode):
    system = system_for(seed)
    big = subset_for(system.non_error, gseed)
    small = subset_for(big, gseed + 1)
    assert small <= big
    inner = safe_k(system, small, k, mode).safe_set
    outer = safe_k(system, big, k, mode).safe_set
    assert inner <= outer


@given(SEEDS, KS, MODES)
@settings(max_examples=120, deadline=None)
def test_antitone_in_k_and_contracting(seed, k, mode):
    system = system_for(seed)
    goal = system.non_error
    here = safe_k(system, goal, k, mode).safe_set
    tighter = safe_k(system, goal, k + 1, mode).safe_set
    assert tighter <= here <= goal


@given(SEEDS, KS, MODES)
@settings(max_examples=120, deadline=None)
def test_res_chain_and_fixed_point(seed, k, mode):
    system = system_for(seed)
    resilient = res_k(system, k, mode).resilient
    looser = res_k(system, k + 1, mode).resilient
    assert looser <= resilient <= system.non_error
    assert safe_k(system, resilient, k, mode).safe_set == resilient


@given(SEEDS, SEEDS)
@settings(max_examples=100, deadline=None)
def test_frag_monotone(seed, bseed):
    system = system_for(seed)
    big = subset_for(frozenset(range(system.num_states)), bseed)
    small = subset_for(big, bseed + 1)
    assert frag(system, small) <= frag(system, big)


@given(SEEDS, SEEDS, MODES)
@settings(max_examples=120, deadline=None)
def test_cla_witnesses_reach_the_goal(seed, gseed, mode):
    """Following witness moves decreases rank and lands in the goal within
    num_states steps, never leaving limit-or-goal."""
    system = system_for(seed)
    goal = subset_for(system.non_error, gseed)
    limit = system.non_error
    result = cla(system, limit, goal, mode)
    allowed = limit | goal
    suc_r = system.suc_lists("repair")
    for start in result.states - goal:
        state = start
        steps = 0
        while state not in goal:
            assert steps <= system.num_states, "witness walk too long"
            assert state in allowed
            move = result.move[state]
            nexts = [move] if move is not None else sorted(set(suc_r[state]))
            assert nexts, "witness must make progress"
            for t in nexts:
                assert result.rank[t] < result.rank[state]
            state = max(nexts, key=lambda t: (result.rank[t], t))  # worst branch
            steps += 1


@given(SEEDS, KS, MODES)
@settings(max_examples=150, deadline=None)
def test_engine_matches_oracle(seed, k, mode):
    system = system_for(seed)
    goal = system.non_error
    assert safe_k(system, goal, k, mode).safe_set == brute_force_safe_k(system, goal, k, mode)
    assert res_k(system, k, mode).resilient == brute_force_res_k(system, k, mode)


@given(SEEDS, SEEDS, KS, MODES)
@settings(max_examples=100, deadline=None)
def test_oracle_monotone_in_goal_too(seed, gseed, k, mode):
    system = system_for(seed)
    big = subset_for(system.non_error, gseed)
    small = subset_for(big, gseed + 1)
    assert brute_force_safe_k(system, small, k, mode) <= brute_force_safe_k(system, big, k, mode)


@given(SEEDS)
@settings(max_examples=80, deadline=None)
def test_save_load_round_trip(seed):
    import json

    from kresil.tsf import dumps, from_json_dict

    system = system_for(seed)
    assert from_json_dict(json.loads(dumps(system))) == system


def test_concurrent_solves_share_a_system(fig1):
    from concurrent.futures import ThreadPoolExecutor

    from kresil.benchmarks import chain

    system = chain(5)
    with ThreadPoolExecutor(max_workers=4) as pool:
        futures = [pool.submit(res_k, system, k % 4) for k in range(16)]
        results = [f.result().resilient for f in futures]
    for k in range(4):
        reference = res_k(system, k).resilient
        assert all(results[i] == reference for i in range(k, 16, 4))
