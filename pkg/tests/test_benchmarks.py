import random

import pytest

from kresil import brute_force_res_k, k_max, validate
from kresil.benchmarks import (
    BenchmarkSpec,
    avionics,
    chain,
    clock_sync,
    expected_resilience,
    generate,
    generate_text,
    pbft,
    random_system,
    simple_voting,
    voting,
)
from kresil.cefsm import CefsmModel, compile_model, parse

from .conftest import build_fig1


class TestSpec:
    def test_expected_k_formulas(self):
        assert expected_resilience("avionics", n=3, m=3) == 1
        assert expected_resilience("avionics", n=8, m=8) == 3
        assert expected_resilience("voting", r=5) == 2
        assert expected_resilience("simple_voting", r=20) == 9
        assert expected_resilience("pbft", r=4) == 1
        assert expected_resilience("clock_sync", r=9) == 2
        assert expected_resilience("chain", ell=3) == 4

    def test_spec_records_expected_k(self):
        assert BenchmarkSpec("voting", r=5).expected_k == 2
        assert BenchmarkSpec("avionics", n=3, m=3).expected_k == 1

    def test_missing_sizes_rejected(self):
        with pytest.raises(ValueError):
            BenchmarkSpec("avionics", n=3)
        with pytest.raises(ValueError):
            BenchmarkSpec("voting")
        with pytest.raises(ValueError):
            BenchmarkSpec("nonsense", r=2)

    def test_generate_dispatch(self):
        assert isinstance(generate(BenchmarkSpec("voting", r=3)), CefsmModel)
        assert generate(BenchmarkSpec("chain", ell=1)) == build_fig1()

    def test_generated_text_parses_back(self):
        for spec in (
            BenchmarkSpec("avionics", n=2, m=2),
            BenchmarkSpec("voting", r=3),
            BenchmarkSpec("simple_voting", r=3),
            BenchmarkSpec("pbft", r=4),
            BenchmarkSpec("clock_sync", r=4),
        ):
            model = parse(generate_text(spec))
            assert isinstance(model, CefsmModel)
            assert f"k = {spec.expected_k}" in generate_text(spec)


class TestChain:
    def test_chain1_is_the_shipped_example(self, fig1):
        assert chain(1) == fig1

    def test_chain_sizes(self):
        s = chain(4)
        assert s.num_states == 7  # 6 non-error + sink
        assert validate(s) == []

    def test_levels_by_construction(self):
        for ell in range(0, 5):
            res = k_max(chain(ell))
            assert (res.value, res.unbounded) == (ell + 1, False), ell


class TestModelLevels:
    """Design levels of the replicated-system families, oracle-checked."""

    @pytest.mark.parametrize("n,m", [(1, 1), (2, 2), (3, 3), (4, 4)])
    def test_avionics(self, n, m):
        system, _ = compile_model(avionics(n, m))
        assert validate(system) == []
        res = k_max(system, mode="repair")
        expected = expected_resilience("avionics", n=n, m=m)
        assert (res.value, res.unbounded) == (expected, False)

    @pytest.mark.parametrize("r", [1, 2, 3, 5, 7])
    def test_voting(self, r):
        system, _ = compile_model(voting(r))
        assert validate(system) == []
        res = k_max(system, mode="repair")
        expected = expected_resilience("voting", r=r)
        assert (res.value, res.unbounded) == (expected, False)

    @pytest.mark.parametrize("r", [2, 3, 5, 7])
    def test_simple_voting(self, r):
        system, _ = compile_model(simple_voting(r))
        res = k_max(system, mode="repair")
        assert res.value == expected_resilience("simple_voting", r=r)

    @pytest.mark.parametrize("r", [4, 5, 6, 7])
    def test_pbft(self, r):
        system, _ = compile_model(pbft(r))
        res = k_max(system, mode="repair")
        assert res.value == expected_resilience("pbft", r=r)

    @pytest.mark.parametrize("r", [4, 5, 6])
    def test_clock_sync(self, r):
        system, _ = compile_model(clock_sync(r))
        res = k_max(system, mode="repair")
        assert res.value == expected_resilience("clock_sync", r=r)

    @pytest.mark.parametrize(
        "family,sizes",
        [
            ("avionics", {"n": 1, "m": 1}),
            ("avionics", {"n": 2, "m": 2}),
            ("avionics", {"n": 3, "m": 3}),
            ("avionics", {"n": 4, "m": 4}),
            ("voting", {"r": 3}),
            ("voting", {"r": 5}),
            ("voting", {"r": 7}),
            ("simple_voting", {"r": 5}),
            ("pbft", {"r": 3}),
            ("pbft", {"r": 4}),
            ("clock_sync", {"r": 4}),
            ("clock_sync", {"r": 5}),
        ],
    )
    def test_levels_cross_checked_by_exhaustive_solver(self, family, sizes):
        spec = BenchmarkSpec(family, **sizes)
        system, _ = compile_model(generate(spec))
        expected = spec.expected_k
        caps = dict(max_states=system.num_states, max_k=expected + 1, mode="repair")
        assert system.initial in brute_force_res_k(system, expected, **caps)
        assert system.initial not in brute_force_res_k(system, expected + 1, **caps)

    def test_avionics_single_failure_is_fatal_at_minimum_redundancy(self):
        system, _ = compile_model(avionics(1, 1))
        targets = system.successors(system.initial, "uncontrolled")
        assert targets and targets <= system.errors


class TestRandomSystems:
    def test_always_valid(self):
        for i in range(200):
            system = random_system(random.Random(i), density=0.2 if i % 2 else 0.4)
            assert validate(system) == [], i

    def test_reproducible(self):
        a = random_system(random.Random(7))
        b = random_system(random.Random(7))
        assert a == b

    def test_size_bounds(self):
        for i in range(50):
            s = random_system(random.Random(i))
            assert 3 <= s.num_states <= 8
