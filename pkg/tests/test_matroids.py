"""Matroid oracles: membership, rank, contraction, exchange maps, axioms."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from probe_kit.matroids import (
    ExchangeMap,
    Matroid,
    exchange_map,
    exchange_map_violations,
    explicit_matroid,
    free_matroid,
    graphic_matroid,
    matroid_axiom_violations,
    partition_matroid,
    uniform_matroid,
)

# elements are named a=0, b=1, c=2, d=3 in comments below


class TestMembership:
    def test_uniform_within_budget(self):
        m = uniform_matroid(3, 2)
        assert m.is_independent({0, 1})

    def test_graphic_triangle_cycle_dependent(self):
        # triangle on 3 vertices; the three edges form a cycle
        m = graphic_matroid(3, [(0, 1), (1, 2), (2, 0)])
        assert not m.is_independent({0, 1, 2})
        assert m.is_independent({0, 1})

    def test_partition_one_per_part(self):
        m = partition_matroid(3, [[0, 1], [2]], [1, 1])
        assert m.is_independent({0, 2})
        assert not m.is_independent({0, 1})


class TestRank:
    def test_uniform_rank_min(self):
        m = uniform_matroid(4, 2)
        assert m.rank({0, 1, 2}) == 2

    def test_empty_rank_zero(self):
        for m in (uniform_matroid(4, 2), free_matroid(3), partition_matroid(2, [[0], [1]], [1, 1])):
            assert m.rank(set()) == 0

    def test_explicit_rank_read_from_list(self):
        m = explicit_matroid(2, [[], [0], [1]])
        assert m.rank({0, 1}) == 1

    def test_rank_of_ground_equals_full_rank(self):
        m = graphic_matroid(4, [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)])
        assert m.full_rank() == 3  # spanning tree of 4 vertices


class TestContraction:
    def test_uniform_contraction_budget_consumed(self):
        m = uniform_matroid(4, 2).contract(0)
        assert m.is_independent({1})
        assert not m.is_independent({1, 2})

    def test_partition_contraction_part_capacity_consumed(self):
        m = partition_matroid(3, [[0, 1], [2]], [1, 1]).contract(0)
        assert not m.is_independent({1})
        assert m.is_independent({2})

    def test_contraction_commutes(self):
        matroids = [
            uniform_matroid(5, 3),
            partition_matroid(5, [[0, 1, 2], [3, 4]], [2, 1]),
            graphic_matroid(4, [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)]),
        ]
        for m in matroids:
            for e in range(m.ground_size):
                for f in range(m.ground_size):
                    if e == f or not m.is_independent({e, f}):
                        continue
                    a = m.contract(e).contract(f)
                    b = m.contract(f).contract(e)
                    for mask in range(1 << m.ground_size):
                        if mask & ((1 << e) | (1 << f)):
                            continue
                        assert a.indep_mask(mask) == b.indep_mask(mask)

    def test_contracting_loop_rejected(self):
        m = explicit_matroid(2, [[], [0]])
        with pytest.raises(ValueError):
            m.contract(1)

    def test_contracted_rank_shift(self):
        m = uniform_matroid(4, 2)
        mc = m.contract(0)
        # rank in M/e is r(S + e) - 1
        assert mc.rank({1, 2, 3}) == 1


class TestExchangeMap:
    def test_uniform_overlapping_pair(self):
        # A={a,b}, B={b,c} in U_{2,4}: phi(b)=b forced; phi(a) must land on c
        # since B+a has size 3 (dependent) and b is already taken.
        m = uniform_matroid(4, 2)
        em = exchange_map(m, {0, 1}, {1, 2})
        assert em[1] == 1
        assert em[0] == 2
        assert exchange_map_violations(m, em) == []

    def test_uniform_small_source(self):
        # A={a}, B={b,c}: bot is invalid (B+a dependent), so phi(a) in B.
        m = uniform_matroid(4, 2)
        em = exchange_map(m, {0}, {1, 2})
        assert em[0] in {1, 2}
        assert exchange_map_violations(m, em) == []

    def test_partition_forced_assignment(self):
        # parts {a,b}|{c,d} caps (1,1), A={a,c}, B={b,d}: swaps must stay in
        # the same part, so phi(a)=b and phi(c)=d is the only valid choice.
        m = partition_matroid(4, [[0, 1], [2, 3]], [1, 1])
        em = exchange_map(m, {0, 2}, {1, 3})
        assert em[0] == 1
        assert em[2] == 3
        assert exchange_map_violations(m, em) == []

    def test_dependent_input_rejected(self):
        m = uniform_matroid(3, 1)
        with pytest.raises(ValueError):
            exchange_map(m, {0, 1}, {2})

    def test_violation_checker_catches_bad_map(self):
        m = uniform_matroid(4, 2)
        bad = ExchangeMap(frozenset({0, 1}), frozenset({1, 2}), {0: None, 1: 1})
        problems = exchange_map_violations(m, bad)
        assert any("bot" in p for p in problems)

    @settings(deadline=None, max_examples=60)
    @given(st.integers(0, 10_000))
    def test_random_pairs_pass_property_check(self, seed):
        rng = random.Random(seed)
        m = _random_small_matroid(rng)
        n = m.ground_size
        a = m.max_independent_subset(rng.sample(range(n), n))
        b = m.max_independent_subset(rng.sample(range(n), n))
        # random independent subsets of two random bases
        amask = a & rng.getrandbits(n)
        em = exchange_map(m, _bits(amask), _bits(b))
        assert exchange_map_violations(m, em) == []


class TestAxioms:
    def test_constructors_pass_axiom_checks(self):
        for m in (
            uniform_matroid(5, 2),
            partition_matroid(5, [[0, 1], [2, 3]], [1, 2]),  # element 4 free
            graphic_matroid(4, [(0, 1), (1, 2), (2, 0), (0, 3)]),
            explicit_matroid(3, [[], [0], [1], [2], [0, 2], [1, 2]]),
            free_matroid(4),
        ):
            assert matroid_axiom_violations(m) == []

    def test_sloppy_explicit_input_closed_downward(self):
        m = explicit_matroid(2, [[], [0, 1]])
        assert m.is_independent({0})
        assert m.is_independent({1})
        assert matroid_axiom_violations(m) == []

    def test_explicit_requires_empty_set(self):
        with pytest.raises(ValueError):
            explicit_matroid(2, [[0, 1]])

    def test_axiom_checker_flags_exchange_failure(self):
        # downward-closed family that is not a matroid: bases {a} and {b,c}
        # differ in size, violating the exchange axiom
        m = explicit_matroid(3, [[], [0], [1, 2]])
        assert matroid_axiom_violations(m) != []

    def test_axiom_checker_size_cap(self):
        with pytest.raises(ValueError):
            matroid_axiom_violations(uniform_matroid(13, 3))


class TestSerialization:
    def test_round_trip_all_kinds(self):
        matroids = [
            uniform_matroid(4, 2),
            partition_matroid(4, [[0, 1], [2, 3]], [1, 1]),
            graphic_matroid(3, [(0, 1), (1, 2), (2, 0)]),
            explicit_matroid(2, [[], [0], [1]]),
        ]
        for m in matroids:
            m2 = Matroid.from_json(m.to_json())
            for mask in range(1 << m.ground_size):
                assert m.indep_mask(mask) == m2.indep_mask(mask)

    def test_round_trip_preserves_contraction(self):
        m = uniform_matroid(4, 2).contract(1)
        m2 = Matroid.from_json(m.to_json())
        assert m2.contracted == frozenset({1})
        assert not m2.is_independent({0, 2})


def _random_small_matroid(rng):
    kind = rng.choice(["uniform", "partition", "graphic"])
    if kind == "uniform":
        n = rng.randint(2, 6)
        return uniform_matroid(n, rng.randint(1, n))
    if kind == "partition":
        n = rng.randint(2, 6)
        elems = list(range(n))
        rng.shuffle(elems)
        cut = rng.randint(1, n - 1)
        parts = [sorted(elems[:cut]), sorted(elems[cut:])]
        return partition_matroid(n, parts, [rng.randint(1, 2), rng.randint(1, 2)])
    edges = []
    nv = rng.randint(3, 4)
    for _ in range(rng.randint(3, 6)):
        u, v = rng.sample(range(nv), 2)
        edges.append((u, v))
    return graphic_matroid(nv, edges)


def _bits(mask):
    return [i for i in range(mask.bit_length()) if mask >> i & 1]
