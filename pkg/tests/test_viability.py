"""Forward/backward cores, survival times, path enumeration, limit sets."""
from __future__ import annotations

import math
import random

import pytest

import oracles
from conftest import cells_of, random_relation, rel_from_edges
from gridconley import (
    annihilation_depth,
    enumerate_paths,
    invariance_predicates,
    minimal_viable_subsets,
    omega_limsup,
    viability_report,
)
from gridconley.viability import (
    absorbed_matches_star,
    absorbed_within,
    alpha_limsup,
    omega_limsup_detail,
)

INF = math.inf


def chain5():
    # 0 -> 1 -> 2 -> 3 <-> 4 with a tail that dies
    return rel_from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 3)])


class TestCores:
    def test_against_fixpoint_oracle(self):
        rng = random.Random(71)
        for _ in range(50):
            rel = random_relation(rng, 8)
            members = {c for c in range(8) if rng.random() < 0.6}
            region = cells_of(8, members)
            report = viability_report(rel, region)
            adj = oracles.adjacency_of(rel)
            assert set(report.c_plus) == oracles.forward_viable(8, adj, members)
            assert set(report.c_minus) == oracles.backward_viable(8, adj, members)
            assert report.c_pm == report.c_plus & report.c_minus

    def test_chain_example(self):
        region = cells_of(5, range(5))
        report = viability_report(chain5(), region)
        assert set(report.c_plus) == {0, 1, 2, 3, 4}
        # no predecessor at 0 unravels the whole tail backwards
        assert set(report.c_minus) == {3, 4}
        assert set(report.c_pm) == {3, 4}
        assert set(report.terminal) == set()
        assert set(report.terminal_bwd) == {0}

    def test_survival_times(self):
        # cut the cycle out of the region, all that is left dies out
        region = cells_of(5, [0, 1, 2, 3])
        report = viability_report(chain5(), region)
        assert report.nu == {0: 3, 1: 2, 2: 1, 3: 0}
        assert report.nu_bar == {0: 0, 1: 1, 2: 2, 3: 3}

    def test_infinite_survival_on_core(self):
        region = cells_of(5, range(5))
        report = viability_report(chain5(), region)
        assert report.nu[3] == INF and report.nu[4] == INF
        assert report.nu[0] == INF  # 0 feeds into the cycle

    def test_terminal_cells(self):
        rel = rel_from_edges(4, [(0, 1), (1, 2)])
        report = viability_report(rel, cells_of(4, [0, 1, 3]))
        # 1 maps out of the region only; 3 has no image at all
        assert set(report.terminal) == {1, 3}


class TestInvariance:
    def test_invariant_cycle(self):
        rel = chain5()
        rec = invariance_predicates(rel, cells_of(5, [3, 4]))
        assert rec.plus_invariant and rec.invariant
        assert rec.plus_viable and rec.minus_viable and rec.viable

    def test_forward_but_not_backward(self):
        rel = chain5()
        rec = invariance_predicates(rel, cells_of(5, [2, 3, 4]))
        assert rec.plus_invariant
        assert not rec.minus_invariant
        assert not rec.invariant  # image {3, 4} is a proper subset
        assert rec.plus_viable
        assert not rec.minus_viable

    def test_oracle_agreement(self):
        rng = random.Random(73)
        for _ in range(40):
            rel = random_relation(rng, 7)
            members = {c for c in range(7) if rng.random() < 0.5}
            cells = cells_of(7, members)
            rec = invariance_predicates(rel, cells)
            adj = oracles.adjacency_of(rel)
            image = oracles.image_of(adj, members)
            assert rec.plus_invariant == (image <= members)
            assert rec.invariant == (image == members)


class TestAbsorption:
    def test_matches_star_everywhere(self):
        rng = random.Random(79)
        for _ in range(50):
            rel = random_relation(rng, 7)
            region = cells_of(7, {c for c in range(7) if rng.random() < 0.6})
            for depth in (1, 2, 3, 7):
                assert absorbed_matches_star(rel, region, depth)

    def test_absorbed_within_counts(self):
        region = cells_of(5, [0, 1, 2, 3])
        rel = chain5()
        assert set(absorbed_within(rel, region, 1)) == {3}
        assert set(absorbed_within(rel, region, 3)) == {1, 2, 3}
        assert set(absorbed_within(rel, region, 4)) == {0, 1, 2, 3}
        assert set(absorbed_within(rel, region, 0)) == set()


class TestPaths:
    def test_exact_length_lexicographic(self):
        rel = rel_from_edges(3, [(0, 1), (0, 2), (1, 2)])
        region = cells_of(3, range(3))
        paths, truncated = enumerate_paths(rel, region, 2)
        assert not truncated
        assert paths == ((0, 1, 2),)
        one_step, _ = enumerate_paths(rel, region, 1)
        assert one_step == ((0, 1), (0, 2), (1, 2))

    def test_zero_steps_lists_cells(self):
        rel = rel_from_edges(3, [])
        paths, _ = enumerate_paths(rel, cells_of(3, [2, 0]), 0)
        assert paths == ((0,), (2,))

    def test_cap_truncates(self):
        rel = rel_from_edges(2, [(0, 0), (0, 1), (1, 0), (1, 1)])
        paths, truncated = enumerate_paths(rel, cells_of(2, [0, 1]), 3, cap=5)
        assert truncated
        assert len(paths) == 5

    def test_region_confines(self):
        rel = chain5()
        paths, _ = enumerate_paths(rel, cells_of(5, [0, 1, 2]), 2)
        assert paths == ((0, 1, 2),)


class TestAnnihilation:
    def test_infinite_on_viable_core(self):
        rel = chain5()
        assert annihilation_depth(rel, cells_of(5, range(5))) == INF

    def test_counts_steps_to_empty(self):
        rel = chain5()
        region = cells_of(5, [0, 1, 2, 3])
        assert annihilation_depth(rel, region) == 4
        assert annihilation_depth(rel, region, start=cells_of(5, [2, 3])) == 2
        assert annihilation_depth(rel, region, start=cells_of(5, [])) == 0

    def test_simulation_agreement(self):
        rng = random.Random(83)
        for _ in range(40):
            rel = random_relation(rng, 7)
            members = {c for c in range(7) if rng.random() < 0.5}
            depth = annihilation_depth(rel, cells_of(7, members))
            adj = oracles.adjacency_of(rel)
            steps = oracles.longest_path_inside(7, adj, members, cap=64)
            if depth == INF:
                assert steps == 64
            else:
                assert steps == depth


class TestMinimalViable:
    def test_cycles_are_the_minimal_sets(self):
        rel = rel_from_edges(
            6, [(0, 1), (1, 0), (2, 3), (3, 4), (4, 2), (5, 5), (1, 2)]
        )
        subsets = minimal_viable_subsets(rel, cells_of(6, range(6)))
        got = {tuple(s) for s in subsets}
        assert got == {(0, 1), (2, 3, 4), (5,)}

    def test_empty_when_region_dies(self):
        rel = rel_from_edges(3, [(0, 1), (1, 2)])
        assert minimal_viable_subsets(rel, cells_of(3, range(3))) == ()

    def test_members_are_viable(self):
        rng = random.Random(89)
        for _ in range(20):
            rel = random_relation(rng, 6)
            region = cells_of(6, {c for c in range(6) if rng.random() < 0.7})
            adj = oracles.adjacency_of(rel)
            for sub in minimal_viable_subsets(rel, region):
                members = set(sub)
                assert members
                assert oracles.forward_viable(6, adj, members) == members
                for cell in members:
                    smaller = members - {cell}
                    assert not oracles.forward_viable(6, adj, smaller) or not (
                        oracles.forward_viable(6, adj, smaller) < members
                    )


class TestLimits:
    def test_omega_of_chain(self):
        rel = chain5()
        detail = omega_limsup_detail(rel, cells_of(5, [0]))
        assert set(detail.limit) == {3, 4}
        assert detail.period == 2
        assert detail.transient == 3
        assert detail.dom_total

    def test_alpha_uses_inverse(self):
        rel = chain5()
        # backward images alternate {1, 3} and {0, 2, 4} once the tail joins
        assert set(alpha_limsup(rel, cells_of(5, [4]))) == {0, 1, 2, 3, 4}
        assert set(alpha_limsup(chain5(), cells_of(5, [0]))) == set()

    def test_dom_total_flag(self):
        rel = rel_from_edges(3, [(0, 1)])
        detail = omega_limsup_detail(rel, cells_of(3, [0]))
        assert not detail.dom_total
        assert omega_limsup(rel, cells_of(3, [0])).members == ()
