"""Cell sets: lattice algebra and the touching topology."""
from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from conftest import cells_of
from gridconley import CellSet, GridSpace


@pytest.fixture()
def plane33():
    return GridSpace((0.0, 0.0), (3.0, 3.0), (3, 3))


def subset33(plane33, members):
    return cells_of(9, members, plane33)


class TestAlgebra:
    def test_construction_and_iteration(self):
        s = CellSet.from_cells(5, [3, 1, 1])
        assert s.members == (1, 3)
        assert list(s) == [1, 3]
        assert len(s) == 2
        assert 3 in s and 0 not in s
        assert bool(s) and not bool(CellSet.empty(5))

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            CellSet.from_cells(3, [3])
        with pytest.raises(ValueError):
            CellSet(3, 0b1000)

    def test_boolean_lattice(self):
        a = CellSet.from_cells(6, [0, 1, 2])
        b = CellSet.from_cells(6, [2, 3])
        assert (a | b).members == (0, 1, 2, 3)
        assert (a & b).members == (2,)
        assert (a - b).members == (0, 1)
        assert a.complement().members == (3, 4, 5)
        assert b <= a | b
        assert b < a | b
        assert not a <= b

    def test_universe_mismatch_rejected(self):
        with pytest.raises(ValueError):
            CellSet.from_cells(4, [0]) | CellSet.from_cells(5, [0])


class TestTopology:
    def test_closure_matches_oracle(self, plane33):
        for members in ({4}, {0}, {0, 8}, {1, 3}, set(range(9))):
            got = set(subset33(plane33, members).closure())
            assert got == oracles.closure_set(plane33, set(members))

    def test_interior_matches_oracle(self, plane33):
        for members in ({4}, {0, 1, 3, 4}, set(range(9)), {0, 1, 2, 3, 5, 6, 7, 8}):
            got = set(subset33(plane33, members).interior())
            assert got == oracles.interior_set(plane33, set(members))

    def test_center_cell(self, plane33):
        center = subset33(plane33, {4})
        assert set(center.closure()) == set(range(9))
        assert center.interior().members == ()
        # boundary stays within the set itself
        assert set(center.boundary()) == {4}

    def test_full_grid_is_clopen(self, plane33):
        full = subset33(plane33, set(range(9)))
        assert full.closure() == full
        assert full.interior() == full
        assert not full.boundary()

    def test_relative_operations(self, plane33):
        row = subset33(plane33, {0, 1, 2})
        # closure_in clips the touching closure to the ambient set
        assert set(subset33(plane33, {1}).closure_in(row)) == {0, 1, 2}
        # interior_in only discards members touching the rest of the ambient
        assert set(subset33(plane33, {0, 1}).interior_in(row)) == {0}
        assert row.interior_in(row) == row

    def test_compactly_inside(self, plane33):
        small = subset33(plane33, {4})
        big = subset33(plane33, set(range(9)))
        assert small.compactly_inside(big)
        assert not subset33(plane33, {0}).compactly_inside(
            subset33(plane33, {0, 1, 3, 4})
        )

    @given(st.sets(st.integers(min_value=0, max_value=8)))
    def test_closure_interior_duality(self, members):
        space = GridSpace((0.0, 0.0), (3.0, 3.0), (3, 3))
        s = cells_of(9, members, space)
        assert s.interior() == s.complement().closure().complement()
        assert s <= s.closure()
        assert s.interior() <= s
        # one dilation layer per application, so closure is monotone
        assert s.closure() <= s.closure().closure()
