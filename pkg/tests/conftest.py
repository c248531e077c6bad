"""Shared builders for the test suite.

Heavy sampled systems (the 32x32 saddle family) are session scoped so
the unit tests and the acceptance gate pay for them once.
"""
from __future__ import annotations

import random
from typing import Dict, Iterable, Sequence, Set, Tuple

import pytest
from hypothesis import settings

from gridconley import (
    CellSet,
    GridSpace,
    Relation,
    get_sampler,
    outer_approximate_map,
)

settings.register_profile("suite", deadline=None, max_examples=60)
settings.load_profile("suite")


def rel_from_edges(size: int, edges: Iterable[Tuple[int, int]], space=None) -> Relation:
    rows = [0] * size
    for x, y in edges:
        rows[x] |= 1 << y
    return Relation(size, tuple(rows), space)


def cells_of(size: int, members: Iterable[int], space=None) -> CellSet:
    return CellSet.from_cells(size, members, space)


def rows_as_sets(rel: Relation) -> Dict[int, Set[int]]:
    return {
        x: {y for y in range(rel.size) if rel.rows[x] >> y & 1}
        for x in range(rel.size)
    }


def random_relation(rng: random.Random, size: int, density: float = 0.3) -> Relation:
    rows = []
    for _ in range(size):
        row = 0
        for y in range(size):
            if rng.random() < density:
                row |= 1 << y
        rows.append(row)
    return Relation(size, tuple(rows))


def square_region(space: GridSpace, lo: int, hi: int) -> CellSet:
    """Cells whose every multi index lies in [lo, hi]."""
    members = [
        c
        for c in range(space.cell_count)
        if all(lo <= m <= hi for m in space.multi_index(c))
    ]
    return CellSet.from_cells(space.cell_count, members, space)


# -- doubling map family ---------------------------------------------------


def doubling_system(divisions: int) -> Tuple[GridSpace, Relation]:
    space = GridSpace((-1.0,), (1.0,), (divisions,))
    rel = outer_approximate_map(space, get_sampler("double", space, {}))
    return space, rel


@pytest.fixture(scope="session")
def dbl8():
    return doubling_system(8)


@pytest.fixture(scope="session")
def dbl32():
    return doubling_system(32)


@pytest.fixture(scope="session")
def dbl64():
    return doubling_system(64)


# -- planar saddle family --------------------------------------------------


def saddle_system(divisions: int, **params) -> Tuple[GridSpace, Relation]:
    space = GridSpace((-1.0, -1.0), (1.0, 1.0), (divisions, divisions))
    rel = outer_approximate_map(space, get_sampler("saddle", space, params))
    return space, rel


@pytest.fixture(scope="session")
def sdl32():
    return saddle_system(32)


@pytest.fixture(scope="session")
def sdl32_region(sdl32):
    space, _ = sdl32
    return square_region(space, 12, 19)


@pytest.fixture(scope="session")
def saddle_surjective32():
    space = GridSpace((-1.0, -1.0), (1.0, 1.0), (32, 32))
    rel = outer_approximate_map(space, get_sampler("saddle_surjective", space, {}))
    return space, rel


@pytest.fixture(scope="session")
def euler32():
    """Half-step Euler discretization of a linear saddle flow."""
    from gridconley import SemiflowApprox

    space = GridSpace((-1.0, -1.0), (1.0, 1.0), (32, 32))
    step = outer_approximate_map(
        space, get_sampler("saddle", space, {"expand": 1.5, "contract": 0.5})
    )
    return SemiflowApprox(space=space, step=step, delta=0.5, steps_per_unit=2)


# -- three cell line -------------------------------------------------------


@pytest.fixture()
def line3():
    space = GridSpace((0.0,), (3.0,), (3,))
    return space, rel_from_edges(3, [(0, 1), (1, 2)], space)
