"""Uniform grid decompositions of a compact box in R^d.

Cells are closed boxes indexed row-major with the last axis fastest.  Two
cells touch when their closed boxes intersect, which for a uniform grid
means every multi-index offset is at most one.  Distances between boxes
are taken in the sup norm, so the gap along each axis is computed from
multi-index offsets exactly and the maximum over axes is returned.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Sequence, Tuple

from .cells import CellSet, iter_bits
from .relation import Relation

# Absolute guard for snapping float coordinates to cell indices.  Grid
# widths in the test systems are dyadic so the arithmetic is exact; the
# guard only protects against representation noise from samplers.
_SNAP = 1e-9


@dataclass(frozen=True)
class GridSpace:
    lower: Tuple[float, ...]
    upper: Tuple[float, ...]
    divisions: Tuple[int, ...]

    def __post_init__(self):
        if not (len(self.lower) == len(self.upper) == len(self.divisions)):
            raise ValueError("lower, upper and divisions must share one length")
        if not self.lower:
            raise ValueError("the box must have at least one axis")
        for lo, hi in zip(self.lower, self.upper):
            if not hi > lo:
                raise ValueError("upper bound must exceed lower bound on every axis")
        for n in self.divisions:
            if n < 1:
                raise ValueError("every axis needs at least one division")

    @property
    def dim(self) -> int:
        return len(self.divisions)

    @property
    def cell_count(self) -> int:
        n = 1
        for d in self.divisions:
            n *= d
        return n

    @cached_property
    def widths(self) -> Tuple[float, ...]:
        return tuple((hi - lo) / n for lo, hi, n in zip(self.lower, self.upper, self.divisions))

    @property
    def diameter(self) -> float:
        """Sup-norm diameter of the whole box."""
        return max(hi - lo for lo, hi in zip(self.lower, self.upper))

    @cached_property
    def strides(self) -> Tuple[int, ...]:
        s = [1] * self.dim
        for a in range(self.dim - 2, -1, -1):
            s[a] = s[a + 1] * self.divisions[a + 1]
        return tuple(s)

    # -- index arithmetic --------------------------------------------------

    def index_of(self, multi: Sequence[int]) -> int:
        idx = 0
        for m, n, s in zip(multi, self.divisions, self.strides):
            if not 0 <= m < n:
                raise ValueError(f"multi index {tuple(multi)} out of range")
            idx += m * s
        return idx

    def multi_index(self, cell: int) -> Tuple[int, ...]:
        if not 0 <= cell < self.cell_count:
            raise ValueError(f"cell {cell} out of range")
        out = []
        for s in self.strides:
            out.append(cell // s)
            cell %= s
        return tuple(out)

    def cell_box(self, cell: int) -> Tuple[Tuple[float, ...], Tuple[float, ...]]:
        multi = self.multi_index(cell)
        lo = tuple(l + m * w for l, m, w in zip(self.lower, multi, self.widths))
        hi = tuple(l + (m + 1) * w for l, m, w in zip(self.lower, multi, self.widths))
        return lo, hi

    def cell_center(self, cell: int) -> Tuple[float, ...]:
        lo, hi = self.cell_box(cell)
        return tuple((a + b) / 2 for a, b in zip(lo, hi))

    def _axis_index(self, axis: int, value: float) -> int:
        q = (value - self.lower[axis]) / self.widths[axis]
        i = int(q + _SNAP) if q >= 0 else -1
        return min(max(i, 0), self.divisions[axis] - 1)

    def cell_of_point(self, point: Sequence[float]) -> int:
        """Cell containing the point, shared faces resolving to the higher
        index and coordinates clamped into the box."""
        return self.index_of(tuple(self._axis_index(a, v) for a, v in enumerate(point)))

    # -- metric structure --------------------------------------------------

    def box_distance(self, a: int, b: int) -> float:
        """Sup-norm distance between the closed boxes of two cells."""
        ma, mb = self.multi_index(a), self.multi_index(b)
        gap = 0.0
        for x, y, w in zip(ma, mb, self.widths):
            k = abs(x - y)
            if k > 1:
                gap = max(gap, (k - 1) * w)
        return gap

    def center_distance(self, a: int, b: int) -> float:
        """Sup-norm distance between the centers of two cells."""
        ma, mb = self.multi_index(a), self.multi_index(b)
        return max(abs(x - y) * w for x, y, w in zip(ma, mb, self.widths))

    def set_distance(self, cell: int, cells: CellSet) -> float:
        """Distance from one cell's box to a union of boxes; the empty set
        sits at diameter + 1."""
        if not cells:
            return self.diameter + 1.0
        return min(self.box_distance(cell, c) for c in cells)

    def nearest_cells(self, cell: int, cells: CellSet) -> Tuple[int, ...]:
        """All members of ``cells`` realizing the minimal box distance."""
        if not cells:
            return ()
        best = self.set_distance(cell, cells)
        return tuple(c for c in cells if self.box_distance(cell, c) <= best)

    # -- combinatorial topology --------------------------------------------

    @cached_property
    def _neighbor_masks(self) -> Tuple[int, ...]:
        masks = []
        offsets = list(itertools.product((-1, 0, 1), repeat=self.dim))
        for cell in range(self.cell_count):
            multi = self.multi_index(cell)
            m = 0
            for off in offsets:
                nb = tuple(x + o for x, o in zip(multi, off))
                if all(0 <= v < n for v, n in zip(nb, self.divisions)):
                    m |= 1 << self.index_of(nb)
            masks.append(m)
        return tuple(masks)

    def closure_mask(self, mask: int) -> int:
        out = mask
        for cell in iter_bits(mask):
            out |= self._neighbor_masks[cell]
        return out

    def cell_set(self, cells) -> CellSet:
        return CellSet.from_cells(self.cell_count, cells, self)

    def empty_set(self) -> CellSet:
        return CellSet.empty(self.cell_count, self)

    def full_set(self) -> CellSet:
        return CellSet.full(self.cell_count, self)


def dilation_relation(space: GridSpace, eps: float, strict_identity: bool = False) -> Relation:
    """The symmetric relation pairing cells whose boxes sit within ``eps``
    of each other.

    At ``eps == 0`` this is the touching relation, the finest dilation the
    grid can express; ``strict_identity`` replaces that with the identity
    for exact-scale analyses.
    """
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    if strict_identity:
        if eps != 0:
            raise ValueError("strict_identity only makes sense at eps == 0")
        return Relation.identity(space.cell_count, space)
    reaches = []
    for w in space.widths:
        k = 1
        while k * w <= eps + _SNAP:
            k += 1
        reaches.append(k)
    rows = []
    for cell in range(space.cell_count):
        multi = space.multi_index(cell)
        ranges = [
            range(max(0, m - k), min(n, m + k + 1))
            for m, k, n in zip(multi, reaches, space.divisions)
        ]
        row = 0
        for nb in itertools.product(*ranges):
            row |= 1 << space.index_of(nb)
        rows.append(row)
    return Relation(space.cell_count, tuple(rows), space)


def touching_relation(space: GridSpace) -> Relation:
    return dilation_relation(space, 0.0)


def v_eps_relation(space: GridSpace, eps: float = 0.0, strict_identity: bool = False) -> Relation:
    """Cells within ``eps`` of each other; the basic dilation step used by
    chain analyses and robustness ladders."""
    return dilation_relation(space, eps, strict_identity)


def _shared_space(a: CellSet, b: CellSet) -> GridSpace:
    if a.space is None or b.space is None:
        raise ValueError("both cell sets must carry a grid space")
    if a.space is not b.space and a.space != b.space:
        raise ValueError("cell sets live on different grid spaces")
    return a.space


def directed_hausdorff(source: CellSet, target: CellSet) -> float:
    """sup over source cells of the distance to the nearest target cell,
    measured between cell centers.

    An empty source imposes no constraint and scores 0; an empty target
    with a nonempty source is pinned at diameter + 1, strictly above any
    realizable center distance.
    """
    space = _shared_space(source, target)
    if not source:
        return 0.0
    if not target:
        return space.diameter + 1.0
    return max(min(space.center_distance(s, t) for t in target) for s in source)


def hausdorff_distance(a: CellSet, b: CellSet) -> float:
    """Hausdorff distance between two cell sets over cell centers.

    Restricted to nonempty sets this is a genuine metric; the empty set
    sits at distance diameter + 1 from every nonempty set and at 0 from
    itself.
    """
    return max(directed_hausdorff(a, b), directed_hausdorff(b, a))


def set_closure(cells: CellSet) -> CellSet:
    return cells.closure()


def set_interior(cells: CellSet) -> CellSet:
    return cells.interior()


def set_boundary(cells: CellSet) -> CellSet:
    return cells.boundary()


def outer_approximate_map(
    space: GridSpace,
    sampler: Callable[[Tuple[float, ...]], Sequence[float]],
    bloat: float = 0.0,
    subdivisions: int = 2,
) -> Relation:
    """Outer approximation of a point map as a cell relation.

    Every cell is sampled on its corners, its center and a uniform lattice
    with ``subdivisions`` pieces per axis.  Sampled images are clamped into
    the box, their per-axis hull is inflated by ``bloat``, and the hull is
    snapped to cell index ranges with the same shared-face convention as
    :meth:`GridSpace.cell_of_point`.
    """
    if bloat < 0:
        raise ValueError("bloat must be nonnegative")
    if subdivisions < 1:
        raise ValueError("subdivisions must be at least 1")
    dim = space.dim
    rows = []
    for cell in range(space.cell_count):
        lo, hi = space.cell_box(cell)
        axis_points = []
        for a in range(dim):
            pts = {lo[a], hi[a], (lo[a] + hi[a]) / 2}
            for t in range(subdivisions + 1):
                pts.add(lo[a] + (hi[a] - lo[a]) * t / subdivisions)
            axis_points.append(sorted(pts))
        h_lo = [float("inf")] * dim
        h_hi = [float("-inf")] * dim
        for pt in itertools.product(*axis_points):
            img = sampler(pt)
            if len(img) != dim:
                raise ValueError("sampler returned a point of the wrong dimension")
            for a in range(dim):
                v = min(max(img[a], space.lower[a]), space.upper[a])
                h_lo[a] = min(h_lo[a], v)
                h_hi[a] = max(h_hi[a], v)
        ranges = []
        for a in range(dim):
            lo_v = max(h_lo[a] - bloat, space.lower[a])
            hi_v = min(h_hi[a] + bloat, space.upper[a])
            ranges.append(range(space._axis_index(a, lo_v), space._axis_index(a, hi_v) + 1))
        row = 0
        for nb in itertools.product(*ranges):
            row |= 1 << space.index_of(nb)
        rows.append(row)
    return Relation(space.cell_count, tuple(rows), space)
