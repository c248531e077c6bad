"""Closed relations on a finite cell universe, stored as bitmask rows.

``rows[x]`` is the bitmask of cells y with x -> y.  All the calculus fits
this picture: image and preimage are row unions, composition is a row
gather, the orbit relation is the transitive closure, and the star
operation is the dual of the preimage of the complement.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple

from .cells import CellSet, iter_bits, mask_of


@dataclass
class RepresentationConfig:
    """Row representation policy for composition.

    Rows denser than ``density_threshold`` are combined with whole-mask
    bitwise ors, sparser ones through sorted adjacency merging.  Both paths
    produce identical relations.
    """

    density_threshold: float = 0.25


config = RepresentationConfig()


@dataclass(frozen=True)
class Relation:
    size: int
    rows: Tuple[int, ...]
    space: Optional[object] = field(default=None, compare=False)

    def __post_init__(self):
        if len(self.rows) != self.size:
            raise ValueError("row count does not match the cell universe")
        full = (1 << self.size) - 1
        for r in self.rows:
            if r & ~full:
                raise ValueError("row has bits outside the cell range")

    # -- constructors ------------------------------------------------------

    @staticmethod
    def from_edges(size: int, edges: Iterable[Tuple[int, int]], space=None) -> "Relation":
        rows = [0] * size
        for x, y in edges:
            if not (0 <= x < size and 0 <= y < size):
                raise ValueError(f"edge ({x}, {y}) out of range for {size} cells")
            rows[x] |= 1 << y
        return Relation(size, tuple(rows), space)

    @staticmethod
    def from_rows(size: int, rows: Sequence[int], space=None) -> "Relation":
        return Relation(size, tuple(rows), space)

    @staticmethod
    def identity(size: int, space=None) -> "Relation":
        return Relation(size, tuple(1 << x for x in range(size)), space)

    @staticmethod
    def empty(size: int, space=None) -> "Relation":
        return Relation(size, (0,) * size, space)

    @staticmethod
    def full(size: int, space=None) -> "Relation":
        full = (1 << size) - 1
        return Relation(size, (full,) * size, space)

    # -- basic views -------------------------------------------------------

    def edges(self) -> Iterator[Tuple[int, int]]:
        for x, row in enumerate(self.rows):
            for y in iter_bits(row):
                yield (x, y)

    def edge_count(self) -> int:
        return sum(r.bit_count() for r in self.rows)

    def adjacency(self) -> List[Tuple[int, ...]]:
        return [tuple(iter_bits(r)) for r in self.rows]

    def density(self) -> float:
        if self.size == 0:
            return 0.0
        return self.edge_count() / (self.size * self.size)

    def has_edge(self, x: int, y: int) -> bool:
        return bool(self.rows[x] >> y & 1)

    def _wrap(self, rows: Sequence[int]) -> "Relation":
        return Relation(self.size, tuple(rows), self.space)

    def _cellset(self, mask: int) -> CellSet:
        return CellSet(self.size, mask, self.space)

    # -- set algebra on relations -----------------------------------------

    def __or__(self, other: "Relation") -> "Relation":
        self._check(other)
        return self._wrap(a | b for a, b in zip(self.rows, other.rows))

    def __and__(self, other: "Relation") -> "Relation":
        self._check(other)
        return self._wrap(a & b for a, b in zip(self.rows, other.rows))

    def __sub__(self, other: "Relation") -> "Relation":
        self._check(other)
        return self._wrap(a & ~b for a, b in zip(self.rows, other.rows))

    def __le__(self, other: "Relation") -> bool:
        self._check(other)
        return all(a & ~b == 0 for a, b in zip(self.rows, other.rows))

    def _check(self, other: "Relation") -> None:
        if self.size != other.size:
            raise ValueError("relations live on different cell universes")

    # -- images ------------------------------------------------------------

    def image_mask(self, mask: int) -> int:
        out = 0
        for x in iter_bits(mask):
            out |= self.rows[x]
        return out

    def image(self, cells: CellSet) -> CellSet:
        return self._cellset(self.image_mask(cells.mask))

    def inverse(self) -> "Relation":
        rows = [0] * self.size
        for x, row in enumerate(self.rows):
            bit = 1 << x
            for y in iter_bits(row):
                rows[y] |= bit
        return self._wrap(rows)

    def preimage(self, cells: CellSet) -> CellSet:
        """Cells with at least one image inside ``cells``."""
        m = cells.mask
        out = 0
        for x, row in enumerate(self.rows):
            if row & m:
                out |= 1 << x
        return self._cellset(out)

    def domain(self) -> CellSet:
        out = 0
        for x, row in enumerate(self.rows):
            if row:
                out |= 1 << x
        return self._cellset(out)

    def range(self) -> CellSet:
        out = 0
        for row in self.rows:
            out |= row
        return self._cellset(out)

    def restrict(self, cells: CellSet) -> "Relation":
        """Both ends restricted to ``cells``; rows elsewhere become empty."""
        m = cells.mask
        return self._wrap((row & m) if (m >> x & 1) else 0 for x, row in enumerate(self.rows))


def compose(outer: Relation, inner: Relation) -> Relation:
    """The relation taking x to ``outer(inner(x))``."""
    outer._check(inner)
    n = inner.size
    if max(outer.density(), inner.density()) >= config.density_threshold:
        rows = []
        for row in inner.rows:
            out = 0
            for y in iter_bits(row):
                out |= outer.rows[y]
            rows.append(out)
        return Relation(n, tuple(rows), inner.space or outer.space)
    adj = outer.adjacency()
    rows = []
    for row in inner.rows:
        targets = set()
        for y in iter_bits(row):
            targets.update(adj[y])
        out = 0
        for t in sorted(targets):
            out |= 1 << t
        rows.append(out)
    return Relation(n, tuple(rows), inner.space or outer.space)


def iterate(rel: Relation, power: int) -> Relation:
    """``rel`` composed with itself ``power`` times; 0 gives the identity
    and negative powers iterate the inverse."""
    if power < 0:
        return iterate(rel.inverse(), -power)
    result = Relation.identity(rel.size, rel.space)
    base = rel
    k = power
    while k:
        if k & 1:
            result = compose(base, result)
        k >>= 1
        if k:
            base = compose(base, base)
    return result


def star(rel: Relation, cells: CellSet) -> CellSet:
    """Cells whose entire image lands in ``cells``.

    Dual of the preimage: the complement of the preimage of the
    complement.  Cells with empty image always qualify.
    """
    keep = cells.mask
    out = 0
    for x, row in enumerate(rel.rows):
        if row & ~keep == 0:
            out |= 1 << x
    return CellSet(rel.size, out, cells.space or rel.space)


def star_iterated(rel: Relation, cells: CellSet, depth: int) -> CellSet:
    """Iterated star: cells from which every orbit is absorbed by ``cells``
    within ``depth`` steps."""
    if depth < 1:
        raise ValueError("depth must be at least 1")
    acc = star(rel, cells)
    for _ in range(depth - 1):
        acc = star(rel, cells | acc)
    return acc


# -- strongly connected structure -----------------------------------------


def strongly_connected_components(rel: Relation) -> Tuple[List[Tuple[int, ...]], List[int]]:
    """Iterative Tarjan.

    Returns (components, component_of).  Components come out sinks first,
    so the list order is a reverse topological order of the condensation.
    """
    n = rel.size
    rows = rel.rows
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: List[int] = []
    comps: List[Tuple[int, ...]] = []
    comp_of = [-1] * n
    counter = 0

    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, iter_bits(rows[root]))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, iter_bits(rows[w])))
                    advanced = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp_of[w] = len(comps)
                    comp.append(w)
                    if w == v:
                        break
                comps.append(tuple(sorted(comp)))
    return comps, comp_of


def condensation(rel: Relation):
    """Component data for ``rel``: (components, component_of, successor
    bitmasks over component ids, cyclic flags).  Component ids follow the
    Tarjan emission order (sinks first)."""
    comps, comp_of = strongly_connected_components(rel)
    k = len(comps)
    succ = [0] * k
    cyclic = [False] * k
    for x, row in enumerate(rel.rows):
        cx = comp_of[x]
        for y in iter_bits(row):
            cy = comp_of[y]
            if cy == cx:
                cyclic[cx] = True
            else:
                succ[cx] |= 1 << cy
    for c, comp in enumerate(comps):
        if len(comp) > 1:
            cyclic[c] = True
    return comps, comp_of, succ, cyclic


def orbit_relation(rel: Relation) -> Relation:
    """Transitive closure: x related to y when a path of length >= 1 runs
    from x to y."""
    comps, comp_of, succ, cyclic = condensation(rel)
    k = len(comps)
    comp_mask = [mask_of(comp, rel.size) for comp in comps]
    reach = [0] * k
    # Tarjan order is reverse topological, so successors are already done.
    for c in range(k):
        r = 0
        for d in iter_bits(succ[c]):
            r |= (1 << d) | reach[d]
        if cyclic[c]:
            r |= 1 << c
        reach[c] = r
    closure_cells = [0] * k
    for c in range(k):
        cells = 0
        for d in iter_bits(reach[c]):
            cells |= comp_mask[d]
        closure_cells[c] = cells
    return rel._wrap(closure_cells[comp_of[x]] for x in range(rel.size))


def prolongation_relation(rel: Relation) -> Relation:
    """First prolongation.

    On a finite cell universe the closure steps that separate the orbit,
    prolongation and chain towers in the continuum collapse, so this is
    the orbit relation under a different name kept for the tower tests.
    """
    return orbit_relation(rel)


def prolongation_chain_relation(rel: Relation) -> Relation:
    """Iterated prolongation; collapses like :func:`prolongation_relation`."""
    return orbit_relation(rel)


def cyclic_cells(rel: Relation) -> CellSet:
    out = 0
    for x, row in enumerate(rel.rows):
        if row >> x & 1:
            out |= 1 << x
    return CellSet(rel.size, out, rel.space)


def recurrent_cells(rel: Relation) -> CellSet:
    """Cells lying on some cycle, the diagonal of the orbit relation."""
    return cyclic_cells(orbit_relation(rel))


def is_surjective(rel: Relation) -> bool:
    full = (1 << rel.size) - 1
    return rel.domain().mask == full and rel.range().mask == full


def is_irreducible(rel: Relation) -> bool:
    """No proper cell set covers the universe under the image or under the
    preimage.

    By monotonicity it is enough to test the sets missing one cell.
    """
    n = rel.size
    full = (1 << n) - 1
    if n == 0:
        return True
    inv = rel.inverse()
    for x in range(n):
        dropped = full & ~(1 << x)
        if rel.image_mask(dropped) == full:
            return False
        if inv.image_mask(dropped) == full:
            return False
    return True


# -- module-level operation names ------------------------------------------


def image(rel: Relation, cells: CellSet) -> CellSet:
    return rel.image(cells)


def preimage(rel: Relation, cells: CellSet) -> CellSet:
    return rel.preimage(cells)


def inverse(rel: Relation) -> Relation:
    return rel.inverse()


def restrict(rel: Relation, cells: CellSet) -> Relation:
    return rel.restrict(cells)


def star_n(rel: Relation, cells: CellSet, depth: int) -> CellSet:
    return star_iterated(rel, cells, depth)


def cyclic_set(rel: Relation) -> CellSet:
    return cyclic_cells(rel)


@dataclass(frozen=True)
class StructuralPredicates:
    domain: CellSet
    surjective: bool
    irreducible: bool


def structural_predicates(rel: Relation) -> StructuralPredicates:
    return StructuralPredicates(rel.domain(), is_surjective(rel), is_irreducible(rel))
