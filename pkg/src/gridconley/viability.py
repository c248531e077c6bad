"""Viability analysis of a relation restricted to a region.

The forward viable part of a region holds the cells starting arbitrarily
long forward paths inside it, the backward part is its mirror, and their
intersection carries every bi-infinite path.  Off the forward part the
restricted dynamics is acyclic, so survival times are longest path lengths
and can be read off by dynamic programming.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Tuple

from .cells import CellSet, iter_bits
from .relation import Relation, star_iterated

INF = math.inf


@dataclass(frozen=True)
class ViabilityReport:
    region: CellSet
    restricted: Relation
    c_plus: CellSet
    c_minus: CellSet
    c_pm: CellSet
    nu: Dict[int, float]
    nu_bar: Dict[int, float]
    terminal: CellSet
    terminal_bwd: CellSet


@dataclass(frozen=True)
class InvarianceRecord:
    plus_invariant: bool
    minus_invariant: bool
    invariant: bool
    plus_viable: bool
    minus_viable: bool
    viable: bool


def _forward_core(rows, start_mask: int) -> int:
    """Greatest subset of the start mask whose members all keep a successor
    inside the subset."""
    cur = start_mask
    while True:
        nxt = 0
        for x in iter_bits(cur):
            if rows[x] & cur:
                nxt |= 1 << x
        if nxt == cur:
            return cur
        cur = nxt


def _survival_times(rows, region_mask: int, live_mask: int) -> Dict[int, float]:
    """Longest path lengths inside the region; members of ``live_mask`` are
    infinite.  Off the live part the restriction is acyclic, so resolve
    cells once all their successors are resolved."""
    nu: Dict[int, float] = {x: INF for x in iter_bits(live_mask)}
    dead = region_mask & ~live_mask
    pending = {x: (rows[x] & dead).bit_count() for x in iter_bits(dead)}
    ready = [x for x, k in pending.items() if k == 0]
    preds: Dict[int, List[int]] = {x: [] for x in iter_bits(dead)}
    for x in iter_bits(dead):
        for y in iter_bits(rows[x] & dead):
            preds[y].append(x)
    while ready:
        x = ready.pop()
        row = rows[x]
        if row == 0:
            nu[x] = 0
        else:
            nu[x] = 1 + max(nu[y] for y in iter_bits(row))
        for p in preds[x]:
            pending[p] -= 1
            if pending[p] == 0:
                ready.append(p)
    return nu


def viability_report(rel: Relation, region: CellSet) -> ViabilityReport:
    restricted = rel.restrict(region)
    inv = restricted.inverse()
    plus_mask = _forward_core(restricted.rows, region.mask)
    minus_mask = _forward_core(inv.rows, region.mask)
    c_plus = CellSet(rel.size, plus_mask, region.space or rel.space)
    c_minus = CellSet(rel.size, minus_mask, region.space or rel.space)
    nu = _survival_times(restricted.rows, region.mask, plus_mask)
    nu_bar = _survival_times(inv.rows, region.mask, minus_mask)
    terminal = 0
    for x in iter_bits(region.mask):
        if restricted.rows[x] == 0:
            terminal |= 1 << x
    terminal_bwd = 0
    for x in iter_bits(region.mask):
        if inv.rows[x] == 0:
            terminal_bwd |= 1 << x
    return ViabilityReport(
        region=region,
        restricted=restricted,
        c_plus=c_plus,
        c_minus=c_minus,
        c_pm=c_plus & c_minus,
        nu=nu,
        nu_bar=nu_bar,
        terminal=CellSet(rel.size, terminal, region.space or rel.space),
        terminal_bwd=CellSet(rel.size, terminal_bwd, region.space or rel.space),
    )


def invariance_predicates(rel: Relation, cells: CellSet) -> InvarianceRecord:
    image = rel.image(cells)
    pre_image = rel.inverse().image(cells)
    restricted = rel.restrict(cells)
    plus_viable = all(restricted.rows[x] != 0 for x in cells)
    minus_viable = all(restricted.inverse().rows[x] != 0 for x in cells)
    return InvarianceRecord(
        plus_invariant=image <= cells,
        minus_invariant=pre_image <= cells,
        invariant=image.mask == cells.mask,
        plus_viable=plus_viable,
        minus_viable=minus_viable,
        viable=plus_viable and minus_viable,
    )


def absorbed_within(rel: Relation, region: CellSet, depth: int) -> CellSet:
    """Region cells whose restricted dynamics dies out within ``depth``
    steps, i.e. no restricted path of that length starts there."""
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    report = viability_report(rel, region)
    out = 0
    for x in iter_bits(region.mask):
        if report.nu[x] < depth:
            out |= 1 << x
    return CellSet(rel.size, out, region.space or rel.space)


def absorbed_matches_star(rel: Relation, region: CellSet, depth: int) -> bool:
    """Restriction-star equivalence: dying within ``depth`` steps is the
    same as being absorbed by the complement under the iterated star."""
    if depth < 1:
        raise ValueError("depth must be at least 1")
    by_star = star_iterated(rel, region.complement(), depth)
    return absorbed_within(rel, region, depth).mask == (by_star & region).mask


def minimal_viable_subsets(
    rel: Relation, region: CellSet, state_limit: int = 200000
) -> Tuple[CellSet, ...]:
    """All minimal nonempty subsets of the region on which every cell keeps
    a forward successor.

    Enumerated by shrinking forward-viable cores one cell at a time, which
    is exponential in the worst case; ``state_limit`` bounds the explored
    cores.
    """
    rows = rel.restrict(region).rows

    def pcore(mask: int) -> int:
        return _forward_core(rows, mask)

    top = pcore(region.mask)
    results = set()
    seen = set()

    stack = [top] if top else []
    while stack:
        mask = stack.pop()
        if mask in seen:
            continue
        seen.add(mask)
        if len(seen) > state_limit:
            raise RuntimeError("minimal viable enumeration exceeded the state limit")
        shrunk = False
        for x in iter_bits(mask):
            sub = pcore(mask & ~(1 << x))
            if sub:
                shrunk = True
                if sub not in seen:
                    stack.append(sub)
        if not shrunk:
            results.add(mask)
    space = region.space or rel.space
    sets = [CellSet(rel.size, m, space) for m in results]
    sets.sort(key=lambda s: s.members)
    return tuple(sets)


@dataclass(frozen=True)
class OmegaLimit:
    limit: CellSet
    transient: int
    period: int
    dom_total: bool


def omega_limsup_detail(rel: Relation, start: CellSet) -> OmegaLimit:
    """Eventual image cycle of a set.

    Iterates the image until the set sequence repeats and returns the union
    over one period, together with the transient length, the period and
    whether the relation is total (the interpretation as a limit set needs
    every cell to have an image, hence the dom_total flag).
    """
    seen = {start.mask: 0}
    masks = [start.mask]
    cur = start.mask
    while True:
        cur = rel.image_mask(cur)
        if cur in seen:
            first = seen[cur]
            break
        seen[cur] = len(masks)
        masks.append(cur)
    union = 0
    for m in masks[first:]:
        union |= m
    limit = CellSet(rel.size, union, start.space or rel.space)
    dom_total = rel.domain().mask == (1 << rel.size) - 1
    return OmegaLimit(limit, first, len(masks) - first, dom_total)


def omega_limsup(rel: Relation, start: CellSet) -> CellSet:
    return omega_limsup_detail(rel, start).limit


def alpha_limsup(rel: Relation, start: CellSet) -> CellSet:
    return omega_limsup_detail(rel.inverse(), start).limit


@dataclass(frozen=True)
class EdgeSystem:
    """A relation moved to its own edge set.

    Edge (x1, y1) connects to (x2, y2) exactly when the junction matches,
    x2 == y1.  Source and target projections send edge dynamics back to
    cell dynamics.
    """

    edge_index: Tuple[Tuple[int, int], ...]
    relation: Relation
    source: Tuple[int, ...]
    target: Tuple[int, ...]


def derivative_relation(rel: Relation) -> EdgeSystem:
    edges = sorted(rel.edges())
    n = len(edges)
    by_source: Dict[int, List[int]] = {}
    for i, (x, _) in enumerate(edges):
        by_source.setdefault(x, []).append(i)
    rows = []
    for _, y in edges:
        row = 0
        for j in by_source.get(y, ()):
            row |= 1 << j
        rows.append(row)
    return EdgeSystem(
        edge_index=tuple(edges),
        relation=Relation(n, tuple(rows)),
        source=tuple(x for x, _ in edges),
        target=tuple(y for _, y in edges),
    )


def enumerate_paths(rel: Relation, region: CellSet, steps: int, cap: int = 100000):
    """All restricted paths with exactly ``steps`` edges, in lexicographic
    order, stopping with a truncation flag once ``cap`` paths are out."""
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    adj = rel.restrict(region).adjacency()
    paths: List[Tuple[int, ...]] = []
    truncated = False
    for start in region.members:
        if truncated:
            break
        stack = [((start,), adj[start])]
        while stack:
            prefix, succs = stack.pop()
            if len(prefix) == steps + 1:
                paths.append(prefix)
                if len(paths) >= cap:
                    truncated = True
                    break
                continue
            if not succs:
                continue
            stack.append((prefix, succs[1:]))
            stack.append((prefix + (succs[0],), adj[succs[0]]))
    return tuple(paths), truncated


def annihilation_depth(rel: Relation, region: CellSet, start: CellSet = None) -> float:
    """Least n with the n-step restricted image of ``start`` empty.

    A start set missing the forward viable part cannot enter it (that part
    is closed under restricted preimages), so its images die out within
    one step per region cell.  When the start meets the forward viable
    part the images never empty and the depth is infinite.
    """
    report = viability_report(rel, region)
    rows = report.restricted.rows
    cur = region.mask if start is None else start.mask & region.mask
    plus = report.c_plus.mask
    n = 0
    while cur:
        if cur & plus:
            return INF
        nxt = 0
        for x in iter_bits(cur):
            nxt |= rows[x]
        cur = nxt
        n += 1
    return n
