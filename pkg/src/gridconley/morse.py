"""Inward sets, attractors, dual repellers and attractor-repeller families.

A combinatorially inward set traps the dynamics: the closure of its image
sits in its interior.  Iterating image-and-intersect inside an inward set
yields its attractor; the dual repeller is the matching fixpoint of the
inverse relation outside the set.  Families of such pairs are generated
from down-sets of the component reachability order and separate chain
components by attractor membership.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Tuple

from .cells import CellSet, iter_bits
from .chain import ChainAnalysis, chain_analysis
from .relation import Relation


@dataclass(frozen=True)
class AttractorRepellerPair:
    attractor: CellSet
    repeller: CellSet
    inward_witness: CellSet
    component_downset: FrozenSet[int]


@dataclass(frozen=True)
class MorseGraph:
    components: Tuple[CellSet, ...]
    edges: Tuple[Tuple[int, int], ...]


def is_inward(rel: Relation, cells: CellSet) -> bool:
    """Does the closed image of the set land inside its interior?

    A union of closed cell boxes is already closed, so the closure in the
    defining inclusion is the image itself; a cell's box lies in the
    topological interior of the set's boxes exactly when all its touching
    cells belong to the set, which is the combinatorial interior.
    """
    return rel.image(cells) <= cells.interior()


def _image_fixpoint(rel: Relation, start_mask: int) -> int:
    cur = start_mask
    while True:
        nxt = rel.image_mask(cur) & cur
        if nxt == cur:
            return cur
        cur = nxt


def attractor_of_inward(rel: Relation, cells: CellSet) -> CellSet:
    """Attractor trapped by an inward set, as the image-intersection
    fixpoint.  On a +invariant set this equals the intersection of all
    forward images, hence is invariant."""
    if not is_inward(rel, cells):
        raise ValueError("the set is not inward: closure(F(U)) is not inside interior(U)")
    return CellSet(rel.size, _image_fixpoint(rel, cells.mask), cells.space or rel.space)


def dual_repeller(rel: Relation, cells: CellSet) -> CellSet:
    """Greatest subset of the complement of the interior whose members all
    keep a predecessor-side successor there: the inverse-image fixpoint
    dual to the attractor of an inward set."""
    if not rel.image(cells) <= cells:
        warnings.warn("dual_repeller called on a set that is not +invariant", RuntimeWarning)
    outside = ~(cells.interior().mask) & (1 << rel.size) - 1
    cur = outside
    while True:
        nxt = 0
        for x in iter_bits(cur):
            if rel.rows[x] & cur:
                nxt |= 1 << x
        if nxt == cur:
            break
        cur = nxt
    return CellSet(rel.size, cur, cells.space or rel.space)


def morse_graph(analysis: ChainAnalysis) -> MorseGraph:
    """Reachability order between chain components; acyclic because the
    components are the cyclic classes of the chain relation."""
    comps = analysis.components
    chain = analysis.chain_relation
    edges: List[Tuple[int, int]] = []
    for i, a in enumerate(comps):
        reach = chain.image_mask(a.mask)
        for j, b in enumerate(comps):
            if i != j and reach & b.mask:
                edges.append((i, j))
    return MorseGraph(components=comps, edges=tuple(edges))


def _component_bits(analysis: ChainAnalysis) -> List[int]:
    """Per cell, the bitmask of component ids the chain relation reaches
    from it.  A cell inside a component always reaches its own component."""
    chain = analysis.chain_relation
    comp_of = analysis.component_of
    out = []
    for x in range(chain.size):
        bits = 0
        for y in iter_bits(chain.rows[x]):
            c = comp_of[y]
            if c is not None:
                bits |= 1 << c
        cx = comp_of[x]
        if cx is not None:
            bits |= 1 << cx
        out.append(bits)
    return out


def ar_family(
    rel: Relation, eps: float = 0.0, strict_identity: bool = False
) -> Tuple[AttractorRepellerPair, ...]:
    """Attractor-repeller pairs from down-sets of the component order.

    One down-set is taken per cell (the components it can reach) plus the
    full set, which covers every principal down-set and, through cells
    reaching nothing, the empty one.  The witness of a down-set D is
    U_D = {cells reaching only components in D}; the attractor is the
    image fixpoint of the witness under the one-step chain relation and
    the repeller is the witness complement, which is exactly the
    forward-viable part of the complement.
    """
    return ar_family_from_analysis(chain_analysis(rel, eps, strict_identity))


def ar_family_from_analysis(analysis: ChainAnalysis) -> Tuple[AttractorRepellerPair, ...]:
    step = analysis.step
    rel = step
    bits = _component_bits(analysis)
    comp_masks = [c.mask for c in analysis.components]
    all_comps = (1 << len(comp_masks)) - 1

    candidates = set(bits)
    candidates.add(all_comps)
    by_witness: Dict[int, int] = {}
    for d in candidates:
        witness = 0
        for x in range(rel.size):
            if bits[x] & ~d == 0:
                witness |= 1 << x
        if witness:
            by_witness.setdefault(witness, d)

    space = rel.space
    pairs = []
    full = (1 << rel.size) - 1
    for witness_mask in by_witness:
        attractor = _image_fixpoint(step, witness_mask)
        repeller = full & ~witness_mask
        downset = frozenset(
            j for j, m in enumerate(comp_masks) if m & ~witness_mask == 0
        )
        pairs.append(
            AttractorRepellerPair(
                attractor=CellSet(rel.size, attractor, space),
                repeller=CellSet(rel.size, repeller, space),
                inward_witness=CellSet(rel.size, witness_mask, space),
                component_downset=downset,
            )
        )
    pairs.sort(key=lambda p: (len(p.inward_witness), p.inward_witness.members))
    return tuple(pairs)


def membership_signature(
    pairs: Tuple[AttractorRepellerPair, ...], cell: int
) -> Tuple[bool, ...]:
    """Attractor membership vector of one cell across a family."""
    return tuple(bool(p.attractor.mask >> cell & 1) for p in pairs)
