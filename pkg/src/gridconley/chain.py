"""Chain recurrence at a fixed spatial resolution.

An eps-chain hops along the relation with a jump of size at most eps after
each step, so the one-step chain relation is the composition of a dilation
with the map relation and chains of every length form its transitive
closure.  Recurrent cells sit on the diagonal of that closure; the cyclic
strongly connected components of the one-step relation partition them into
the candidate Morse sets.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

from .cells import CellSet, iter_bits
from .grid import dilation_relation
from .relation import (
    Relation,
    compose,
    cyclic_cells,
    orbit_relation,
    strongly_connected_components,
)


@dataclass(frozen=True)
class ChainAnalysis:
    eps: float
    strict_identity: bool
    step: Relation
    chain_relation: Relation
    recurrent: CellSet
    components: Tuple[CellSet, ...]
    component_of: Tuple[Optional[int], ...]


def chain_step(rel: Relation, eps: float = 0.0, strict_identity: bool = False) -> Relation:
    """One chain hop: the relation followed by an eps jump.

    Relations without an attached grid admit no metric jump, so they must
    be run with strict_identity; eps 0 on a grid still allows hops into
    touching cells.
    """
    if rel.space is None:
        if not strict_identity or eps != 0.0:
            raise ValueError("a relation without a grid only supports strict identity at eps 0")
        return rel
    jump = dilation_relation(rel.space, eps, strict_identity=strict_identity)
    return compose(jump, rel)


def chain_analysis(
    rel: Relation, eps: float = 0.0, strict_identity: bool = False
) -> ChainAnalysis:
    step = chain_step(rel, eps, strict_identity)
    chain = orbit_relation(step)
    recurrent = cyclic_cells(chain)
    comps, _ = strongly_connected_components(step)
    cyclic = []
    for comp in comps:
        if len(comp) > 1 or step.has_edge(comp[0], comp[0]):
            cyclic.append(comp)
    cyclic.sort(key=lambda c: c[0])
    component_of: list = [None] * rel.size
    for i, comp in enumerate(cyclic):
        for x in comp:
            component_of[x] = i
    return ChainAnalysis(
        eps=eps,
        strict_identity=strict_identity,
        step=step,
        chain_relation=chain,
        recurrent=recurrent,
        components=tuple(CellSet.from_cells(rel.size, c, rel.space) for c in cyclic),
        component_of=tuple(component_of),
    )


def chain_reachable(
    rel: Relation, eps: float, x: int, y: int, strict_identity: bool = False
) -> bool:
    """Does a chain with jumps at most eps run from x to y?"""
    if not (0 <= x < rel.size and 0 <= y < rel.size):
        raise ValueError("cell index out of range")
    step = chain_step(rel, eps, strict_identity)
    # BFS from x; at least one hop is required.
    frontier = step.rows[x]
    seen = frontier
    while True:
        if seen >> y & 1:
            return True
        nxt = step.image_mask(frontier) & ~seen
        if not nxt:
            return False
        seen |= nxt
        frontier = nxt


def chain_transitive(
    rel: Relation, region: CellSet, eps: float = 0.0, strict_identity: bool = False
) -> bool:
    """Is the region a single chain-recurrent piece at this resolution?

    The dynamics and the eps jumps are both confined to the region, so the
    question is whether the chain relation of the restriction fills the
    whole square region x region.
    """
    mask = region.mask
    if mask == 0:
        return True
    step = chain_step(rel.restrict(region), eps, strict_identity).restrict(region)
    chain = orbit_relation(step)
    return all(chain.rows[x] & mask == mask for x in iter_bits(mask))


def chain_ladder(
    rel: Relation, eps_values: Tuple[float, ...], strict_identity: bool = False
) -> Tuple[Tuple[ChainAnalysis, ...], bool]:
    """Chain analyses across a decreasing tolerance ladder.

    The stabilized flag reports whether the two finest levels produced the
    same chain relation, the practical signal that the resolution has
    resolved the recurrent structure.
    """
    if not eps_values:
        raise ValueError("the ladder needs at least one tolerance")
    runs = tuple(chain_analysis(rel, e, strict_identity) for e in eps_values)
    stabilized = len(runs) >= 2 and runs[-1].chain_relation.rows == runs[-2].chain_relation.rows
    return runs, stabilized


@dataclass(frozen=True)
class ChainBoundReport:
    ok: bool
    witness: Optional[Tuple[int, int]]

    def __bool__(self) -> bool:
        return self.ok


def restricted_chain_bound_check(
    rel: Relation, region: CellSet, eps: float = 0.0
) -> ChainBoundReport:
    """Chains of the restriction stay inside its orbit relation augmented
    by pairs from the forward-viable part to the backward-viable part.

    The inclusion is exact at the identity dilation, which is the level
    this check computes; the eps argument is accepted for interface parity
    with the other chain entry points and does not affect the relations
    compared.  On failure the first offending edge is reported.
    """
    del eps
    from .viability import viability_report

    restricted = rel.restrict(region)
    lhs = orbit_relation(chain_step(restricted, 0.0, strict_identity=True))
    allowed = orbit_relation(restricted)
    report = viability_report(rel, region)
    plus_mask = report.c_plus.mask
    minus_mask = report.c_minus.mask
    for x, row in enumerate(lhs.rows):
        extra = row & ~allowed.rows[x]
        if extra and plus_mask >> x & 1:
            extra &= ~minus_mask
        if extra:
            y = next(iter_bits(extra))
            return ChainBoundReport(False, (x, y))
    return ChainBoundReport(True, None)
