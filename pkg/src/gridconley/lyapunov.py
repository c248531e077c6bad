"""Complete Lyapunov functions for the chain dynamics at one resolution.

Each attractor-repeller pair contributes a field that is 1 on the
attractor, 0 on the repeller and layered strictly monotonically across
the transient cells in between; summing the fields with weights 2/3^(n+1)
gives base-3 digit sums that are injective on membership signatures, so
distinct chain components receive distinct values.  All arithmetic is in
exact rationals; equality along an edge is then a meaningful test.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple, Union

from .cells import CellSet, iter_bits
from .chain import ChainAnalysis, chain_analysis
from .morse import AttractorRepellerPair, ar_family_from_analysis
from .relation import Relation, strongly_connected_components

FieldLike = Union["LyapunovField", Sequence[Fraction]]


@dataclass(frozen=True)
class LyapunovField:
    eps: float
    strict_identity: bool
    values: Tuple[Fraction, ...]
    pair_fields: Tuple[Tuple[Fraction, ...], ...]
    weights: Tuple[Fraction, ...]
    pairs: Tuple[AttractorRepellerPair, ...]


@dataclass(frozen=True)
class LyapunovCheck:
    monotone: bool
    critical_set: CellSet
    separates_components: bool
    violations: Tuple[Tuple[int, int], ...]
    passed: bool


@dataclass(frozen=True)
class SuperlevelReport:
    cells: CellSet
    inward: bool
    threshold: Fraction


def _pair_field(step: Relation, pair: AttractorRepellerPair) -> Tuple[Fraction, ...]:
    """Field of one pair over the one-step chain relation.

    Transient cells (witness minus attractor) always induce an acyclic
    subgraph, since any cycle there would be chain recurrent and hence
    absorbed into the attractor.  Longest-path layering inside that
    subgraph interpolates strictly between 0 and 1: a cell d edges deep
    from the start of the layer and h edges from its end gets
    (d+1)/(h+d+2), which strictly increases along every transient edge.
    """
    n = step.size
    a_mask = pair.attractor.mask
    witness_mask = pair.inward_witness.mask
    mid_mask = witness_mask & ~a_mask

    sub = step.restrict(CellSet(n, mid_mask, None))
    comps, comp_of = strongly_connected_components(sub)
    node_cells = [
        [x for x in comp if mid_mask >> x & 1] for comp in comps
    ]
    succ: List[set] = [set() for _ in comps]
    for x in iter_bits(mid_mask):
        cx = comp_of[x]
        for y in iter_bits(sub.rows[x]):
            cy = comp_of[y]
            if cy != cx:
                succ[cx].add(cy)
    k = len(comps)
    # Tarjan emits sinks first, so iterating in emission order resolves
    # successors before their predecessors and vice versa when reversed.
    h = [0] * k
    for c in range(k):
        if node_cells[c]:
            h[c] = max((h[d] + 1 for d in succ[c] if node_cells[d]), default=0)
    d_ = [0] * k
    for c in range(k - 1, -1, -1):
        if node_cells[c]:
            for t in succ[c]:
                if node_cells[t]:
                    d_[t] = max(d_[t], d_[c] + 1)

    out = [Fraction(0)] * n
    for x in iter_bits(a_mask):
        out[x] = Fraction(1)
    for x in iter_bits(mid_mask):
        c = comp_of[x]
        out[x] = Fraction(d_[c] + 1, h[c] + d_[c] + 2)
    return tuple(out)


def _revalidate(step: Relation, pair: AttractorRepellerPair) -> None:
    witness = pair.inward_witness.mask
    if step.image_mask(witness) & ~witness:
        raise ValueError("pair witness is not +invariant under the chain step")
    cur = witness
    while True:
        nxt = step.image_mask(cur) & cur
        if nxt == cur:
            break
        cur = nxt
    if cur != pair.attractor.mask:
        raise ValueError("pair attractor is not the image fixpoint of its witness")
    full = (1 << step.size) - 1
    if pair.repeller.mask != full & ~witness:
        raise ValueError("pair repeller is not the witness complement")


def pair_lyapunov(
    rel: Relation,
    pair: AttractorRepellerPair,
    eps: float = 0.0,
    strict_identity: bool = False,
) -> Tuple[Fraction, ...]:
    analysis = chain_analysis(rel, eps, strict_identity)
    _revalidate(analysis.step, pair)
    return _pair_field(analysis.step, pair)


def _ordered_pairs(
    pairs: Sequence[AttractorRepellerPair], size: int
) -> Tuple[AttractorRepellerPair, ...]:
    def key(p: AttractorRepellerPair):
        a = p.attractor.members
        return (a[0] if a else size, len(a), a, p.inward_witness.members)

    return tuple(sorted(pairs, key=key))


def complete_lyapunov(
    rel: Relation, eps: float = 0.0, strict_identity: bool = False
) -> LyapunovField:
    analysis = chain_analysis(rel, eps, strict_identity)
    pairs = _ordered_pairs(ar_family_from_analysis(analysis), rel.size)
    fields = tuple(_pair_field(analysis.step, p) for p in pairs)
    weights = tuple(Fraction(2, 3 ** (n + 1)) for n in range(len(pairs)))
    values = tuple(
        sum((w * f[x] for w, f in zip(weights, fields)), Fraction(0))
        for x in range(rel.size)
    )
    return LyapunovField(
        eps=eps,
        strict_identity=strict_identity,
        values=values,
        pair_fields=fields,
        weights=weights,
        pairs=pairs,
    )


def _field_values(field: FieldLike, size: int) -> Tuple[Fraction, ...]:
    values = field.values if isinstance(field, LyapunovField) else tuple(field)
    if len(values) != size:
        raise ValueError("field length does not match the cell universe")
    return tuple(Fraction(v) for v in values)


def verify_lyapunov(
    rel: Relation, eps: float, field: FieldLike, strict_identity: bool = False
) -> LyapunovCheck:
    """Certify a candidate field against the chain dynamics.

    Monotone means no decreasing edge of the one-step chain relation;
    cells incident to an equality edge form the critical set; separation
    means distinct chain components map to distinct values.  The overall
    pass additionally pins the critical set to the recurrent set, the
    grid form of criticality occurring exactly on chain components.
    """
    analysis = chain_analysis(rel, eps, strict_identity)
    values = _field_values(field, rel.size)
    step = analysis.step
    violations = []
    critical = 0
    for x in range(rel.size):
        vx = values[x]
        for y in iter_bits(step.rows[x]):
            if values[y] < vx:
                violations.append((x, y))
            elif values[y] == vx:
                critical |= (1 << x) | (1 << y)
    comp_values = {}
    separates = True
    for i, comp in enumerate(analysis.components):
        vals = {values[x] for x in comp}
        if len(vals) != 1:
            separates = False
            break
        v = vals.pop()
        if v in comp_values:
            separates = False
            break
        comp_values[v] = i
    monotone = not violations
    critical_set = CellSet(rel.size, critical, rel.space)
    passed = monotone and separates and critical == analysis.recurrent.mask
    return LyapunovCheck(
        monotone=monotone,
        critical_set=critical_set,
        separates_components=separates,
        violations=tuple(violations),
        passed=passed,
    )


def sublevel_inward(rel: Relation, field: FieldLike, threshold) -> SuperlevelReport:
    """Superlevel set of the field at a threshold with its inwardness.

    The dynamics runs uphill (attractors sit at value 1), so the trapping
    candidates are the superlevel sets.  Inwardness can fail at coarse
    grids; it is reported, never assumed.
    """
    from .morse import is_inward

    t = Fraction(threshold)
    if not 0 < t < 1:
        raise ValueError("threshold must lie strictly between 0 and 1")
    values = _field_values(field, rel.size)
    mask = 0
    for x, v in enumerate(values):
        if v >= t:
            mask |= 1 << x
    cells = CellSet(rel.size, mask, rel.space)
    return SuperlevelReport(cells=cells, inward=is_inward(rel, cells), threshold=t)
