"""Isolating neighborhoods and index pairs for closed relations on grids.

The exit set of a neighborhood, the pairs built from it, and the quotient
relation that collapses the exit behaviour to a single absorbing node.  All
topology is the combinatorial closure/interior of the carrying grid, which
is what keeps exit sets nonempty: closed boxes touch, so an orbit leaving a
region always crosses cells that remain in the region's closure.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from .cells import CellSet, iter_bits
from .relation import Relation, compose, orbit_relation, structural_predicates
from .viability import viability_report
from .grid import v_eps_relation
from .morse import attractor_of_inward, dual_repeller, is_inward


@dataclass(frozen=True)
class BoundaryReport:
    """Where a region's forward image spills over its edge.

    ``rho`` is the closure of the part of the image that escapes; ``delta``
    is the slice of the region touching that overspill.  ``invariant`` is
    the exact forward-invariance flag (image inside the region, before any
    closure is taken).
    """

    rho: CellSet
    delta: CellSet
    invariant: bool


@dataclass(frozen=True)
class IsolationReport:
    isolating: bool
    simple: bool
    index_type: bool
    minus_isolating: bool
    plus_isolating: bool
    c_pm: CellSet
    c_plus: CellSet
    c_minus: CellSet


@dataclass(frozen=True)
class IndexPair:
    """An isolating pair: every orbit staying in ``p1`` avoids ``p2``, and
    every orbit leaving ``p1`` is funnelled through ``p2`` first."""

    p1: CellSet
    p2: CellSet
    rel_neighborhood: Optional[CellSet] = None
    viable_set: CellSet = field(default=None)  # type: ignore[assignment]


@dataclass(frozen=True)
class IndexPairCheck:
    passed: bool
    failed_conditions: Tuple[str, ...]
    # Reported but non-gating: the exit slice sits in the relative interior
    # of p2, so one cell of buffer separates it from p1 \ p2.
    exit_buffered: bool
    rel_closure_inside: Optional[bool] = None
    rel_boundary_exact: Optional[bool] = None

    def __bool__(self) -> bool:
        return self.passed


@dataclass(frozen=True)
class StableUnstable:
    ws: CellSet
    wu: CellSet


@dataclass(frozen=True)
class RobustnessReport:
    """Largest dilation radius at which a region stays isolating.

    ``envelope`` is the two-sided dilated relation at that radius; any
    relation contained in it keeps ``declared_open`` as an isolating
    neighborhood with viable set inside ``viable_set``.
    """

    eps_star: float
    viable_set: CellSet
    declared_open: CellSet
    envelope: Relation
    ladder: Tuple[float, ...]


def f_boundary(rel: Relation, cells: CellSet) -> BoundaryReport:
    """Overspill ``rho`` = closure(image \\ cells) and exit slice
    ``delta`` = cells ∩ rho."""
    forward = rel.image(cells)
    rho = (forward - cells).closure()
    return BoundaryReport(rho=rho, delta=cells & rho, invariant=forward <= cells)


def isolating_checks(rel: Relation, cells: CellSet) -> IsolationReport:
    """Isolation flags for a candidate neighborhood.

    ``isolating``: the two-sided viable core stays in the interior.
    ``simple``: one forward and one backward restricted step already land
    in the interior, a cheap sufficient condition.
    ``index_type``: isolating and no exit cell is forward-viable, which is
    exactly what build_index_pair needs.
    """
    vb = viability_report(rel, cells)
    inner = cells.interior()
    restricted = rel.restrict(cells)
    one_step = restricted.image(cells) & restricted.preimage(cells)
    isolating = vb.c_pm <= inner
    delta = f_boundary(rel, cells).delta
    return IsolationReport(
        isolating=isolating,
        simple=one_step <= inner,
        index_type=isolating and not (delta & vb.c_plus),
        minus_isolating=vb.c_minus <= inner,
        plus_isolating=vb.c_plus <= inner,
        c_pm=vb.c_pm,
        c_plus=vb.c_plus,
        c_minus=vb.c_minus,
    )


def build_index_pair(rel: Relation, p1: CellSet) -> IndexPair:
    """The smallest exit set for ``p1``: the exit slice together with its
    forward orbit inside ``p1``.

    Smallest in the inclusion order over all valid second components, so
    any other valid choice contains this one.
    """
    checks = isolating_checks(rel, p1)
    if not checks.index_type:
        if not checks.isolating:
            raise ValueError(
                "not an isolating neighborhood: viable core "
                f"{sorted(checks.c_pm.members)} escapes the interior"
            )
        raise ValueError(
            "exit cells meet the forward-viable set; no index pair exists"
        )
    delta = f_boundary(rel, p1).delta
    restricted = rel.restrict(p1)
    p2 = delta | orbit_relation(restricted).image(delta)
    return IndexPair(p1=p1, p2=p2, viable_set=checks.c_pm)


def validate_index_pair(
    rel: Relation,
    pair: IndexPair,
    exit_override: Optional[CellSet] = None,
) -> IndexPairCheck:
    """Check the four defining conditions of an index pair, plus the
    relative conditions when the pair carries an ambient neighborhood.

    ``exit_override`` replaces the exit slice computed from ``rel``; the
    flow and hybrid layers pass theirs, which can differ from the exit
    slice of the single-step relation being validated.
    """
    p1, p2 = pair.p1, pair.p2
    failed: List[str] = []
    restricted = rel.restrict(p1)
    vb = viability_report(rel, p1)
    delta = f_boundary(rel, p1).delta if exit_override is None else exit_override
    inner = p1.interior()
    if not p2 <= p1:
        failed.append("i'")
    if not restricted.image(p2) <= p2:
        failed.append("ii'")
    if not vb.c_pm <= (inner - p2):
        failed.append("iii'")
    if not delta <= p2:
        failed.append("iv'")
    exit_buffered = delta <= p2.interior_in(p1)

    rel_closure_inside: Optional[bool] = None
    rel_boundary_exact: Optional[bool] = None
    ambient = pair.rel_neighborhood
    if ambient is not None:
        in_ambient = rel.restrict(ambient)
        amb_inner = ambient.interior()
        amb_vb = viability_report(rel, ambient)
        if not (p2 <= p1 and p1 <= ambient):
            failed.append("rel-i")
        if not (in_ambient.image(p1) <= p1 and in_ambient.image(p2) <= p2):
            failed.append("rel-ii")
        if not amb_vb.c_pm <= (inner - p2):
            failed.append("rel-iii")
        if not (p1 & ambient.boundary()) <= p2:
            failed.append("rel-iv")
        rel_closure_inside = (p1 - p2).closure() <= amb_inner
        rel_boundary_exact = (p1 & ambient.boundary()) == delta
    return IndexPairCheck(
        passed=not failed,
        failed_conditions=tuple(failed),
        exit_buffered=exit_buffered,
        rel_closure_inside=rel_closure_inside,
        rel_boundary_exact=rel_boundary_exact,
    )


def wedge(rel: Relation, pair_a: IndexPair, pair_b: IndexPair) -> IndexPair:
    """Meet of two index pairs: intersect the neighborhoods, union the
    exit sets inside the intersection.

    Both inputs must validate, and the result is validated before it is
    returned; a failure names the offending pair and conditions.
    """
    for label, pair in (("first", pair_a), ("second", pair_b)):
        check = validate_index_pair(rel, pair)
        if not check:
            raise ValueError(
                f"{label} input is not an index pair; failed "
                f"{list(check.failed_conditions)}"
            )
    p1 = pair_a.p1 & pair_b.p1
    p2 = p1 & (pair_a.p2 | pair_b.p2)
    ambient: Optional[CellSet] = None
    if pair_a.rel_neighborhood is not None and pair_b.rel_neighborhood is not None:
        ambient = pair_a.rel_neighborhood & pair_b.rel_neighborhood
    merged = IndexPair(
        p1=p1,
        p2=p2,
        rel_neighborhood=ambient,
        viable_set=viability_report(rel, p1).c_pm,
    )
    check = validate_index_pair(rel, merged)
    if not check:
        raise ValueError(
            f"wedge is not an index pair; failed {list(check.failed_conditions)}"
        )
    return merged


def precedes(rel: Relation, q1: CellSet, p1: CellSet) -> bool:
    """Partial order on isolating neighborhoods: ``q1`` refines ``p1``
    when it sits inside and its overspill misses the forward-viable part
    of ``p1``."""
    checks = isolating_checks(rel, p1)
    if not checks.index_type:
        raise ValueError("p1 must be of index type")
    if not q1 <= p1:
        return False
    rho = f_boundary(rel, q1).rho
    if rho & checks.c_plus:
        return False
    # Refinement restricts the forward-viable set by intersection.
    assert viability_report(rel, q1).c_plus == (q1 & checks.c_plus)
    return True


def quotient_relation(rel: Relation, pair: IndexPair) -> Relation:
    """Collapse everything outside ``p1 \\ p2`` to one absorbing node.

    The node is indexed one past the last grid cell.  An edge enters it
    whenever a forward image meets the exit set or the overspill; inside
    ``p1 \\ p2`` edges are kept verbatim.  When the relation is total the
    star node is certified to be an attractor whose dual repeller is the
    forward-viable part of ``p1``.
    """
    check = validate_index_pair(rel, pair)
    if not check:
        raise ValueError(
            f"pair does not validate; failed {list(check.failed_conditions)}"
        )
    core = pair.p1 - pair.p2
    rho = f_boundary(rel, pair.p1).rho
    absorbed = (pair.p2 | rho).mask
    star = rel.size
    star_bit = 1 << star
    rows = [0] * (rel.size + 1)
    for x in iter_bits(core.mask):
        row = rel.rows[x]
        kept = row & core.mask
        if row & absorbed:
            kept |= star_bit
        rows[x] = kept
    rows[star] = star_bit
    quotient = Relation(rel.size + 1, tuple(rows), None)

    domain_total = structural_predicates(rel).domain.mask == (1 << rel.size) - 1
    if not domain_total:
        warnings.warn(
            "relation is not total; star attractor verification skipped",
            RuntimeWarning,
        )
        return quotient
    star_set = CellSet(quotient.size, star_bit, None)
    assert is_inward(quotient, star_set)
    assert attractor_of_inward(quotient, star_set) == star_set
    repeller = dual_repeller(quotient, star_set)
    viable_fwd = viability_report(rel, pair.p1).c_plus
    assert repeller.mask == viable_fwd.mask
    return quotient


def stable_unstable(rel: Relation, cells: CellSet) -> StableUnstable:
    """Cells whose orbits eventually reach the forward-viable part of the
    neighborhood (``ws``) or are reachable from its backward-viable part
    (``wu``)."""
    checks = isolating_checks(rel, cells)
    if not checks.isolating:
        raise ValueError("cells must be an isolating neighborhood")
    ws = checks.c_plus.mask
    while True:
        grown = ws | rel.preimage(CellSet(rel.size, ws, rel.space)).mask
        if grown == ws:
            break
        ws = grown
    wu = checks.c_minus.mask
    while True:
        grown = wu | rel.image(CellSet(rel.size, wu, rel.space)).mask
        if grown == wu:
            break
        wu = grown
    return StableUnstable(
        ws=CellSet(rel.size, ws, rel.space),
        wu=CellSet(rel.size, wu, rel.space),
    )


def default_ladder(space, depth: int = 8) -> Tuple[float, ...]:
    """Dyadic radii from the grid diameter down, descending."""
    top = space.diameter
    return tuple(top / (2 ** k) for k in range(1, depth + 1))


def robustness_radius(
    rel: Relation,
    cells: CellSet,
    ladder: Optional[Tuple[float, ...]] = None,
) -> RobustnessReport:
    """Largest ladder radius whose two-sided dilation of the relation
    keeps ``cells`` isolating.

    Containment in the dilated envelope is a certificate: viable cores
    are monotone in the relation, so every sub-relation of the envelope
    has its viable core inside the one computed here, hence inside the
    declared interior.  Found by bisection; isolation is monotone along
    the ladder.
    """
    if rel.space is None:
        raise ValueError("robustness needs a grid-backed relation")
    if ladder is None:
        ladder = default_ladder(rel.space)
    radii = sorted(set(ladder), reverse=True)
    if not radii or min(radii) < 0:
        raise ValueError("ladder must list nonnegative radii")

    def isolating_at(eps: float) -> Optional[CellSet]:
        v = v_eps_relation(rel.space, eps)
        dilated = compose(v, compose(rel, v))
        vb = viability_report(dilated, cells)
        if vb.c_pm <= cells.interior():
            return vb.c_pm
        return None

    # radii descending: failures form a prefix, successes a suffix.
    lo, hi = 0, len(radii)
    while lo < hi:
        mid = (lo + hi) // 2
        if isolating_at(radii[mid]) is not None:
            hi = mid
        else:
            lo = mid + 1
    if lo == len(radii):
        raise ValueError(
            "no ladder radius keeps the region isolating; refine the grid "
            "or shrink the ladder"
        )
    eps_star = radii[lo]
    v = v_eps_relation(rel.space, eps_star)
    envelope = compose(v, compose(rel, v))
    viable = viability_report(envelope, cells).c_pm
    return RobustnessReport(
        eps_star=eps_star,
        viable_set=viable,
        declared_open=cells.interior(),
        envelope=envelope,
        ladder=tuple(radii),
    )
