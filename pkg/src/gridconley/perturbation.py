"""Anomalous perturbations: small changes to a relation that wipe out the
invariant set inside an isolating neighborhood.

The constructions retarget orbits onto a dense complement of the viable
core.  The perturbed relation stays within an ``eps`` dilation of the
original in both directions, yet its restriction to the neighborhood
annihilates: some power of it is empty.  A thin repeller can always be
removed this way; removing a saddle additionally preserves surjectivity by
re-seeding the vacated cells from a handful of patched edges.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from .cells import CellSet, iter_bits
from .grid import GridSpace, v_eps_relation
from .relation import Relation, compose, structural_predicates
from .viability import annihilation_depth, viability_report

INF = math.inf


@dataclass(frozen=True)
class PerturbationCertificate:
    """Verified conclusions about a perturbed relation.

    ``annihilation_n`` is the least power of the region-restricted
    relation that is empty, at most the region size when present.
    """

    eps: float
    containment_fwd: bool
    containment_bwd: bool
    annihilation_n: Optional[int]
    surjective: bool

    def __bool__(self) -> bool:
        return (
            self.containment_fwd
            and self.containment_bwd
            and self.annihilation_n is not None
        )


@dataclass(frozen=True)
class RepellerElimination:
    g: Relation
    cert: PerturbationCertificate


@dataclass(frozen=True)
class SaddleElimination:
    g_hat: Relation
    cert: PerturbationCertificate


def _thick_at_grid_scale(cells: CellSet, ambient: Optional[CellSet] = None) -> bool:
    """Two relative erosions survive: the set contains a block too fat to
    be the one-cell-inflated hull of a nowhere dense set."""
    if ambient is None:
        eroded = cells.interior().interior()
    else:
        eroded = cells.interior_in(ambient).interior_in(ambient)
    return bool(eroded)


def _density_radius(space: GridSpace, targets: CellSet) -> float:
    """Largest gap any cell has to the target set."""
    if not targets:
        return INF
    worst = 0.0
    for cell in range(space.cell_count):
        gap = space.set_distance(cell, targets)
        if gap > worst:
            worst = gap
    return worst


def _is_dense(space: GridSpace, targets: CellSet, eps: float) -> bool:
    if not targets:
        return False
    return v_eps_relation(space, eps).image(targets).mask == (1 << space.cell_count) - 1


def eps_dense_complement(space: GridSpace, kernel: CellSet, eps: float) -> CellSet:
    """Cells farther than some ladder radius from ``kernel``, chosen so the
    result still comes within ``eps`` of every cell.

    The radius is the largest dyadic fraction of the diameter that keeps
    the complement eps-dense; the result is always disjoint from the
    kernel.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    full = space.full_set()
    if not kernel:
        return full
    if _thick_at_grid_scale(kernel):
        raise ValueError("kernel is not nowhere dense at grid scale")
    best: Optional[CellSet] = None
    for k in range(1, 10):
        delta = space.diameter / (2 ** k)
        blocked = v_eps_relation(space, delta).image(kernel)
        remainder = full - blocked
        if remainder and _is_dense(space, remainder, eps):
            best = remainder
            break
    if best is None:
        fallback = full - kernel.closure()
        if fallback and _is_dense(space, fallback, eps):
            return fallback
        achievable = _density_radius(space, fallback) if fallback else INF
        raise ValueError(
            f"no radius leaves an eps-dense complement; minimal achievable "
            f"density radius is {achievable}"
        )
    return best


def retraction_relation(space: GridSpace, targets: CellSet) -> Relation:
    """Each cell maps to its nearest target cells, all ties kept.

    Target cells map to themselves, possibly alongside touching targets
    at distance zero; the grid cannot distinguish those.
    """
    if not targets:
        raise ValueError("target set must be nonempty")
    members = tuple(targets.members)
    rows: List[int] = []
    for cell in range(space.cell_count):
        best = INF
        row = 0
        for t in members:
            gap = space.box_distance(cell, t)
            if gap < best - 1e-12:
                best = gap
                row = 1 << t
            elif gap <= best + 1e-12:
                row |= 1 << t
        rows.append(row)
    return Relation(space.cell_count, tuple(rows), space)


def certify_perturbation(
    original: Relation, perturbed: Relation, region: CellSet, eps: float
) -> PerturbationCertificate:
    """Recompute every certificate clause from scratch."""
    if original.space is None:
        raise ValueError("certification needs a grid-backed relation")
    v = v_eps_relation(original.space, eps)
    fwd = perturbed <= compose(v, original)
    bwd = original <= compose(v, perturbed)
    depth = annihilation_depth(perturbed, region)
    return PerturbationCertificate(
        eps=eps,
        containment_fwd=fwd,
        containment_bwd=bwd,
        annihilation_n=None if depth == INF else int(depth),
        surjective=structural_predicates(perturbed).surjective,
    )


def _backward_inward_hull(rel: Relation, region: CellSet, seed: CellSet) -> CellSet:
    """Closed-in-region hull of ``seed`` absorbing backward steps, so the
    restricted preimage of the result lands in its relative interior."""
    restricted = rel.restrict(region)
    hull = seed.closure_in(region)
    while True:
        grown = (seed | restricted.preimage(hull)).closure_in(region)
        if grown == hull:
            return hull
        hull = grown


def _forward_inward_hull(rel: Relation, region: CellSet, seed: CellSet) -> CellSet:
    restricted = rel.restrict(region)
    hull = seed.closure_in(region)
    while True:
        grown = (seed | restricted.image(hull)).closure_in(region)
        if grown == hull:
            return hull
        hull = grown


def eliminate_repeller(rel: Relation, region: CellSet, eps: float) -> RepellerElimination:
    """Retarget forward images away from the repelling core of ``region``.

    The result agrees with the original row-for-row on the inward
    remainder of the region, maps everything else onto the dense
    complement of the core's backward hull, and annihilates inside the
    region.  The perturbed relation is never surjective when there was a
    core to remove: its range misses the vacated hull.
    """
    space = rel.space
    if space is None:
        raise ValueError("elimination needs a grid-backed relation")
    if eps <= 0:
        raise ValueError("eps must be positive")
    preds = structural_predicates(rel)
    if len(preds.domain) != rel.size:
        raise ValueError("relation must have full domain")
    vb = viability_report(rel, region)
    if not vb.c_pm <= region.interior():
        raise ValueError("region is not an isolating neighborhood")
    if _thick_at_grid_scale(vb.c_plus, region):
        raise ValueError(
            "forward-viable set is not nowhere dense in the region at grid scale"
        )

    hull = _backward_inward_hull(rel, region, vb.c_plus)
    remainder = region - hull.interior_in(region)
    dense = space.full_set() - hull
    if not _is_dense(space, dense, eps):
        needed = _density_radius(space, dense)
        raise ValueError(
            f"complement of the backward hull is not eps-dense; requires "
            f"eps >= {needed}"
        )
    retract = retraction_relation(space, dense)
    retargeted = compose(retract, rel)
    rows = list(retargeted.rows)
    for x in iter_bits(remainder.mask):
        rows[x] = rel.rows[x]
    g = Relation(rel.size, tuple(rows), space)

    cert = certify_perturbation(rel, g, region, eps)
    assert cert.containment_fwd and cert.containment_bwd
    assert cert.annihilation_n is not None and cert.annihilation_n <= len(region)
    for x in iter_bits(remainder.mask):
        assert g.rows[x] == rel.rows[x]
    if vb.c_plus:
        assert not cert.surjective
    return RepellerElimination(g=g, cert=cert)


def _connected_blocks(
    space: GridSpace, pool: CellSet, limit: float
) -> List[Tuple[int, ...]]:
    """Greedy partition of ``pool`` into touching-connected blocks whose
    bounding-box diameter stays strictly below ``limit``."""
    neighbor = {c: space.closure_mask(1 << c) for c in pool.members}
    unassigned = set(pool.members)
    blocks: List[Tuple[int, ...]] = []
    while unassigned:
        seed = min(unassigned)
        lo, hi = space.cell_box(seed)
        lo, hi = list(lo), list(hi)
        block = [seed]
        unassigned.remove(seed)
        frontier = sorted(
            c for c in iter_bits(neighbor[seed]) if c in unassigned
        )
        while frontier:
            cand = frontier.pop(0)
            if cand not in unassigned:
                continue
            clo, chi = space.cell_box(cand)
            span = max(
                max(h, ch) - min(l, cl)
                for l, h, cl, ch in zip(lo, hi, clo, chi)
            )
            if span >= limit:
                continue
            for a in range(space.dim):
                lo[a] = min(lo[a], clo[a])
                hi[a] = max(hi[a], chi[a])
            block.append(cand)
            unassigned.remove(cand)
            frontier = sorted(
                set(frontier)
                | {c for c in iter_bits(neighbor[cand]) if c in unassigned}
            )
        blocks.append(tuple(sorted(block)))
    return blocks


def eliminate_saddle(rel: Relation, region: CellSet, eps: float) -> SaddleElimination:
    """Surjective variant: retarget the saddle core, then re-seed the
    vacated cells through patched edges so the range stays full.

    Each connected piece of the core is re-fed from a cell that already
    maps near it, keeping the patch within ``eps`` of original edges.
    """
    space = rel.space
    if space is None:
        raise ValueError("elimination needs a grid-backed relation")
    if eps <= 0:
        raise ValueError("eps must be positive")
    preds = structural_predicates(rel)
    if not preds.surjective:
        raise ValueError("relation must be surjective")
    if len(preds.domain) != rel.size:
        raise ValueError("relation must have full domain")
    vb = viability_report(rel, region)
    if not vb.c_pm <= region.interior():
        raise ValueError("region is not an isolating neighborhood")
    if _thick_at_grid_scale(vb.c_plus, region):
        raise ValueError(
            "forward-viable set is not nowhere dense in the region at grid scale"
        )
    if _thick_at_grid_scale(vb.c_minus, region):
        raise ValueError(
            "backward-viable set is not nowhere dense in the region at grid scale"
        )
    max_width = max(space.widths)
    if not eps / 2 > max_width:
        raise ValueError(
            f"cells are too coarse for this eps; requires eps > {2 * max_width}"
        )

    hull_q = _backward_inward_hull(rel, region, vb.c_plus)
    hull_p = _forward_inward_hull(rel, region, vb.c_minus)
    remainder = region - hull_q.interior_in(region)
    dense = space.full_set() - hull_q
    if not _is_dense(space, dense, eps):
        needed = _density_radius(space, dense)
        raise ValueError(
            f"complement of the backward hull is not eps-dense; requires "
            f"eps >= {needed}"
        )
    retract = retraction_relation(space, dense)

    core = hull_q.interior_in(region) & hull_p.interior_in(region)
    overlap = hull_q & hull_p
    rows: List[int] = []
    for x in range(rel.size):
        bit = 1 << x
        row = 0
        if not core.mask & bit:
            row |= bit
        if overlap.mask & bit:
            row |= retract.rows[x]
        rows.append(row)
    reroute = Relation(rel.size, tuple(rows), space)
    g_one = compose(reroute, rel)

    blocks = _connected_blocks(space, overlap, eps / 2.0)
    landing_pool = hull_q.interior_in(region) - hull_p
    patch: Dict[int, int] = {}
    for block in blocks:
        block_set = CellSet.from_cells(rel.size, block, space)
        landing = None
        closest = INF
        for cand in sorted(landing_pool.members):
            gap = space.set_distance(cand, block_set)
            closest = min(closest, gap)
            if gap < eps / 2.0:
                landing = cand
                break
        if landing is None:
            if closest == INF:
                raise ValueError(
                    "no landing cells outside the forward hull; saddle "
                    "structure degenerate at this grid scale"
                )
            raise ValueError(
                f"no landing cell within eps/2 of a core block; requires "
                f"eps > {2 * closest}"
            )
        source = next(x for x in range(rel.size) if rel.rows[x] >> landing & 1)
        assert not hull_p.mask >> source & 1
        assert not remainder.mask >> source & 1
        added = (1 << landing) | block_set.mask
        patch[source] = patch.get(source, 0) | added
        for z in block:
            assert space.box_distance(landing, z) < eps

    rows = list(g_one.rows)
    for x, extra in patch.items():
        rows[x] |= extra
    g_hat = Relation(rel.size, tuple(rows), space)

    cert = certify_perturbation(rel, g_hat, region, eps)
    assert cert.containment_fwd and cert.containment_bwd
    assert cert.annihilation_n is not None and cert.annihilation_n <= len(region)
    assert cert.surjective
    return SaddleElimination(g_hat=g_hat, cert=cert)
