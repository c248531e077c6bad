"""Hybrid systems: a lattice semiflow on a flow set plus a jump relation.

Behaviours live on staircase time domains over (flow time, jump count).
The central reduction compresses every behaviour of length one to three
into a single relation, so reachability, viability, chain recurrence and
index pairs for the hybrid system all reuse the relation machinery.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import ceil, inf
from typing import Dict, List, Optional, Sequence, Tuple

from .cells import CellSet
from .conley import IndexPair, IndexPairCheck, IsolationReport, f_boundary
from .grid import dilation_relation
from .lyapunov import LyapunovField, complete_lyapunov, sublevel_inward
from .relation import Relation, compose, orbit_relation
from .semiflow import (
    SemiflowApprox,
    exit_slice_conley,
    restricted_interval_relation,
)
from .viability import ViabilityReport, viability_report

_TOL = 1e-9


@dataclass(frozen=True)
class HybridSystem:
    """A semiflow acting on ``flow_set`` interleaved with ``jump``.

    ``jump_domain`` is derived from the jump rows.  ``complete`` means
    the two action regions cover the grid and the flow step is total;
    behaviours then never die for lack of a move, except at flow cells
    that are stuck inside the flow set without being jump sources.
    """

    sf: SemiflowApprox
    flow_set: CellSet
    jump: Relation
    jump_domain: CellSet = field(init=False)
    complete: bool = field(init=False)

    def __post_init__(self) -> None:
        size = self.sf.step.size
        if self.jump.size != size or self.flow_set.size != size:
            raise ValueError("flow set and jump must match the grid")
        dom = 0
        for x in range(size):
            if self.jump.rows[x]:
                dom |= 1 << x
        jump_domain = CellSet(size, dom, self.sf.space)
        covered = (self.flow_set.mask | dom) == (1 << size) - 1
        object.__setattr__(self, "jump_domain", jump_domain)
        object.__setattr__(self, "complete", covered and self.sf.complete)

    @property
    def action_set(self) -> CellSet:
        """Cells where some move is available to start from."""
        return self.flow_set | self.jump_domain


def _stuck_flow_cells(hs: HybridSystem) -> CellSet:
    """Flow cells whose in-flow-set step image is empty."""
    restricted = hs.sf.step.restrict(hs.flow_set)
    mask = 0
    for x in range(restricted.size):
        if hs.flow_set.mask >> x & 1 and not restricted.rows[x]:
            mask |= 1 << x
    return CellSet(restricted.size, mask, hs.sf.space)


def _identity_on(region: CellSet, space) -> Relation:
    rows = tuple(
        (1 << c) if region.mask >> c & 1 else 0 for c in range(region.size)
    )
    return Relation(region.size, rows, space)


def associated_relation(hs: HybridSystem) -> Relation:
    """One relation holding every hybrid move of length one to three:
    an in-flow run of time [1, 2], or a jump padded by up to one unit
    of in-flow time on each side.

    The padding windows start at zero, so jump edges appear verbatim.
    """
    sf, c = hs.sf, hs.flow_set
    size = sf.step.size
    inner = restricted_interval_relation(sf, c, 0.0, 1.0) | Relation.identity(
        size, sf.space
    )
    h = compose(inner, compose(hs.jump, inner)) | restricted_interval_relation(
        sf, c, 1.0, 2.0
    )
    assert hs.jump <= h
    if hs.complete and _stuck_flow_cells(hs) <= hs.jump_domain:
        assert all(h.rows[x] for x in range(size))
    return h


def teel_relation(hs: HybridSystem) -> Relation:
    """The same length-window relation built from exact path counting.

    A table over (flow steps, jumps) accumulates endpoints of hybrid
    paths anchored on the action set; the result collects every total
    length in [1, 3] and is sandwiched between the associated relation
    and its first three powers.
    """
    sf = hs.sf
    k_unit = sf.steps_per_unit
    step_c = sf.step.restrict(hs.flow_set)
    base = _identity_on(hs.action_set, sf.space)
    table: Dict[Tuple[int, int], Relation] = {}
    acc: Optional[Relation] = None
    for jumps in range(4):
        for steps in range(3 * k_unit + 1):
            if jumps == 0 and steps == 0:
                rel = base
            else:
                rel = None
                if steps >= 1:
                    rel = compose(step_c, table[steps - 1, jumps])
                if jumps >= 1:
                    ext = compose(hs.jump, table[steps, jumps - 1])
                    rel = ext if rel is None else rel | ext
            table[steps, jumps] = rel
            scaled = steps + jumps * k_unit
            if k_unit <= scaled <= 3 * k_unit:
                acc = rel if acc is None else acc | rel
    assert acc is not None
    h = associated_relation(hs)
    h2 = compose(h, h)
    assert h <= acc and acc <= h | h2 | compose(h, h2)
    return acc


def restricted_associated_relation(hs: HybridSystem, region: CellSet) -> Relation:
    """The associated relation of the system cut down to a region: flow
    runs and jump paddings must stay inside, not just the endpoints."""
    sf = hs.sf
    c_in = hs.flow_set & region
    inner = restricted_interval_relation(sf, c_in, 0.0, 1.0) | _identity_on(
        region, sf.space
    )
    jumps_in = hs.jump.restrict(region)
    return compose(inner, compose(jumps_in, inner)) | restricted_interval_relation(
        sf, c_in, 1.0, 2.0
    )


def hybrid_viability(hs: HybridSystem, region: CellSet) -> ViabilityReport:
    return viability_report(restricted_associated_relation(hs, region), region)


def hybrid_chain_query(
    hs: HybridSystem, eps: float, source: int, target: int
) -> bool:
    """Is there an eps-chain of hybrid moves from source to target?

    Each link dilates by eps before a move, and one final dilation may
    follow the last move; at eps = 0 the dilation is cell touching.
    """
    h = associated_relation(hs)
    v = dilation_relation(hs.sf.space, eps)
    reach = compose(orbit_relation(compose(v, h)), v)
    return bool(reach.rows[source] >> target & 1)


def hybrid_boundary(hs: HybridSystem, region: CellSet) -> CellSet:
    """Exit slice of a region under either kind of move: jump exits plus
    in-flow-set step exits."""
    jump_delta = f_boundary(hs.jump, region).delta
    flow_delta = f_boundary(hs.sf.step.restrict(hs.flow_set), region).delta
    return jump_delta | flow_delta


@dataclass(frozen=True)
class HybridConleyReport:
    """Conley data for a region under the restricted associated relation,
    with the exit slice taken from single hybrid moves."""

    relation: Relation
    checks: IsolationReport
    boundary: CellSet
    hybrid_index_type: bool
    pair: Optional[IndexPair]
    validation: Optional[IndexPairCheck]


def hybrid_conley(hs: HybridSystem, region: CellSet) -> HybridConleyReport:
    rel = restricted_associated_relation(hs, region)
    boundary = hybrid_boundary(hs, region)
    checks, index_type, pair, validation = exit_slice_conley(rel, region, boundary)
    return HybridConleyReport(
        relation=rel,
        checks=checks,
        boundary=boundary,
        hybrid_index_type=index_type,
        pair=pair,
        validation=validation,
    )


def hybrid_lyapunov(hs: HybridSystem, eps: float = 0.0) -> LyapunovField:
    return complete_lyapunov(associated_relation(hs), eps)


@dataclass(frozen=True)
class TrappingCheck:
    """A superlevel set of a hybrid Lyapunov field with inwardness split
    by move kind."""

    cells: CellSet
    flow_inward: bool
    jump_inward: bool
    inward: bool


def hybrid_superlevel_inward(
    hs: HybridSystem, field_values, threshold
) -> TrappingCheck:
    h = associated_relation(hs)
    report = sublevel_inward(h, field_values, threshold)
    cells = report.cells
    inner = cells.interior()
    step_c = hs.sf.step.restrict(hs.flow_set)
    flow_inward = step_c.image(cells) <= inner
    jump_inward = hs.jump.image(cells) <= inner
    return TrappingCheck(
        cells=cells,
        flow_inward=flow_inward,
        jump_inward=jump_inward,
        inward=report.inward and flow_inward and jump_inward,
    )


@dataclass(frozen=True)
class InvarianceFlags:
    """Forward invariance of a cell set measured three ways: per micro
    move, through the associated relation, and along enumerated paths."""

    move_invariant: bool
    h_invariant: bool
    path_invariant: bool

    @property
    def agree(self) -> bool:
        return self.move_invariant == self.h_invariant == self.path_invariant


def invariance_flags(
    hs: HybridSystem, cells: CellSet, path_length: float = 3.0
) -> InvarianceFlags:
    step_c = hs.sf.step.restrict(hs.flow_set)
    move = step_c.image(cells) <= cells and hs.jump.image(cells) <= cells
    h_inv = associated_relation(hs).image(cells) <= cells
    paths, truncated = enumerate_hybrid_paths(
        hs, hs.sf.space.full_set(), path_length
    )
    assert not truncated, "raise the cap to measure path invariance"
    path_inv = all(
        set(p.cells) <= set(cells.members)
        for p in paths
        if cells.mask >> p.cells[0] & 1
    )
    return InvarianceFlags(
        move_invariant=move, h_invariant=h_inv, path_invariant=path_inv
    )


@dataclass(frozen=True)
class HybridTimeDomain:
    """A staircase chain of (flow time, jump count) anchors.

    Each link increases exactly one coordinate; ``simple`` records
    whether link kinds strictly alternate.  The length of the domain is
    total flow time plus total jump count.
    """

    anchors: Tuple[Tuple[float, int], ...]

    def __post_init__(self) -> None:
        if not self.anchors:
            raise ValueError("a time domain needs at least one anchor")
        if self.anchors[0] != (0.0, 0):
            raise ValueError("time domains start at (0, 0)")
        for (t0, n0), (t1, n1) in zip(self.anchors, self.anchors[1:]):
            horizontal = t1 > t0 + _TOL and n1 == n0
            vertical = abs(t1 - t0) <= _TOL and n1 == n0 + 1
            if not (horizontal or vertical):
                raise ValueError(
                    "each link must advance flow time or jump count, not both"
                )

    @property
    def length(self) -> float:
        t, n = self.anchors[-1]
        return t + n

    @property
    def simple(self) -> bool:
        kinds = [
            b[1] == a[1]  # True for a flow link
            for a, b in zip(self.anchors, self.anchors[1:])
        ]
        return all(x != y for x, y in zip(kinds, kinds[1:]))


@dataclass(frozen=True)
class HybridPath:
    """Cells attached to the anchors of a time domain; flow links carry
    single lattice steps inside the flow set, jump links carry jump
    edges."""

    domain: HybridTimeDomain
    cells: Tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.cells) != len(self.domain.anchors):
            raise ValueError("one cell per anchor")

    @property
    def length(self) -> float:
        return self.domain.length


def path_is_valid(hs: HybridSystem, path: HybridPath) -> bool:
    """Check every link of a path against the system's moves."""
    sf = hs.sf
    step_c = sf.step.restrict(hs.flow_set)
    anchors, cells = path.domain.anchors, path.cells
    if len(anchors) == 1:
        return bool(hs.action_set.mask >> cells[0] & 1)
    for i in range(len(anchors) - 1):
        (t0, n0), (t1, n1) = anchors[i], anchors[i + 1]
        x, y = cells[i], cells[i + 1]
        if n1 == n0:
            if abs((t1 - t0) - sf.delta) > _TOL:
                return False
            if not step_c.rows[x] >> y & 1:
                return False
        else:
            if not hs.jump.rows[x] >> y & 1:
                return False
    return True


def enumerate_hybrid_paths(
    hs: HybridSystem,
    region: CellSet,
    max_length: float,
    cap: int = 100000,
) -> Tuple[Tuple[HybridPath, ...], bool]:
    """All in-region paths of total length at most ``max_length``.

    Anchors advance by single lattice flow steps or single jumps, so the
    domains are saturated staircases.  Paths come out ordered by start
    cell, then by move sequence with flow before jump and lower target
    cells first; a second return value flags a hit of the cap.  A zero
    budget yields one trivial path per action cell of the region.
    """
    if max_length < -_TOL:
        raise ValueError("max_length must be nonnegative")
    sf = hs.sf
    step_c = sf.step.restrict(hs.flow_set & region)
    jumps_in = hs.jump.restrict(region)
    starts = [c for c in region.members if hs.action_set.mask >> c & 1]
    paths: List[HybridPath] = []
    truncated = False

    def moves(cell: int, t: float, n: int):
        if t + sf.delta <= max_length - n + _TOL:
            row = step_c.rows[cell]
            while row:
                low = row & -row
                yield (0, low.bit_length() - 1)
                row ^= low
        if t + n + 1 <= max_length + _TOL:
            row = jumps_in.rows[cell]
            while row:
                low = row & -row
                yield (1, low.bit_length() - 1)
                row ^= low

    for start in starts:
        if truncated:
            break
        stack = [(((0.0, 0),), (start,))]
        while stack:
            anchors, cells = stack.pop()
            paths.append(HybridPath(HybridTimeDomain(anchors), cells))
            if len(paths) >= cap:
                truncated = True
                break
            t, n = anchors[-1]
            extensions = list(moves(cells[-1], t, n))
            for kind, target in reversed(extensions):
                nxt = (t + sf.delta, n) if kind == 0 else (t, n + 1)
                stack.append((anchors + (nxt,), cells + (target,)))
    return tuple(paths), truncated


@dataclass(frozen=True)
class SpannedOrbit:
    """An orbit of the associated relation covering a hybrid path; the
    edge count sits between a third of the path length and the length."""

    cells: Tuple[int, ...]
    length: float

    @property
    def edges(self) -> int:
        return len(self.cells) - 1


def _piece_sizes(units: int, k_unit: int) -> List[int]:
    """Split a micro-step count into pieces of one to two time units."""
    if units == 0:
        return []
    count = ceil(units / (2 * k_unit))
    base, extra = divmod(units, count)
    return [base + 1] * extra + [base] * (count - extra)


def span_decomposition(hs: HybridSystem, path: HybridPath) -> SpannedOrbit:
    """Compress a path of length at least one into an orbit of the
    associated relation.

    Jumps absorb up to one unit of flow on each side; leftover flow runs
    split into one-to-two unit pieces.  Every cut lands on a path anchor,
    so each orbit edge is certified by an explicit sub-path.
    """
    ell = path.length
    if ell < 1.0 - _TOL:
        raise ValueError("only paths of length at least one can be spanned")
    k_unit = hs.sf.steps_per_unit
    anchors = path.domain.anchors
    # runs[i] = number of flow micro-steps between jump i-1 and jump i
    runs: List[int] = [0]
    jump_positions: List[int] = []
    for i, ((_, n0), (_, n1)) in enumerate(zip(anchors, anchors[1:])):
        if n1 == n0:
            runs[-1] += 1
        else:
            jump_positions.append(i)
            runs.append(0)
    h = associated_relation(hs)
    cuts = [0]
    pos = 0
    for idx, run in enumerate(runs):
        has_left = idx > 0
        has_right = idx < len(runs) - 1
        left = min(k_unit, run) if has_left else 0
        rem = run - left
        right = min(k_unit, rem) if has_right else 0
        residual = rem - right
        if 0 < residual < k_unit:
            shortfall = k_unit - residual
            give = min(right, shortfall)
            right -= give
            shortfall -= give
            left -= shortfall
            residual = k_unit
        assert left >= 0 and right >= 0
        assert residual == 0 or residual >= k_unit
        if has_left:
            # close the pending jump edge with its post-flow padding
            pos += left
            cuts.append(pos)
        for piece in _piece_sizes(residual, k_unit):
            pos += piece
            cuts.append(pos)
        pos += right
        if has_right:
            pos += 1  # the jump link itself; the cut waits for its padding
    assert cuts[-1] == len(anchors) - 1, "every link must be cut into an edge"
    orbit = tuple(path.cells[i] for i in cuts)
    for x, y in zip(orbit, orbit[1:]):
        assert h.rows[x] >> y & 1, (x, y)
    edges = len(orbit) - 1
    assert ell / 3 - _TOL <= edges <= ell + _TOL, (edges, ell)
    return SpannedOrbit(cells=orbit, length=ell)


def _flow_micro_path(
    step_c: Relation, source: int, target: int, steps: int
) -> Optional[Tuple[int, ...]]:
    """Lexicographically least in-flow path with exactly ``steps`` links."""
    if steps == 0:
        return (source,) if source == target else None
    stack = [((source,), steps)]
    while stack:
        prefix, left = stack.pop()
        row = step_c.rows[prefix[-1]]
        if left == 1:
            if row >> target & 1:
                return prefix + (target,)
            continue
        succs = []
        while row:
            low = row & -row
            succs.append(low.bit_length() - 1)
            row ^= low
        for s in reversed(succs):
            stack.append((prefix + (s,), left - 1))
    return None


def build_spanning_path(hs: HybridSystem, orbit: Sequence[int]) -> HybridPath:
    """Expand an orbit of the associated relation into a hybrid path
    whose length is between the edge count and three times it."""
    if not orbit:
        raise ValueError("an orbit needs at least one cell")
    h = associated_relation(hs)
    sf = hs.sf
    k_unit = sf.steps_per_unit
    step_c = sf.step.restrict(hs.flow_set)
    if len(orbit) == 1:
        if not hs.action_set.mask >> orbit[0] & 1:
            raise ValueError("a trivial path needs an action cell")
        return HybridPath(HybridTimeDomain(((0.0, 0),)), (int(orbit[0]),))

    anchors: List[Tuple[float, int]] = [(0.0, 0)]
    cells: List[int] = [int(orbit[0])]

    def extend_flow(piece: Sequence[int]) -> None:
        for cell in piece[1:]:
            t, n = anchors[-1]
            anchors.append((round((t + sf.delta) * k_unit) / k_unit, n))
            cells.append(cell)

    def extend_jump(target: int) -> None:
        t, n = anchors[-1]
        anchors.append((t, n + 1))
        cells.append(target)

    for x, y in zip(orbit, orbit[1:]):
        x, y = int(x), int(y)
        if not h.rows[x] >> y & 1:
            raise ValueError(f"({x}, {y}) is not an edge of the associated relation")
        witness = None
        for steps in range(k_unit, 2 * k_unit + 1):
            piece = _flow_micro_path(step_c, x, y, steps)
            if piece is not None:
                witness = ("flow", piece)
                break
        if witness is None:
            found = False
            for pre in range(k_unit + 1):
                if found:
                    break
                for post in range(k_unit + 1):
                    if found:
                        break
                    for mid_src in range(h.size):
                        head = _flow_micro_path(step_c, x, mid_src, pre)
                        if head is None or not hs.jump.rows[mid_src]:
                            continue
                        row = hs.jump.rows[mid_src]
                        while row:
                            low = row & -row
                            mid_dst = low.bit_length() - 1
                            row ^= low
                            tail = _flow_micro_path(step_c, mid_dst, y, post)
                            if tail is not None:
                                witness = ("jump", head, mid_dst, tail)
                                found = True
                                break
                        if found:
                            break
            assert witness is not None, (x, y)
        if witness[0] == "flow":
            extend_flow(witness[1])
        else:
            _, head, mid_dst, tail = witness
            extend_flow(head)
            extend_jump(mid_dst)
            extend_flow(tail)
    path = HybridPath(HybridTimeDomain(tuple(anchors)), tuple(cells))
    edges = len(orbit) - 1
    assert edges <= path.length + _TOL <= 3 * edges + _TOL, (edges, path.length)
    assert path_is_valid(hs, path)
    return path
