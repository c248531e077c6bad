"""Lattice-time outer models of semiflows.

A semiflow sampled at times k*delta reduces every real time window to a
union of powers of the one-step relation, so the continuous objects
(time-t maps, exit times, index pairs for the flow) all become finite
relation algebra.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import inf
from typing import Dict, Optional, Tuple

from .cells import CellSet
from .conley import (
    IndexPair,
    IndexPairCheck,
    IsolationReport,
    f_boundary,
    isolating_checks,
    validate_index_pair,
)
from .grid import GridSpace
from .relation import Relation, compose, iterate, orbit_relation
from .viability import viability_report

_LATTICE_TOL = 1e-9


@dataclass(frozen=True)
class SemiflowApprox:
    """One lattice step of a semiflow plus its timing data.

    ``steps_per_unit * delta`` must equal one time unit; ``complete``
    records whether the step relation is total.
    """

    space: GridSpace
    step: Relation
    delta: float
    steps_per_unit: int
    complete: bool = field(init=False)

    def __post_init__(self) -> None:
        if self.steps_per_unit < 1:
            raise ValueError("steps_per_unit must be at least 1")
        if abs(self.steps_per_unit * self.delta - 1.0) > _LATTICE_TOL:
            raise ValueError("delta must be the reciprocal of steps_per_unit")
        if self.step.size != self.space.cell_count:
            raise ValueError("step relation does not match the grid")
        total = all(self.step.rows[c] for c in range(self.step.size))
        object.__setattr__(self, "complete", total)


def lattice_index(sf: SemiflowApprox, t: float) -> int:
    """Convert a real time to its step count, rejecting off-lattice times."""
    scaled = t * sf.steps_per_unit
    nearest = round(scaled)
    if abs(scaled - nearest) > _LATTICE_TOL * max(1.0, abs(scaled)) + _LATTICE_TOL:
        raise ValueError(f"time {t} is not a multiple of the step {sf.delta}")
    if nearest < 0:
        raise ValueError("times must be nonnegative")
    return int(nearest)


def _window(sf: SemiflowApprox, t1: float, t2: float) -> Tuple[int, int]:
    j1, j2 = lattice_index(sf, t1), lattice_index(sf, t2)
    if j1 > j2:
        raise ValueError("time window must be ordered")
    return j1, j2


def _identity_on(region: CellSet, space: GridSpace) -> Relation:
    rows = tuple(
        (1 << c) if region.mask >> c & 1 else 0 for c in range(region.size)
    )
    return Relation(region.size, rows, space)


def _power_union(step: Relation, j1: int, j2: int, zero: Relation) -> Relation:
    """Union of step powers j1..j2, with ``zero`` standing in for power 0."""
    power = zero if j1 == 0 else iterate(step, j1)
    acc = power
    for _ in range(j1, j2):
        power = compose(step, power)
        acc = acc | power
    return acc


def interval_relation(sf: SemiflowApprox, t1: float, t2: float) -> Relation:
    """All pairs connected by some flow time in [t1, t2]."""
    j1, j2 = _window(sf, t1, t2)
    return _power_union(sf.step, j1, j2, Relation.identity(sf.step.size, sf.space))


def restricted_interval_relation(
    sf: SemiflowApprox, region: CellSet, t1: float, t2: float
) -> Relation:
    """Pairs connected by an in-region flow of some time in [t1, t2].

    Finer than restricting interval_relation afterwards: the whole path
    must stay inside, not just the endpoints.
    """
    j1, j2 = _window(sf, t1, t2)
    restricted = sf.step.restrict(region)
    return _power_union(restricted, j1, j2, _identity_on(region, sf.space))


@dataclass(frozen=True)
class TimedRelationTable:
    """Reachability relations indexed by lattice time k*delta.

    Entry 0 always plays the role of the identity (possibly partial,
    after a restriction).
    """

    delta: float
    relations: Tuple[Relation, ...]

    def __post_init__(self) -> None:
        if not self.relations:
            raise ValueError("a table needs at least the time-zero entry")
        if not self.relations[0] <= Relation.identity(
            self.relations[0].size, self.relations[0].space
        ):
            raise ValueError("the time-zero entry must sit inside the identity")

    @property
    def horizon(self) -> int:
        return len(self.relations) - 1

    @staticmethod
    def from_semiflow(sf: SemiflowApprox, horizon: int) -> "TimedRelationTable":
        if horizon < 0:
            raise ValueError("horizon must be nonnegative")
        rels = [Relation.identity(sf.step.size, sf.space)]
        for _ in range(horizon):
            rels.append(compose(sf.step, rels[-1]))
        return TimedRelationTable(delta=sf.delta, relations=tuple(rels))

    def restrict(self, cells: CellSet) -> "TimedRelationTable":
        return TimedRelationTable(
            delta=self.delta,
            relations=tuple(r.restrict(cells) for r in self.relations),
        )


def _check_weak_composition(table: TimedRelationTable) -> None:
    rels = table.relations
    for j in range(1, len(rels)):
        for k in range(1, len(rels) - j):
            composed = compose(rels[k], rels[j])
            if composed <= rels[j + k]:
                continue
            for x in range(composed.size):
                extra = composed.rows[x] & ~rels[j + k].rows[x]
                if extra:
                    y = extra.bit_length() - 1
                    raise ValueError(
                        "not a weak semiflow table: "
                        f"({x}, {(j + k) * table.delta}, {y}) is reachable "
                        "by composition but missing from the table"
                    )


def _refine_pass(table: TimedRelationTable) -> TimedRelationTable:
    rels = table.relations
    refined = list(rels[:2]) if len(rels) > 1 else list(rels)
    for k in range(2, len(rels)):
        entry = rels[k]
        for j in range(1, k):
            entry = entry & compose(rels[k - j], rels[j])
        refined.append(entry)
    return TimedRelationTable(delta=table.delta, relations=tuple(refined))


def refine_weak_semiflow(table: TimedRelationTable) -> TimedRelationTable:
    """One pruning pass: drop pairs at time k that do not factor through
    every intermediate lattice time.

    The input must compose inside itself (weak Kolmogorov property);
    tables obtained by restricting a genuine flow table do.
    """
    _check_weak_composition(table)
    return _refine_pass(table)


def weak_semiflow_fixpoint(table: TimedRelationTable) -> TimedRelationTable:
    """Iterate the pruning pass to its fixpoint, the largest table inside
    the input whose every entry factors through all intermediate times."""
    current = refine_weak_semiflow(table)
    while True:
        nxt = _refine_pass(current)
        if nxt == current:
            return current
        current = nxt


@dataclass(frozen=True)
class TimeHorizonReport:
    """Real-time exit bounds for a region: first and last possible exit
    time per cell, and the cells that must leave immediately."""

    tau: Dict[int, float]
    tau_bar: Dict[int, float]
    terminal: CellSet


def tau_and_terminal(sf: SemiflowApprox, region: CellSet) -> TimeHorizonReport:
    vb = viability_report(sf.step, region)
    tau = {c: sf.delta * n if n != inf else inf for c, n in vb.nu.items()}
    tau_bar = {c: sf.delta * n if n != inf else inf for c, n in vb.nu_bar.items()}
    return TimeHorizonReport(tau=tau, tau_bar=tau_bar, terminal=vb.terminal)


def phi_boundary(sf: SemiflowApprox, region: CellSet) -> CellSet:
    """Exit slice of the region under one flow step."""
    return f_boundary(sf.step, region).delta


@dataclass(frozen=True)
class FlowConleyReport:
    """Conley data for a region under the unit-to-double-unit flow map.

    ``relation`` is the in-region flow over times [1, 2]; ``boundary``
    is the one-step exit slice, which replaces the exit slice of
    ``relation`` both in the index-type test and in pair validation.
    """

    relation: Relation
    checks: IsolationReport
    boundary: CellSet
    flow_index_type: bool
    pair: Optional[IndexPair]
    validation: Optional[IndexPairCheck]


def exit_slice_conley(
    rel: Relation,
    region: CellSet,
    exit_slice: CellSet,
    transit: Optional[Relation] = None,
) -> Tuple[IsolationReport, bool, Optional[IndexPair], Optional[IndexPairCheck]]:
    """Shared index-pair driver for relations with an external exit slice.

    ``transit`` is the finer relation whose orbit absorbs the exit slice
    into the second component; it defaults to ``rel`` inside the region.
    """
    checks = isolating_checks(rel, region)
    index_type = checks.isolating and not (exit_slice & checks.c_plus)
    if not index_type:
        return checks, False, None, None
    mover = rel.restrict(region) if transit is None else transit.restrict(region)
    p2 = exit_slice | orbit_relation(mover).image(exit_slice)
    pair = IndexPair(p1=region, p2=p2, viable_set=checks.c_pm)
    validation = validate_index_pair(rel, pair, exit_override=exit_slice)
    return checks, True, pair, validation


def semiflow_conley(sf: SemiflowApprox, region: CellSet) -> FlowConleyReport:
    rel = restricted_interval_relation(sf, region, 1.0, 2.0)
    boundary = phi_boundary(sf, region)
    checks, index_type, pair, validation = exit_slice_conley(
        rel, region, boundary, transit=sf.step
    )
    return FlowConleyReport(
        relation=rel,
        checks=checks,
        boundary=boundary,
        flow_index_type=index_type,
        pair=pair,
        validation=validation,
    )
