"""System spec ingestion, analysis orchestration, and report emission.

One JSON document format serves both input and output: a spec names a
system (explicit relation, sampled map, semiflow, or hybrid) plus the
analyses to run, and the emitted report embeds a loadable relation spec
so results round-trip.  Graphs go to DOT, scalar fields to CSV, and
timing to a separate file so report bodies stay byte-stable.
"""
from __future__ import annotations

import csv
import hashlib
import json
import time
from dataclasses import dataclass, replace
from fractions import Fraction
from math import inf, isinf
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

from .cells import CellSet
from .chain import chain_analysis
from .conley import (
    build_index_pair,
    isolating_checks,
    quotient_relation,
    validate_index_pair,
)
from .grid import GridSpace, outer_approximate_map
from .hybrid import (
    HybridSystem,
    associated_relation,
    enumerate_hybrid_paths,
    hybrid_boundary,
    hybrid_conley,
    teel_relation,
)
from .lyapunov import complete_lyapunov, verify_lyapunov
from .morse import ar_family_from_analysis, morse_graph
from .perturbation import eliminate_repeller, eliminate_saddle
from .relation import Relation, compose
from .samplers import SAMPLERS, get_sampler
from .semiflow import SemiflowApprox, semiflow_conley
from .viability import viability_report

SCHEMA_VERSION = 1
KINDS = ("relation", "sampled_map", "semiflow", "hybrid")
ANALYSES = (
    "viability",
    "chain",
    "morse",
    "lyapunov",
    "conley",
    "perturb",
    "hybrid",
    "paths",
)
HYBRID_ONLY = frozenset({"hybrid", "paths"})


class SpecError(ValueError):
    """Input-side failure: unreadable file, bad syntax, or bad schema."""


def _expect(cond: bool, message: str, path: str) -> None:
    if not cond:
        raise SpecError(f"{message} (field {path})")


@dataclass(frozen=True)
class AnalysisSettings:
    eps_ladder: Tuple[float, ...]
    analyses: Tuple[str, ...]
    region: Optional[Tuple[int, ...]] = None
    perturb_mode: str = "repeller"
    perturb_eps: Optional[float] = None
    max_length: float = 3.0
    path_cap: int = 10000
    list_cap: int = 100


@dataclass(frozen=True)
class SystemSpec:
    kind: str
    grid: GridSpace
    payload: Mapping[str, Any]
    analysis: AnalysisSettings
    raw: Dict[str, Any]


@dataclass(frozen=True)
class BuiltSystem:
    space: GridSpace
    relation: Relation
    semiflow: Optional[SemiflowApprox] = None
    hybrid: Optional[HybridSystem] = None


@dataclass
class AnalysisReport:
    results: Dict[str, Any]
    provenance: Dict[str, Any]
    timing: Dict[str, float]
    ok: bool


def load_spec(path) -> SystemSpec:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise SpecError(f"cannot read spec: {exc}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(
            f"parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from None
    return spec_from_dict(doc)


def _check_grid(block: Any) -> GridSpace:
    _expect(isinstance(block, dict), "grid must be an object", "grid")
    for key in ("lower", "upper", "divisions"):
        _expect(key in block, "missing grid key", f"grid.{key}")
        _expect(
            isinstance(block[key], list) and block[key],
            "must be a nonempty list",
            f"grid.{key}",
        )
    try:
        return GridSpace(
            tuple(float(v) for v in block["lower"]),
            tuple(float(v) for v in block["upper"]),
            tuple(int(v) for v in block["divisions"]),
        )
    except (TypeError, ValueError) as exc:
        raise SpecError(f"bad grid: {exc} (field grid)") from None


def _check_edges(block: Any, size: int, path: str) -> List[Tuple[int, int]]:
    _expect(isinstance(block, list), "edges must be a list", path)
    out: List[Tuple[int, int]] = []
    for i, edge in enumerate(block):
        _expect(
            isinstance(edge, list) and len(edge) == 2,
            "each edge is a [source, target] pair",
            f"{path}[{i}]",
        )
        x, y = edge
        _expect(
            isinstance(x, int) and isinstance(y, int),
            "edge endpoints must be integers",
            f"{path}[{i}]",
        )
        _expect(
            0 <= x < size and 0 <= y < size,
            f"cell out of range 0..{size - 1}",
            f"{path}[{i}]",
        )
        out.append((x, y))
    return out


def _check_cells(block: Any, size: int, path: str) -> Tuple[int, ...]:
    _expect(isinstance(block, list), "must be a list of cells", path)
    for i, c in enumerate(block):
        _expect(isinstance(c, int), "cells must be integers", f"{path}[{i}]")
        _expect(0 <= c < size, f"cell out of range 0..{size - 1}", f"{path}[{i}]")
    return tuple(sorted(set(block)))


def _check_step_block(block: Any, size: int, path: str) -> Dict[str, Any]:
    _expect(isinstance(block, dict), "must be an object", path)
    if "edges" in block:
        return {"edges": _check_edges(block["edges"], size, f"{path}.edges")}
    if "sampler" in block:
        name = block["sampler"]
        _expect(isinstance(name, str), "sampler id must be a string", f"{path}.sampler")
        if name not in SAMPLERS:
            known = ", ".join(sorted(SAMPLERS))
            raise SpecError(
                f"unknown sampler id '{name}' (known: {known}) (field {path}.sampler)"
            )
        out: Dict[str, Any] = {"sampler": name}
        out["parameters"] = dict(block.get("parameters", {}))
        out["bloat"] = float(block.get("bloat", 0.0))
        out["subdivisions"] = int(block.get("subdivisions", 2))
        _expect(out["bloat"] >= 0.0, "bloat must be nonnegative", f"{path}.bloat")
        _expect(
            out["subdivisions"] >= 1,
            "subdivisions must be positive",
            f"{path}.subdivisions",
        )
        return out
    raise SpecError(f"need either 'edges' or 'sampler' (field {path})")


def spec_from_dict(doc: Any) -> SystemSpec:
    _expect(isinstance(doc, dict), "spec must be a JSON object", "$")
    schema = doc.get("schema", SCHEMA_VERSION)
    _expect(schema == SCHEMA_VERSION, f"unsupported schema version {schema}", "schema")
    kind = doc.get("kind")
    _expect(kind in KINDS, f"kind must be one of {list(KINDS)}", "kind")
    grid = _check_grid(doc.get("grid"))
    size = grid.cell_count

    payload_in = doc.get("payload")
    _expect(isinstance(payload_in, dict), "payload must be an object", "payload")
    payload: Dict[str, Any] = {}
    if kind == "relation":
        payload["edges"] = _check_edges(payload_in.get("edges"), size, "payload.edges")
    elif kind == "sampled_map":
        payload = _check_step_block(payload_in, size, "payload")
        _expect("sampler" in payload, "sampled_map needs a sampler", "payload.sampler")
    else:
        step_key = "step" if kind == "semiflow" else "flow"
        _expect(step_key in payload_in, "missing step block", f"payload.{step_key}")
        payload[step_key] = _check_step_block(
            payload_in[step_key], size, f"payload.{step_key}"
        )
        payload["delta"] = float(payload_in.get("delta", 1.0))
        payload["steps_per_unit"] = int(payload_in.get("steps_per_unit", 1))
        _expect(
            payload["steps_per_unit"] >= 1,
            "steps_per_unit must be positive",
            "payload.steps_per_unit",
        )
        if kind == "hybrid":
            flow_cells = payload_in.get("flow_cells", "all")
            if flow_cells == "all":
                payload["flow_cells"] = "all"
            else:
                payload["flow_cells"] = list(
                    _check_cells(flow_cells, size, "payload.flow_cells")
                )
            payload["jump_edges"] = _check_edges(
                payload_in.get("jump_edges", []), size, "payload.jump_edges"
            )

    analysis_in = doc.get("analysis", {})
    _expect(isinstance(analysis_in, dict), "analysis must be an object", "analysis")
    ladder_in = analysis_in.get("eps_ladder", [0.0])
    _expect(
        isinstance(ladder_in, list) and ladder_in,
        "eps_ladder must be a nonempty list",
        "analysis.eps_ladder",
    )
    ladder = tuple(float(e) for e in ladder_in)
    _expect(
        all(e >= 0.0 for e in ladder),
        "eps values must be nonnegative",
        "analysis.eps_ladder",
    )
    _expect(
        all(a > b for a, b in zip(ladder, ladder[1:])),
        "eps_ladder must be strictly decreasing",
        "analysis.eps_ladder",
    )
    requested_in = analysis_in.get("analyses", ["chain"])
    _expect(
        isinstance(requested_in, list) and requested_in,
        "analyses must be a nonempty list",
        "analysis.analyses",
    )
    for name in requested_in:
        _expect(name in ANALYSES, f"unknown analysis '{name}'", "analysis.analyses")
    requested = tuple(name for name in ANALYSES if name in requested_in)

    region: Optional[Tuple[int, ...]] = None
    if "region" in analysis_in:
        region = _check_cells(analysis_in["region"], size, "analysis.region")
    perturb_block = analysis_in.get("perturb", {})
    _expect(
        isinstance(perturb_block, dict), "perturb must be an object", "analysis.perturb"
    )
    mode = perturb_block.get("mode", "repeller")
    _expect(
        mode in ("repeller", "saddle"),
        "perturb mode must be 'repeller' or 'saddle'",
        "analysis.perturb.mode",
    )
    perturb_eps = perturb_block.get("eps")
    if perturb_eps is not None:
        perturb_eps = float(perturb_eps)
        _expect(perturb_eps > 0.0, "perturb eps must be positive", "analysis.perturb.eps")
    caps = analysis_in.get("caps", {})
    _expect(isinstance(caps, dict), "caps must be an object", "analysis.caps")
    settings = AnalysisSettings(
        eps_ladder=ladder,
        analyses=requested,
        region=region,
        perturb_mode=mode,
        perturb_eps=perturb_eps,
        max_length=float(caps.get("max_length", 3.0)),
        path_cap=int(caps.get("paths", 10000)),
        list_cap=int(caps.get("list", 100)),
    )
    for name in ("conley", "perturb"):
        if name in requested:
            _expect(region is not None, f"'{name}' needs a region", "analysis.region")
    if "perturb" in requested:
        _expect(
            perturb_eps is not None, "'perturb' needs an eps", "analysis.perturb.eps"
        )
    if kind != "hybrid":
        for name in HYBRID_ONLY:
            _expect(
                name not in requested,
                f"analysis '{name}' needs a hybrid-kind spec",
                "analysis.analyses",
            )

    raw = canonical_dict(kind, grid, payload, settings)
    return SystemSpec(kind=kind, grid=grid, payload=payload, analysis=settings, raw=raw)


def canonical_dict(
    kind: str, grid: GridSpace, payload: Mapping[str, Any], settings: AnalysisSettings
) -> Dict[str, Any]:
    """Normal form of a spec: defaults resolved, edge lists sorted."""

    def norm_step(block: Mapping[str, Any]) -> Dict[str, Any]:
        if "edges" in block:
            return {"edges": sorted([list(e) for e in block["edges"]])}
        return {
            "sampler": block["sampler"],
            "parameters": {k: block["parameters"][k] for k in sorted(block["parameters"])},
            "bloat": block["bloat"],
            "subdivisions": block["subdivisions"],
        }

    if kind in ("relation", "sampled_map"):
        payload_norm = norm_step(payload)
    elif kind == "semiflow":
        payload_norm = {
            "step": norm_step(payload["step"]),
            "delta": payload["delta"],
            "steps_per_unit": payload["steps_per_unit"],
        }
    else:
        payload_norm = {
            "flow": norm_step(payload["flow"]),
            "delta": payload["delta"],
            "steps_per_unit": payload["steps_per_unit"],
            "flow_cells": payload["flow_cells"]
            if payload["flow_cells"] == "all"
            else sorted(payload["flow_cells"]),
            "jump_edges": sorted([list(e) for e in payload["jump_edges"]]),
        }
    analysis_norm: Dict[str, Any] = {
        "eps_ladder": list(settings.eps_ladder),
        "analyses": list(settings.analyses),
        "caps": {
            "max_length": settings.max_length,
            "paths": settings.path_cap,
            "list": settings.list_cap,
        },
    }
    if settings.region is not None:
        analysis_norm["region"] = list(settings.region)
    if "perturb" in settings.analyses:
        analysis_norm["perturb"] = {
            "mode": settings.perturb_mode,
            "eps": settings.perturb_eps,
        }
    return {
        "schema": SCHEMA_VERSION,
        "kind": kind,
        "grid": {
            "lower": list(grid.lower),
            "upper": list(grid.upper),
            "divisions": list(grid.divisions),
        },
        "payload": payload_norm,
        "analysis": analysis_norm,
    }


def narrow_spec(
    spec: SystemSpec, analyses: Sequence[str], eps: Optional[float] = None
) -> SystemSpec:
    """Replace the requested analyses (and optionally the ladder) while
    keeping validation guarantees."""
    for name in analyses:
        if name in HYBRID_ONLY and spec.kind != "hybrid":
            raise SpecError(
                f"analysis '{name}' needs a hybrid-kind spec (field analysis.analyses)"
            )
        if name in ("conley", "perturb") and spec.analysis.region is None:
            raise SpecError(f"'{name}' needs a region (field analysis.region)")
        if name == "perturb" and spec.analysis.perturb_eps is None:
            raise SpecError("'perturb' needs an eps (field analysis.perturb.eps)")
    ordered = tuple(name for name in ANALYSES if name in analyses)
    ladder = spec.analysis.eps_ladder if eps is None else (float(eps),)
    settings = replace(spec.analysis, analyses=ordered, eps_ladder=ladder)
    raw = canonical_dict(spec.kind, spec.grid, spec.payload, settings)
    return replace(spec, analysis=settings, raw=raw)


def _relation_from_edges(
    edges: Sequence[Tuple[int, int]], space: GridSpace
) -> Relation:
    rows = [0] * space.cell_count
    for x, y in edges:
        rows[x] |= 1 << y
    return Relation(space.cell_count, tuple(rows), space)


def _step_from_block(block: Mapping[str, Any], space: GridSpace) -> Relation:
    if "edges" in block:
        return _relation_from_edges(block["edges"], space)
    sampler = get_sampler(block["sampler"], space, block["parameters"])
    return outer_approximate_map(
        space, sampler, bloat=block["bloat"], subdivisions=block["subdivisions"]
    )


def build_system(spec: SystemSpec) -> BuiltSystem:
    space = spec.grid
    if spec.kind in ("relation", "sampled_map"):
        return BuiltSystem(space=space, relation=_step_from_block(spec.payload, space))
    if spec.kind == "semiflow":
        step = _step_from_block(spec.payload["step"], space)
        sf = SemiflowApprox(
            space, step, spec.payload["delta"], spec.payload["steps_per_unit"]
        )
        return BuiltSystem(space=space, relation=step, semiflow=sf)
    step = _step_from_block(spec.payload["flow"], space)
    sf = SemiflowApprox(
        space, step, spec.payload["delta"], spec.payload["steps_per_unit"]
    )
    flow_cells = spec.payload["flow_cells"]
    flow_set = (
        space.full_set()
        if flow_cells == "all"
        else CellSet.from_cells(space.cell_count, flow_cells, space)
    )
    jump = _relation_from_edges(spec.payload["jump_edges"], space)
    hs = HybridSystem(sf, flow_set, jump)
    return BuiltSystem(
        space=space, relation=associated_relation(hs), semiflow=sf, hybrid=hs
    )


def _cells_out(cells: CellSet) -> List[int]:
    return list(cells.members)

def _num_out(v) -> Any:
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, float) and isinf(v):
        return "inf"
    return v


def _region_of(spec: SystemSpec, built: BuiltSystem) -> CellSet:
    if spec.analysis.region is None:
        return built.space.full_set()
    return CellSet.from_cells(built.space.cell_count, spec.analysis.region, built.space)


def _pair_result(checks, boundary, index_type, pair, validation) -> Dict[str, Any]:
    out: Dict[str, Any] = {
        "isolating": checks.isolating,
        "simple": checks.simple,
        "index_type": index_type,
        "viable_core": _cells_out(checks.c_pm),
        "forward_viable": _cells_out(checks.c_plus),
        "backward_viable": _cells_out(checks.c_minus),
    }
    if boundary is not None:
        out["exit_slice"] = _cells_out(boundary)
    if pair is not None:
        out["p1"] = _cells_out(pair.p1)
        out["p2"] = _cells_out(pair.p2)
        out["validation"] = {
            "passed": validation.passed,
            "failed_conditions": list(validation.failed_conditions),
            "exit_buffered": validation.exit_buffered,
        }
    return out


def _run_viability(spec: SystemSpec, built: BuiltSystem) -> Tuple[Dict[str, Any], bool]:
    region = _region_of(spec, built)
    vb = viability_report(built.relation, region)
    result = {
        "region": _cells_out(region),
        "forward_viable": _cells_out(vb.c_plus),
        "backward_viable": _cells_out(vb.c_minus),
        "viable_core": _cells_out(vb.c_pm),
        "terminal": _cells_out(vb.terminal),
        "annihilation_steps": {str(c): _num_out(v) for c, v in sorted(vb.nu.items())},
    }
    return result, True


def _chain_block(rel: Relation, eps: float) -> Dict[str, Any]:
    analysis = chain_analysis(rel, eps)
    return {
        "eps": eps,
        "recurrent": _cells_out(analysis.recurrent),
        "components": [_cells_out(c) for c in analysis.components],
    }


def _run_chain(spec: SystemSpec, built: BuiltSystem) -> Tuple[Dict[str, Any], bool]:
    ladder = [_chain_block(built.relation, eps) for eps in spec.analysis.eps_ladder]
    return {"ladder": ladder}, True


def _run_morse(spec: SystemSpec, built: BuiltSystem) -> Tuple[Dict[str, Any], bool]:
    eps = spec.analysis.eps_ladder[-1]
    analysis = chain_analysis(built.relation, eps)
    graph = morse_graph(analysis)
    pairs = ar_family_from_analysis(analysis)
    result = {
        "eps": eps,
        "components": [_cells_out(c) for c in graph.components],
        "edges": sorted(list(e) for e in graph.edges),
        "pairs": [
            {
                "attractor": _cells_out(p.attractor),
                "repeller": _cells_out(p.repeller),
            }
            for p in pairs
        ],
    }
    return result, True


def _run_lyapunov(spec: SystemSpec, built: BuiltSystem) -> Tuple[Dict[str, Any], bool]:
    eps = spec.analysis.eps_ladder[-1]
    field = complete_lyapunov(built.relation, eps)
    check = verify_lyapunov(built.relation, eps, field)
    result = {
        "eps": eps,
        "values": [str(v) for v in field.values],
        "verify": {
            "passed": check.passed,
            "monotone": check.monotone,
            "separates_components": check.separates_components,
            "critical": _cells_out(check.critical_set),
        },
    }
    return result, check.passed


def _run_conley(spec: SystemSpec, built: BuiltSystem) -> Tuple[Dict[str, Any], bool]:
    region = _region_of(spec, built)
    if built.hybrid is not None:
        rep = hybrid_conley(built.hybrid, region)
        result = _pair_result(
            rep.checks, rep.boundary, rep.hybrid_index_type, rep.pair, rep.validation
        )
        ok = rep.hybrid_index_type and rep.validation is not None and rep.validation.passed
        return result, ok
    if built.semiflow is not None:
        rep = semiflow_conley(built.semiflow, region)
        result = _pair_result(
            rep.checks, rep.boundary, rep.flow_index_type, rep.pair, rep.validation
        )
        ok = rep.flow_index_type and rep.validation is not None and rep.validation.passed
        return result, ok
    rel = built.relation
    checks = isolating_checks(rel, region)
    if not checks.index_type:
        return (
            _pair_result(checks, None, checks.index_type, None, None),
            False,
        )
    pair = build_index_pair(rel, region)
    validation = validate_index_pair(rel, pair)
    result = _pair_result(checks, None, checks.index_type, pair, validation)
    quotient = quotient_relation(rel, pair)
    result["quotient"] = {
        "cells": quotient.size,
        "star": quotient.size - 1,
        "edges": sum(bin(r).count("1") for r in quotient.rows),
    }
    return result, validation.passed


def _run_perturb(spec: SystemSpec, built: BuiltSystem) -> Tuple[Dict[str, Any], bool]:
    if built.semiflow is not None or built.hybrid is not None:
        raise SpecError(
            "perturbation runs on relation-kind specs (field analysis.analyses)"
        )
    region = _region_of(spec, built)
    eps = spec.analysis.perturb_eps
    assert eps is not None
    mode = spec.analysis.perturb_mode
    try:
        if mode == "repeller":
            outcome = eliminate_repeller(built.relation, region, eps)
            perturbed = outcome.g
        else:
            outcome = eliminate_saddle(built.relation, region, eps)
            perturbed = outcome.g_hat
    except ValueError as exc:
        return {"mode": mode, "eps": eps, "error": str(exc)}, False
    cert = outcome.cert
    result = {
        "mode": mode,
        "eps": eps,
        "certificate": {
            "eps": cert.eps,
            "containment_fwd": cert.containment_fwd,
            "containment_bwd": cert.containment_bwd,
            "annihilation_n": _num_out(cert.annihilation_n),
            "surjective": cert.surjective,
        },
        "perturbed_edges": sum(bin(r).count("1") for r in perturbed.rows),
    }
    verified = bool(cert) and (mode != "saddle" or cert.surjective)
    return result, verified


def _run_hybrid(spec: SystemSpec, built: BuiltSystem) -> Tuple[Dict[str, Any], bool]:
    hs = built.hybrid
    assert hs is not None
    h = built.relation
    ht = teel_relation(hs)
    h2 = compose(h, h)
    sandwich = h <= ht and ht <= h | h2 | compose(h, h2)
    result: Dict[str, Any] = {
        "flow_set": _cells_out(hs.flow_set),
        "jump_domain": _cells_out(hs.jump_domain),
        "complete": hs.complete,
        "associated_edges": sum(bin(r).count("1") for r in h.rows),
        "window_edges": sum(bin(r).count("1") for r in ht.rows),
        "sandwich": sandwich,
        "chain": [_chain_block(h, eps) for eps in spec.analysis.eps_ladder],
    }
    ok = sandwich
    if spec.analysis.region is not None:
        region = _region_of(spec, built)
        result["boundary"] = _cells_out(hybrid_boundary(hs, region))
        rep = hybrid_conley(hs, region)
        result["conley"] = _pair_result(
            rep.checks, rep.boundary, rep.hybrid_index_type, rep.pair, rep.validation
        )
    return result, ok


def _run_paths(spec: SystemSpec, built: BuiltSystem) -> Tuple[Dict[str, Any], bool]:
    hs = built.hybrid
    assert hs is not None
    region = _region_of(spec, built)
    paths, truncated = enumerate_hybrid_paths(
        hs, region, spec.analysis.max_length, spec.analysis.path_cap
    )
    listed = [
        {
            "anchors": [[t, n] for t, n in p.domain.anchors],
            "cells": list(p.cells),
            "length": p.length,
        }
        for p in paths[: spec.analysis.list_cap]
    ]
    result = {
        "count": len(paths),
        "truncated": truncated,
        "max_length": spec.analysis.max_length,
        "paths": listed,
    }
    return result, not truncated

_RUNNERS = {
    "viability": _run_viability,
    "chain": _run_chain,
    "morse": _run_morse,
    "lyapunov": _run_lyapunov,
    "conley": _run_conley,
    "perturb": _run_perturb,
    "hybrid": _run_hybrid,
    "paths": _run_paths,
}


def _system_section(spec: SystemSpec, built: BuiltSystem) -> Dict[str, Any]:
    """A loadable relation spec for the analyzed relation; reports
    round-trip through this block."""
    edges = sorted(
        [x, y]
        for x in range(built.relation.size)
        for y in range(built.relation.size)
        if built.relation.rows[x] >> y & 1
    )
    grid = spec.raw["grid"]
    return {
        "schema": SCHEMA_VERSION,
        "kind": "relation",
        "grid": {k: list(grid[k]) for k in ("lower", "upper", "divisions")},
        "payload": {"edges": edges},
        "analysis": {"eps_ladder": list(spec.analysis.eps_ladder), "analyses": ["chain"]},
    }


def run(spec: SystemSpec) -> AnalysisReport:
    """Execute the requested analyses in dependency order."""
    timing: Dict[str, float] = {}
    start = time.perf_counter()
    built = build_system(spec)
    timing["build"] = time.perf_counter() - start
    results: Dict[str, Any] = {"system": _system_section(spec, built)}
    ok = True
    for name in spec.analysis.analyses:
        t0 = time.perf_counter()
        result, verified = _RUNNERS[name](spec, built)
        timing[name] = time.perf_counter() - t0
        result["verified"] = verified
        results[name] = result
        ok = ok and verified
    digest = hashlib.sha256(
        json.dumps(spec.raw, sort_keys=True).encode()
    ).hexdigest()
    provenance = {
        "config_sha256": digest,
        "package": "gridconley",
        "schema": SCHEMA_VERSION,
    }
    return AnalysisReport(results=results, provenance=provenance, timing=timing, ok=ok)


def _dot_from_parts(
    name: str, nodes: List[str], edges: List[Tuple[int, int]]
) -> str:
    lines = [f"digraph {name} {{"]
    for i, label in enumerate(nodes):
        lines.append(f'  n{i} [label="{label}"];')
    for a, b in sorted(set(edges)):
        lines.append(f"  n{a} -> n{b};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def emit(report: AnalysisReport, out_dir) -> List[Path]:
    """Write the report body, timing, and any graph/field artifacts.

    The body is deterministic for a fixed spec; everything time-varying
    goes to timing.json.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: List[Path] = []

    body = {"results": report.results, "provenance": report.provenance}
    report_path = out / "report.json"
    report_path.write_text(json.dumps(body, sort_keys=True, indent=2) + "\n")
    written.append(report_path)

    timing_path = out / "timing.json"
    timing_path.write_text(
        json.dumps({"timing": report.timing}, sort_keys=True, indent=2) + "\n"
    )
    written.append(timing_path)

    results = report.results
    if "chain" in results:
        last = results["chain"]["ladder"][-1]
        comps = last["components"]
        labels = [" ".join(map(str, c)) for c in comps]
        index_of = {}
        for i, c in enumerate(comps):
            for cell in c:
                index_of[cell] = i
        edges: List[Tuple[int, int]] = []
        system_edges = results["system"]["payload"]["edges"]
        for x, y in system_edges:
            a, b = index_of.get(x), index_of.get(y)
            if a is not None and b is not None and a != b:
                edges.append((a, b))
        path = out / "chain_graph.dot"
        path.write_text(_dot_from_parts("chain_components", labels, edges))
        written.append(path)
    if "morse" in results:
        labels = [" ".join(map(str, c)) for c in results["morse"]["components"]]
        edges = [tuple(e) for e in results["morse"]["edges"]]
        path = out / "morse_graph.dot"
        path.write_text(_dot_from_parts("morse", labels, edges))
        written.append(path)
    if "lyapunov" in results:
        path = out / "lyapunov.csv"
        divisions = results["system"]["grid"]["divisions"]
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["cell", "multi_index", "value"])
            for cell, value in enumerate(results["lyapunov"]["values"]):
                multi = []
                rest = cell
                for n in reversed(divisions[1:]):
                    rest, r = divmod(rest, n)
                    multi.append(r)
                multi.append(rest)
                multi.reverse()
                writer.writerow([cell, " ".join(map(str, multi)), value])
        written.append(path)
    return written
