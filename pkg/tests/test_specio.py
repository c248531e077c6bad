"""Spec loading, validation, analysis orchestration, and emission."""
from __future__ import annotations

import copy
import json

import pytest

from gridconley.specio import (
    ANALYSES,
    SCHEMA_VERSION,
    SpecError,
    build_system,
    emit,
    load_spec,
    narrow_spec,
    run,
    spec_from_dict,
)

FIXTURES = "fixtures"

BASE_DOC = {
    "schema": 1,
    "kind": "relation",
    "grid": {"lower": [0.0], "upper": [3.0], "divisions": [3]},
    "payload": {"edges": [[0, 1], [1, 2]]},
    "analysis": {"analyses": ["chain"], "eps_ladder": [0.0]},
}


def doc_with(mutate):
    doc = copy.deepcopy(BASE_DOC)
    mutate(doc)
    return doc


class TestLoadErrors:
    def test_missing_file(self, tmp_path):
        with pytest.raises(SpecError, match="cannot read spec"):
            load_spec(tmp_path / "absent.json")

    def test_syntax_error_reports_position(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{"kind": "relation",}')
        with pytest.raises(SpecError, match="parse error at line 1, column 21"):
            load_spec(path)

    def test_schema_version(self):
        with pytest.raises(SpecError, match="unsupported schema version 9"):
            spec_from_dict(doc_with(lambda d: d.update(schema=9)))

    def test_unknown_kind(self):
        with pytest.raises(SpecError, match="kind must be one of"):
            spec_from_dict(doc_with(lambda d: d.update(kind="flow")))

    def test_edge_out_of_range_names_field(self):
        with pytest.raises(SpecError, match=r"range 0\.\.2 \(field payload\.edges\[0\]\)"):
            spec_from_dict(doc_with(lambda d: d["payload"].update(edges=[[0, 5]])))

    def test_edge_shape(self):
        with pytest.raises(SpecError, match=r"\[source, target\] pair"):
            spec_from_dict(doc_with(lambda d: d["payload"].update(edges=[[0]])))

    def test_ladder_must_decrease(self):
        with pytest.raises(SpecError, match="strictly decreasing"):
            spec_from_dict(
                doc_with(lambda d: d["analysis"].update(eps_ladder=[0.1, 0.2]))
            )

    def test_ladder_must_be_nonnegative(self):
        with pytest.raises(SpecError, match="nonnegative"):
            spec_from_dict(
                doc_with(lambda d: d["analysis"].update(eps_ladder=[-0.5]))
            )

    def test_unknown_analysis(self):
        with pytest.raises(SpecError, match="unknown analysis 'spectra'"):
            spec_from_dict(
                doc_with(lambda d: d["analysis"].update(analyses=["spectra"]))
            )

    def test_conley_needs_region(self):
        with pytest.raises(SpecError, match="'conley' needs a region"):
            spec_from_dict(
                doc_with(lambda d: d["analysis"].update(analyses=["conley"]))
            )

    def test_perturb_needs_eps(self):
        with pytest.raises(SpecError, match="'perturb' needs an eps"):
            spec_from_dict(
                doc_with(
                    lambda d: d["analysis"].update(
                        analyses=["perturb"], region=[0, 1]
                    )
                )
            )

    def test_hybrid_analyses_need_hybrid_kind(self):
        with pytest.raises(SpecError, match="needs a hybrid-kind spec"):
            spec_from_dict(
                doc_with(lambda d: d["analysis"].update(analyses=["paths"]))
            )

    def test_unknown_sampler_lists_known_ones(self):
        with pytest.raises(SpecError, match="unknown sampler id 'lorenz'.*double"):
            spec_from_dict(
                doc_with(
                    lambda d: d.update(
                        kind="sampled_map", payload={"sampler": "lorenz"}
                    )
                )
            )

    def test_semiflow_needs_step_block(self):
        with pytest.raises(SpecError, match=r"missing step block \(field payload\.step\)"):
            spec_from_dict(
                doc_with(lambda d: d.update(kind="semiflow", payload={"delta": 0.5}))
            )


class TestCanonicalForm:
    def test_defaults_resolved(self):
        spec = spec_from_dict(copy.deepcopy(BASE_DOC))
        assert spec.raw["analysis"]["caps"] == {
            "max_length": 3.0,
            "paths": 10000,
            "list": 100,
        }
        assert spec.raw["schema"] == SCHEMA_VERSION

    def test_edges_sorted_and_deduplicated_cells(self):
        doc = doc_with(
            lambda d: d["payload"].update(edges=[[1, 2], [0, 1]])
        )
        spec = spec_from_dict(doc)
        assert spec.raw["payload"]["edges"] == [[0, 1], [1, 2]]

    def test_same_document_same_raw(self):
        a = spec_from_dict(copy.deepcopy(BASE_DOC))
        b = spec_from_dict(copy.deepcopy(BASE_DOC))
        assert a.raw == b.raw

    def test_analyses_reordered_canonically(self):
        doc = doc_with(
            lambda d: d["analysis"].update(analyses=["lyapunov", "chain"])
        )
        spec = spec_from_dict(doc)
        assert spec.analysis.analyses == ("chain", "lyapunov")
        order = [ANALYSES.index(n) for n in spec.analysis.analyses]
        assert order == sorted(order)


class TestNarrowing:
    def test_narrow_to_single_analysis(self):
        spec = load_spec(f"{FIXTURES}/line3.json")
        cut = narrow_spec(spec, ["chain"], eps=0.25)
        assert cut.analysis.analyses == ("chain",)
        assert cut.analysis.eps_ladder == (0.25,)
        assert cut.raw["analysis"]["analyses"] == ["chain"]

    def test_narrow_keeps_ladder_without_eps(self):
        spec = load_spec(f"{FIXTURES}/dbl64.json")
        cut = narrow_spec(spec, ["morse"])
        assert cut.analysis.eps_ladder == spec.analysis.eps_ladder

    def test_narrow_revalidates(self):
        spec = load_spec(f"{FIXTURES}/line3.json")
        with pytest.raises(SpecError, match="'conley' needs a region"):
            narrow_spec(spec, ["conley"])
        with pytest.raises(SpecError, match="hybrid-kind"):
            narrow_spec(spec, ["paths"])


class TestBuild:
    def test_relation_kind(self):
        built = build_system(load_spec(f"{FIXTURES}/line3.json"))
        assert built.relation.rows == (0b010, 0b100, 0)
        assert built.semiflow is None and built.hybrid is None

    def test_sampled_map_kind(self, dbl64):
        built = build_system(load_spec(f"{FIXTURES}/dbl64.json"))
        assert built.relation == dbl64[1]

    def test_semiflow_kind(self, euler32):
        built = build_system(load_spec(f"{FIXTURES}/euler_semiflow.json"))
        assert built.semiflow is not None
        assert built.semiflow.delta == euler32.delta
        assert built.semiflow.steps_per_unit == euler32.steps_per_unit
        assert built.relation == euler32.step

    def test_hybrid_kind(self):
        from gridconley import associated_relation

        built = build_system(load_spec(f"{FIXTURES}/cycler.json"))
        assert built.hybrid is not None
        assert built.relation == associated_relation(built.hybrid)


class TestRunAndEmit:
    def test_line3_report(self):
        spec = load_spec(f"{FIXTURES}/line3.json")
        report = run(spec)
        assert report.ok
        assert sorted(report.results) == [
            "chain",
            "lyapunov",
            "morse",
            "system",
            "viability",
        ]
        assert report.results["viability"]["terminal"] == [2]
        assert report.results["viability"]["annihilation_steps"] == {
            "0": 2,
            "1": 1,
            "2": 0,
        }
        assert report.results["lyapunov"]["verify"]["passed"]
        assert len(report.provenance["config_sha256"]) == 64

    def test_system_section_round_trips(self):
        spec = load_spec(f"{FIXTURES}/line3.json")
        report = run(spec)
        reloaded = build_system(spec_from_dict(report.results["system"]))
        assert reloaded.relation == build_system(spec).relation

    def test_emitted_files(self, tmp_path):
        report = run(load_spec(f"{FIXTURES}/line3.json"))
        files = emit(report, tmp_path)
        assert [f.name for f in files] == [
            "report.json",
            "timing.json",
            "chain_graph.dot",
            "morse_graph.dot",
            "lyapunov.csv",
        ]
        dot = (tmp_path / "morse_graph.dot").read_text()
        assert dot.startswith("digraph morse {") and dot.endswith("}\n")
        rows = (tmp_path / "lyapunov.csv").read_text().splitlines()
        assert rows[0] == "cell,multi_index,value"
        assert len(rows) == 1 + 3

    def test_report_body_is_byte_deterministic(self, tmp_path):
        bodies = []
        for tag in ("a", "b"):
            report = run(load_spec(f"{FIXTURES}/line3.json"))
            out = tmp_path / tag
            emit(report, out)
            bodies.append((out / "report.json").read_bytes())
        assert bodies[0] == bodies[1]
        # timing is allowed to differ, so it lives in its own file
        body = json.loads(bodies[0])
        assert set(body) == {"results", "provenance"}

    def test_cycler_hybrid_run(self):
        spec = load_spec(f"{FIXTURES}/cycler.json")
        report = run(spec)
        assert report.ok
        hyb = report.results["hybrid"]
        assert hyb["sandwich"]
        assert hyb["associated_edges"] == 10
        assert [b["eps"] for b in hyb["chain"]] == [0.5, 0.25]
        assert report.results["paths"]["count"] == 26
        assert not report.results["paths"]["truncated"]

    def test_failed_verification_clears_ok(self, tmp_path):
        doc = doc_with(
            lambda d: (
                d["payload"].update(edges=[[0, 1], [1, 0]]),
                d["analysis"].update(analyses=["conley"], region=[0, 1]),
            )
        )
        report = run(spec_from_dict(doc))
        assert not report.ok
        assert report.results["conley"]["verified"] is False
        assert report.results["conley"]["isolating"] is False
