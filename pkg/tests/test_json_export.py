"""
Tests for JSON export functionality.
"""

import json
from fractions import Fraction

import pytest

from core.ctmc import build_generator, steady_state
from core.json_export import ResultExporter, fraction_to_json, rate_to_json
from core.lumping import coarsest_lumpable_partition
from core.models import Rate
from core.security import check_psni, low_view_report


class TestRateEncoding:
    """Test exact rate encoding."""

    def test_finite(self):
        """Finite rates carry exact and float forms."""
        assert rate_to_json(Rate.finite("3/2")) == {"exact": "3/2", "float": 1.5}

    def test_passive(self):
        """Passive rates are flagged."""
        assert rate_to_json(Rate.top(2)) == {"exact": "2*T", "passive": True}

    def test_none_and_fraction(self):
        """Absent rates and plain fractions serialise."""
        assert rate_to_json(None) is None
        assert fraction_to_json(Fraction(-2)) == {"exact": "-2", "float": -2.0}


class TestResultExporter:
    """Test documents produced for each command result."""

    @pytest.fixture
    def exporter(self):
        return ResultExporter()

    def test_verdict_document(self, exporter, fig2_env):
        """A holding verdict has no witness."""
        data = exporter.verdict_to_dict(check_psni(fig2_env))
        assert data["holds"] is True
        assert data["method"] == "both"
        assert data["witness"] is None
        assert data["states"] == 3
        assert data["blocks"] == {"count": 2, "sizes": [1, 1]}
        assert data["export_metadata"]["export_type"] == "psni_verdict"
        assert exporter.validate_verdict(data) == (True, [])

    def test_failing_verdict_has_witness(self, exporter, fig1_env):
        """A failing verdict names its witness transition."""
        data = exporter.verdict_to_dict(check_psni(fig1_env))
        witness = data["witness"]
        assert (witness["source"], witness["action"], witness["target"]) == (0, "h", 1)
        assert witness["rate"] == {"exact": "1", "float": 1.0}

    def test_schema_rejects_bad_documents(self, exporter):
        """Schema violations are reported."""
        is_valid, errors = exporter.validate_verdict({"holds": "yes"})
        assert not is_valid
        assert errors[0].startswith("Schema validation error")

    def test_graph_document(self, exporter, fig2_graph):
        """Graph documents list states and transitions."""
        data = exporter.graph_to_dict(fig2_graph)
        assert data["root"] == 0
        assert [s["label"] for s in data["states"]] == ["P1", "P2", "P3"]
        assert data["transitions"][0] == {
            "source": 0, "action": "h", "rate": {"exact": "1", "float": 1.0},
            "multiplicity": 1, "target": 1,
        }

    def test_generator_and_steady_documents(self, exporter, fig2_graph):
        """Generator and steady-state documents are exact."""
        q = build_generator(fig2_graph)
        data = exporter.generator_to_dict(q, fig2_graph.labels())
        assert data["diagonal"][0] == {"exact": "-2", "float": -2.0}
        assert len(data["off_diagonal"]) == 4
        steady = exporter.steady_state_to_dict(steady_state(q), fig2_graph.labels())
        assert steady["solver"] == "dense"
        assert steady["probabilities"][2]["probability"] == pytest.approx(1 / 3)

    def test_partition_document(self, exporter, fig2_graph):
        """Partition documents sort the ignored actions."""
        partition = coarsest_lumpable_partition(fig2_graph, {"h"})
        data = exporter.partition_to_dict(partition, fig2_graph.labels(), ["tau", "h"])
        assert data["ignored"] == ["h", "tau"]
        assert data["count"] == 2
        assert data["blocks"][0] == {"states": [0, 1], "labels": ["P1", "P2"]}

    def test_report_document(self, exporter, fig2_env):
        """Report documents list per-class agreement."""
        data = exporter.report_to_dict(low_view_report(fig2_env))
        assert data["consistent"] is True
        assert all(c["agrees"] for c in data["classes"])

    def test_model_document(self, exporter, fig1_env):
        """Model documents render every definition."""
        data = exporter.model_to_dict(fig1_env)
        assert data["high"] == ["h"]
        assert data["system"] == "P / {i}"
        assert data["definitions"]["Pp"] == "(l, 1).P"

    def test_export_to_file(self, exporter, fig2_env, tmp_path):
        """Documents can be written to disk."""
        data = exporter.verdict_to_dict(check_psni(fig2_env))
        path = tmp_path / "verdict.json"
        assert exporter.export_to_file(data, path)
        assert json.loads(path.read_text(encoding="utf-8"))["holds"] is True
        assert not exporter.export_to_file(data, tmp_path / "missing" / "verdict.json")

    def test_missing_schema_only_warns(self, fig2_env, tmp_path):
        """A missing schema disables validation only."""
        exporter = ResultExporter(tmp_path / "absent.json")
        assert exporter.schema is None
        assert exporter.verdict_to_dict(check_psni(fig2_env))["holds"] is True
        assert exporter.validate_verdict({}) == (False, ["JSON schema not available"])
