"""
JSON export of graphs, chains, partitions and PSNI results.

Rates are written exactly: every rate becomes ``{"exact": "3/2", "float": 1.5}``
and passive rates ``{"exact": "2*T", "passive": true}``. Check results are
validated against the verdict schema before they are returned.
"""

import json
import logging
from datetime import datetime
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import jsonschema

from core.ctmc import Generator, SteadyState
from core.lumping import Partition
from core.models import ModelEnv, Rate
from core.parser import render_model, render_term
from core.security import AttackVerdict, LowViewReport, PsniVerdict
from core.semantics import DerivationGraph
from utils.constants import CURRENT_JSON_VERSION, VERDICT_SCHEMA_PATH

logger = logging.getLogger(__name__)


def rate_to_json(rate: Optional[Rate]) -> Optional[Dict[str, Any]]:
    if rate is None:
        return None
    if rate.passive:
        return {"exact": str(rate), "passive": True}
    return {"exact": str(rate), "float": float(rate.value)}


def fraction_to_json(value: Fraction) -> Dict[str, Any]:
    return {"exact": str(value), "float": float(value)}


class ResultExporter:
    """Builds JSON documents for every command result."""

    def __init__(self, schema_path: Path = VERDICT_SCHEMA_PATH):
        self.schema_path = Path(schema_path)
        self.schema = self._load_json_schema()

    def model_to_dict(self, env: ModelEnv) -> Dict[str, Any]:
        return {
            "high": sorted(env.high),
            "definitions": {name: render_term(body) for name, body in env.defs.items()},
            "system": render_term(env.system),
            "source": render_model(env),
        }

    def graph_to_dict(self, g: DerivationGraph) -> Dict[str, Any]:
        return {
            "root": g.root,
            "states": [{"id": i, "label": label} for i, label in enumerate(g.labels())],
            "transitions": [
                {
                    "source": t.source,
                    "action": t.action,
                    "rate": rate_to_json(t.rate),
                    "multiplicity": t.multiplicity,
                    "target": t.target,
                }
                for t in g.transitions
            ],
        }

    def generator_to_dict(self, q: Generator, labels: Sequence[str]) -> Dict[str, Any]:
        return {
            "states": list(labels),
            "off_diagonal": [
                {"source": i, "target": j, "rate": fraction_to_json(value)}
                for (i, j), value in sorted(q.off_diag.items())
            ],
            "diagonal": [fraction_to_json(value) for value in q.diag],
        }

    def steady_state_to_dict(self, pi: SteadyState, labels: Sequence[str]) -> Dict[str, Any]:
        return {
            "solver": pi.method,
            "probabilities": [
                {"state": i, "label": label, "probability": p}
                for i, (label, p) in enumerate(zip(labels, pi.probs))
            ],
        }

    def partition_to_dict(self, partition: Partition, labels: Sequence[str],
                          ignored: Sequence[str]) -> Dict[str, Any]:
        return {
            "ignored": sorted(ignored),
            "count": len(partition),
            "blocks": [
                {"states": list(block), "labels": [labels[s] for s in block]}
                for block in partition.blocks
            ],
        }

    def verdict_to_dict(self, verdict: PsniVerdict) -> Dict[str, Any]:
        witness = None
        if verdict.witness is not None:
            witness = {
                "source": verdict.witness.source,
                "target": verdict.witness.target,
                "source_label": verdict.witness.source_label,
                "target_label": verdict.witness.target_label,
                "action": verdict.witness.action,
                "rate": rate_to_json(verdict.witness.rate),
            }
        data = {
            "holds": verdict.holds,
            "method": verdict.method.value,
            "witness": witness,
            "states": verdict.states,
            "blocks": {"count": verdict.partition.blocks, "sizes": list(verdict.partition.sizes)},
            "diagnostics": list(verdict.diagnostics),
            "export_metadata": self._metadata("psni_verdict"),
        }
        if not self._validate_json_schema(data):
            raise ValueError("verdict document does not match the verdict schema")
        return data

    def report_to_dict(self, report: LowViewReport) -> Dict[str, Any]:
        return {
            "hidden": self.steady_state_to_dict(report.hidden, report.hidden_labels),
            "restricted": self.steady_state_to_dict(report.restricted, report.restricted_labels),
            "classes": [
                {
                    "hidden_states": list(c.hidden_states),
                    "restricted_states": list(c.restricted_states),
                    "hidden_probability": c.hidden_probability,
                    "restricted_probability": c.restricted_probability,
                    "agrees": c.agrees,
                }
                for c in report.classes
            ],
            "consistent": report.consistent,
            "export_metadata": self._metadata("low_view_report"),
        }

    def attack_to_dict(self, verdict: AttackVerdict) -> Dict[str, Any]:
        return {
            "holds": verdict.holds,
            "attacker": verdict.attacker,
            "checked": verdict.checked,
            "failing_state": verdict.failing_state,
            "failing_label": verdict.failing_label,
        }

    def validate_verdict(self, data: Dict[str, Any]) -> Tuple[bool, List[str]]:
        """
        Validate a verdict document against the schema.

        Returns:
            Tuple of (is_valid, error_messages)
        """
        if not self.schema:
            return False, ["JSON schema not available"]
        try:
            jsonschema.validate(data, self.schema)
            return True, []
        except jsonschema.ValidationError as e:
            return False, [f"Schema validation error: {e.message}"]
        except jsonschema.SchemaError as e:
            return False, [f"Schema error: {e.message}"]

    def dumps(self, data: Dict[str, Any]) -> str:
        return json.dumps(data, indent=2, ensure_ascii=False, default=self._json_serializer)

    def export_to_file(self, data: Dict[str, Any], output_path: Union[str, Path]) -> bool:
        """
        Write a document to disk.

        Returns:
            True if export successful, False otherwise
        """
        try:
            output_path = Path(output_path)
            with open(output_path, "w", encoding="utf-8") as f:
                f.write(self.dumps(data))
            logger.info(f"Result exported to {output_path}")
            return True
        except OSError as e:
            logger.error(f"Export failed: {e}")
            return False

    def _metadata(self, export_type: str) -> Dict[str, Any]:
        return {
            "export_date": datetime.now().isoformat(),
            "exporter_version": CURRENT_JSON_VERSION,
            "export_type": export_type,
        }

    def _load_json_schema(self) -> Optional[Dict[str, Any]]:
        """Load JSON schema for validation."""
        try:
            if self.schema_path.exists():
                with open(self.schema_path, "r", encoding="utf-8") as f:
                    return json.load(f)
            logger.warning(f"JSON schema not found: {self.schema_path}")
            return None
        except Exception as e:
            logger.error(f"Failed to load JSON schema: {e}")
            return None

    def _validate_json_schema(self, data: Dict[str, Any]) -> bool:
        """Validate data against the verdict schema; a missing schema only warns."""
        if not self.schema:
            logger.warning("No schema available for validation")
            return True
        is_valid, errors = self.validate_verdict(data)
        for error in errors:
            logger.error(error)
        return is_valid

    def _json_serializer(self, obj):
        """Custom JSON serializer for non-standard types."""
        if isinstance(obj, datetime):
            return obj.isoformat()
        if isinstance(obj, Rate):
            return rate_to_json(obj)
        if isinstance(obj, Fraction):
            return fraction_to_json(obj)
        if isinstance(obj, Enum):
            return obj.value
        if isinstance(obj, (set, frozenset)):
            return sorted(obj)
        return str(obj)
