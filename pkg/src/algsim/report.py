"""Canonical JSON reports.

Reports are byte-deterministic: keys sorted, floats rounded to six decimals,
two-space indentation, LF line endings and no timestamps.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from typing import Any

from .cwe import export as export_catalog, lookup
from .harness import ScenarioResult

REPORT_SCHEMA_VERSION = 1
FLOAT_DIGITS = 6


def canonical_json(obj: Any) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True).encode("ascii")


def config_digest(network_doc: Any, policy_doc: Any) -> str:
    """SHA-256 over the canonical forms of both configuration documents."""
    h = hashlib.sha256()
    h.update(canonical_json(network_doc))
    h.update(b"\n")
    h.update(canonical_json(policy_doc))
    return "sha256:" + h.hexdigest()


def _normalize(value: Any) -> Any:
    if isinstance(value, float):
        rounded = round(value, FLOAT_DIGITS)
        return 0.0 if rounded == 0 else rounded
    if isinstance(value, dict):
        return {str(k): _normalize(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_normalize(v) for v in value]
    return value


@dataclass
class Report:
    config_digest: str
    seed: int | None
    results: list[ScenarioResult] = field(default_factory=list)
    expectations: dict[str, str] | None = None
    schema_version: int = REPORT_SCHEMA_VERSION

    def mismatches(self) -> list[str]:
        if not self.expectations:
            return []
        return [r.id for r in self.results if r.id in self.expectations and self.expectations[r.id] != r.verdict.value]

    def to_dict(self) -> dict:
        results = sorted(self.results, key=lambda r: int(r.id[1:]))
        scenario_rows = []
        for r in results:
            row = r.to_dict()
            row["cwe_name"] = lookup(r.cwe).description
            if self.expectations and r.id in self.expectations:
                row["expected"] = self.expectations[r.id]
            scenario_rows.append(row)
        stress = next((r.evidence for r in results if r.id == "S12"), None)
        tagged = sorted({r.cwe for r in results}, key=lambda c: int(c.split("-")[1]))
        return {
            "schema_version": self.schema_version,
            "config_digest": self.config_digest,
            "seed": self.seed,
            "scenarios": scenario_rows,
            "summary": {
                "total": len(results),
                "enforced": sum(r.verdict.value == "Enforced" for r in results),
                "not_enforced": sum(r.verdict.value == "NotEnforced" for r in results),
                "mismatches": self.mismatches(),
            },
            "stress": stress,
            "cwe_catalog": export_catalog(),
            "cwe_tags": tagged,
        }


def write_report(report: Report) -> bytes:
    text = json.dumps(_normalize(report.to_dict()), sort_keys=True, indent=2, ensure_ascii=True)
    return (text + "\n").encode("ascii")


def report_schema() -> dict:
    return json.loads(resources.files("algsim.data").joinpath("report.schema.json").read_text("utf-8"))
