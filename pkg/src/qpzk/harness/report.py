"""Aggregation of experiment records into a summary with exit semantics."""

from __future__ import annotations

from dataclasses import dataclass

from qpzk.harness.records import ExperimentRecord


@dataclass
class ReportSummary:
    total_rows: int
    passed: int
    failed: int
    vacuous: int
    not_applicable: int
    failing_sources: list[str]
    lines: list[str]

    @property
    def exit_code(self) -> int:
        return 1 if self.failed else 0


def report(records: list[ExperimentRecord]) -> ReportSummary:
    """Per-source PASS/FAIL tally; any FAIL makes the whole report fail."""
    if not records:
        raise ValueError("report needs at least one record")
    counts = {"PASS": 0, "FAIL": 0, "VACUOUS": 0, "NOT-APPLICABLE": 0}
    by_source: dict[str, list[str]] = {}
    failing: list[str] = []
    lines: list[str] = []
    for rec in records:
        kind = rec.config_echo.get("kind", "?")
        for row in rec.rows:
            counts[row.verdict] += 1
            by_source.setdefault(row.source, []).append(row.verdict)
            marker = {"PASS": "ok", "FAIL": "FAIL", "VACUOUS": "vacuous",
                      "NOT-APPLICABLE": "n/a"}[row.verdict]
            lines.append(f"{kind:12s} {row.name:48s} {marker:8s} [{row.source}]")
            if row.verdict == "FAIL":
                failing.append(f"{row.source}::{row.name}")
    lines.append("")
    lines.append(
        f"rows: {sum(counts.values())}  pass: {counts['PASS']}  "
        f"fail: {counts['FAIL']}  vacuous: {counts['VACUOUS']}  "
        f"n/a: {counts['NOT-APPLICABLE']}")
    if counts["VACUOUS"]:
        lines.append(f"warning: {counts['VACUOUS']} vacuous bound(s) were "
                     "checked but carry no information")
    return ReportSummary(
        total_rows=sum(counts.values()),
        passed=counts["PASS"],
        failed=counts["FAIL"],
        vacuous=counts["VACUOUS"],
        not_applicable=counts["NOT-APPLICABLE"],
        failing_sources=failing,
        lines=lines,
    )
