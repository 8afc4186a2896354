"""Verification reports: one record per law, with residuals and counterexamples."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .numeric import Tolerance

PASS, FAIL, SKIP = "pass", "fail", "skip"


@dataclass
class CheckResult:
    name: str
    law: str
    status: str
    cases: int
    max_residual: float
    counterexample: dict | None = None

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "law": self.law,
            "status": self.status,
            "cases": self.cases,
            "max_residual": self.max_residual,
            "counterexample": self.counterexample,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CheckResult":
        return cls(d["name"], d["law"], d["status"], d["cases"], d["max_residual"], d.get("counterexample"))


class Check:
    """Accumulates the cases of a single law.

    Only the first failing case is kept as the counterexample; the residual
    reported is the maximum over every case recorded.
    """

    def __init__(self, name: str, law: str):
        self.name = name
        self.law = law
        self.cases = 0
        self.max_residual = 0.0
        self.failed = False
        self.skipped: str | None = None
        self.counterexample: dict | None = None

    def record(self, ok: bool, residual: float = 0.0, note: str = "", **witness) -> bool:
        self.cases += 1
        if residual == residual:  # NaN never raises the maximum
            self.max_residual = max(self.max_residual, float(residual))
        if not ok and not self.failed:
            self.failed = True
            self.counterexample = {
                "case": self.cases - 1,
                "note": note,
                "morphisms": {k: v.to_dict() for k, v in sorted(witness.items())},
            }
        return ok

    def skip(self, reason: str) -> None:
        self.skipped = reason

    def result(self) -> CheckResult:
        if self.failed:
            status = FAIL
        elif self.skipped is not None or self.cases == 0:
            status = SKIP
        else:
            status = PASS
        cex = self.counterexample
        if status == SKIP and self.skipped:
            cex = None
        return CheckResult(self.name, self.law, status, self.cases, self.max_residual, cex)


@dataclass
class VerificationReport:
    suite: str
    instance: str
    seed: int
    tolerance: Tolerance
    checks: list[CheckResult] = field(default_factory=list)

    def add(self, check: Check | CheckResult) -> CheckResult:
        res = check.result() if isinstance(check, Check) else check
        self.checks.append(res)
        return res

    def extend(self, other: "VerificationReport", prefix: str = "") -> None:
        for c in other.checks:
            self.checks.append(CheckResult(prefix + c.name, c.law, c.status, c.cases, c.max_residual, c.counterexample))

    @property
    def passed(self) -> bool:
        return all(c.status != FAIL for c in self.checks)

    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if c.status == FAIL]

    def get(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    @property
    def max_residual(self) -> float:
        return max((c.max_residual for c in self.checks), default=0.0)

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "instance": self.instance,
            "seed": self.seed,
            "tolerance": {"absolute": self.tolerance.absolute, "relative": self.tolerance.relative},
            "checks": [c.to_dict() for c in self.checks],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "VerificationReport":
        tol = Tolerance(**d["tolerance"])
        return cls(d["suite"], d["instance"], d["seed"], tol, [CheckResult.from_dict(c) for c in d["checks"]])

    def to_markdown(self) -> str:
        lines = [
            f"## {self.suite} ({self.instance}, seed {self.seed})",
            "",
            "| check | law | status | cases | max residual |",
            "|---|---|---|---|---|",
        ]
        for c in self.checks:
            lines.append(f"| {c.name} | {c.law} | {c.status} | {c.cases} | {c.max_residual:.3e} |")
        return "\n".join(lines) + "\n"


def reports_to_json(reports: Iterable[VerificationReport]) -> str:
    doc = {"reports": [r.to_dict() for r in reports]}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def reports_to_markdown(reports: Iterable[VerificationReport]) -> str:
    return "\n".join(r.to_markdown() for r in reports)


def emit_report(reports, fmt: str = "json", path: str | Path | None = None) -> str:
    """Render one report or a list of them; write to ``path`` when given."""
    if isinstance(reports, VerificationReport):
        reports = [reports]
    if fmt == "json":
        text = reports_to_json(reports)
    elif fmt == "md":
        text = reports_to_markdown(reports)
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    if path is not None:
        Path(path).write_text(text)
    return text


def load_reports(text: str) -> list[VerificationReport]:
    return [VerificationReport.from_dict(d) for d in json.loads(text)["reports"]]
