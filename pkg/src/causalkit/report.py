"""Structured results for verification checks.

Every check in the package returns a ``CheckReport`` rather than a bare
boolean, so that a failing run always carries the first violating witness
and enough detail to reproduce it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional


@dataclass(frozen=True)
class Witness:
    """First violation found by a check.

    ``subset`` is a coordinate subset S, ``outcome`` the relevant (projected)
    outcome values, ``event`` a sorted tuple of outcome indices, and
    ``message`` a human-readable account of the disagreement.
    """

    message: str
    subset: Optional[tuple[str, ...]] = None
    outcome: Optional[tuple[int, ...]] = None
    event: Optional[tuple[int, ...]] = None

    def to_dict(self) -> dict:
        return {
            "message": self.message,
            "subset": list(self.subset) if self.subset is not None else None,
            "outcome": list(self.outcome) if self.outcome is not None else None,
            "event": list(self.event) if self.event is not None else None,
        }


@dataclass(frozen=True)
class CheckReport:
    """Outcome of one named check, possibly aggregating sub-checks."""

    check: str
    passed: bool
    witness: Optional[Witness] = None
    details: tuple[str, ...] = ()
    subreports: tuple["CheckReport", ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "check": self.check,
            "passed": self.passed,
            "witness": self.witness.to_dict() if self.witness else None,
            "details": list(self.details),
            "subreports": [r.to_dict() for r in self.subreports],
        }

    def render(self, indent: int = 0) -> str:
        pad = "  " * indent
        mark = "PASS" if self.passed else "FAIL"
        lines = [f"{pad}[{mark}] {self.check}"]
        if self.witness is not None:
            lines.append(f"{pad}  witness: {self.witness.message}")
        for note in self.details:
            lines.append(f"{pad}  note: {note}")
        for sub in self.subreports:
            lines.append(sub.render(indent + 1))
        return "\n".join(lines)


def combine(check: str, reports: list[CheckReport], details: tuple[str, ...] = ()) -> CheckReport:
    """Aggregate sub-reports; the combined witness is the first failing one."""
    passed = all(r.passed for r in reports)
    witness = next((r.witness for r in reports if not r.passed and r.witness), None)
    return CheckReport(
        check=check,
        passed=passed,
        witness=witness,
        details=details,
        subreports=tuple(reports),
    )
