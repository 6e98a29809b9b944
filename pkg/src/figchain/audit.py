"""Improvement lifecycle records: operations, manifests, verdicts, iterations.

Completion policy: climate scientists are the primary reviewers, so an
iteration is complete only when every operation has at least one
climate-role approval and no standing climate-role rejection.
Visualization-role verdicts are advisory.
"""
from __future__ import annotations

import json
import os
import re
import tempfile
from dataclasses import dataclass, field
from datetime import datetime, timezone

from .assessment import Score
from .conventions import CommitMessage, parse_branch_name, parse_commit_message
from .diffing import ChangeKind, ElementChange
from .errors import (
    FigchainError,
    InvalidTransition,
    ManifestIncomplete,
    UnknownOperation,
)
from .linting import LintFinding
from .taxonomy import Role, parse_role_token

REVIEWER_ROLES = ("climate", "visualization")
DECISIONS = ("approve", "reject")
ITERATION_STATUSES = ("draft", "submitted", "needs-revision", "complete")

_OP_ID_RE = re.compile(r"^Op([1-9]\d*)$")


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass
class Operation:
    id: str  # "Op1", "Op2", ...
    commit_ref: str
    message: CommitMessage
    changes: list[ElementChange] = field(default_factory=list)
    findings: list[LintFinding] = field(default_factory=list)
    before_svg: str = ""
    after_svg: str = ""

    @property
    def number(self) -> int:
        m = _OP_ID_RE.match(self.id)
        if m is None:
            raise FigchainError(f"operation id must look like 'OpN', got {self.id!r}")
        return int(m.group(1))

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "commit_ref": self.commit_ref,
            "message": self.message.serialize(),
            "changes": [c.to_json() for c in self.changes],
            "findings": [f.to_json() for f in self.findings],
            "before_svg": self.before_svg,
            "after_svg": self.after_svg,
        }


@dataclass
class ImprovementManifest:
    figure_info: dict
    author_info: dict
    operations: list[Operation]
    assessment_info: dict

    def validate(self) -> None:
        for key in ("figure_number", "iteration_version", "creation_time"):
            if not self.figure_info.get(key):
                raise ManifestIncomplete("figure_info", f"figure_info.{key} is missing")
        parse_branch_name(self.figure_info["iteration_version"])
        for key in ("name", "email"):
            if not self.author_info.get(key):
                raise ManifestIncomplete("author_info", f"author_info.{key} is missing")
        if not self.operations:
            raise ManifestIncomplete("operations", "at least one operation is required")
        numbers = [op.number for op in self.operations]
        if numbers != list(range(1, len(numbers) + 1)):
            raise ManifestIncomplete(
                "operations", f"operation ids must be dense Op1..OpN, got {numbers}"
            )
        for key in ("questions", "responses_ref", "final_score", "scoring_method"):
            if key not in self.assessment_info:
                raise ManifestIncomplete(
                    "assessment_info", f"assessment_info.{key} is missing"
                )

    def to_json(self) -> dict:
        return {
            "figure_info": self.figure_info,
            "author_info": self.author_info,
            "operations": [op.to_json() for op in self.operations],
            "assessment_info": self.assessment_info,
        }

    @classmethod
    def from_json(cls, data: dict) -> "ImprovementManifest":
        ops = []
        for raw in data.get("operations", []):
            ops.append(
                Operation(
                    id=raw["id"],
                    commit_ref=raw.get("commit_ref", ""),
                    message=parse_commit_message(raw["message"]),
                    changes=[_change_from_json(c) for c in raw.get("changes", [])],
                    findings=[LintFinding(**f) for f in raw.get("findings", [])],
                    before_svg=raw.get("before_svg", ""),
                    after_svg=raw.get("after_svg", ""),
                )
            )
        return cls(
            figure_info=data.get("figure_info", {}),
            author_info=data.get("author_info", {}),
            operations=ops,
            assessment_info=data.get("assessment_info", {}),
        )


def _change_from_json(c: dict) -> ElementChange:
    return ElementChange(
        kind=ChangeKind(c["kind"]),
        role=parse_role_token(c["role"]),
        old_ref=c.get("old_ref"),
        new_ref=c.get("new_ref"),
        facets=frozenset(c.get("facets", [])),
        detail={k: (v[0], v[1]) for k, v in c.get("detail", {}).items()},
    )


@dataclass(frozen=True)
class Verdict:
    operation_id: str
    decision: str
    reviewer_name: str
    reviewer_role: str
    comment: str = ""
    timestamp: str = ""

    def __post_init__(self):
        if self.decision not in DECISIONS:
            raise FigchainError(f"verdict decision must be approve/reject, got {self.decision!r}")
        if self.reviewer_role not in REVIEWER_ROLES:
            raise FigchainError(
                f"reviewer role must be climate/visualization, got {self.reviewer_role!r}"
            )
        if self.decision == "reject" and not self.comment.strip():
            raise FigchainError("a rejection requires a nonempty comment")

    @property
    def key(self) -> tuple[str, str, str]:
        return (self.operation_id, self.reviewer_name, self.reviewer_role)

    def to_json(self) -> dict:
        return {
            "operation_id": self.operation_id,
            "decision": self.decision,
            "reviewer": {"name": self.reviewer_name, "role": self.reviewer_role},
            "comment": self.comment,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_json(cls, data: dict) -> "Verdict":
        reviewer = data.get("reviewer", {})
        return cls(
            operation_id=data["operation_id"],
            decision=data["decision"],
            reviewer_name=reviewer.get("name", ""),
            reviewer_role=reviewer.get("role", ""),
            comment=data.get("comment", ""),
            timestamp=data.get("timestamp", ""),
        )


def merge_verdicts(existing: list[Verdict], incoming: list[Verdict]) -> list[Verdict]:
    """At most one verdict per (operation, reviewer); resubmission of the
    identical verdict is a no-op, a changed one replaces (latest timestamp wins)."""
    merged: dict[tuple, Verdict] = {v.key: v for v in existing}
    for v in incoming:
        held = merged.get(v.key)
        if held is None or held == v:
            merged[v.key] = v
        elif v.timestamp >= held.timestamp:
            merged[v.key] = v
    return sorted(merged.values(), key=lambda v: (v.operation_id, v.reviewer_name, v.reviewer_role))


@dataclass
class IterationDecision:
    status: str  # "complete" | "needs-revision"
    reasons: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"status": self.status, "reasons": self.reasons}


def decide_iteration(manifest: ImprovementManifest, verdicts: list[Verdict]) -> IterationDecision:
    known = {op.id for op in manifest.operations}
    for v in verdicts:
        if v.operation_id not in known:
            raise UnknownOperation(f"verdict references unknown operation {v.operation_id!r}")
    reasons: list[str] = []
    for op in manifest.operations:
        climate = [v for v in verdicts if v.operation_id == op.id and v.reviewer_role == "climate"]
        rejects = [v for v in climate if v.decision == "reject"]
        approves = [v for v in climate if v.decision == "approve"]
        if rejects:
            reasons.append(f"{op.id}: rejected by {rejects[0].reviewer_name or 'a climate reviewer'}")
        elif not approves:
            reasons.append(f"{op.id}: missing climate approval")
    if reasons:
        return IterationDecision(status="needs-revision", reasons=reasons)
    return IterationDecision(status="complete")


@dataclass
class IterationRecord:
    branch_name: str
    score: "Score | float | None" = None  # assessment.Score or a bare value
    status: str = "draft"

    _TRANSITIONS = {
        "draft": ("submitted",),
        "submitted": ("needs-revision", "complete"),
        "needs-revision": ("submitted",),
        "complete": (),
    }

    def __post_init__(self):
        parse_branch_name(self.branch_name)
        if self.status not in ITERATION_STATUSES:
            raise InvalidTransition(f"unknown status {self.status!r}")

    def advance(self, new_status: str) -> "IterationRecord":
        if new_status not in self._TRANSITIONS.get(self.status, ()):
            raise InvalidTransition(f"cannot go from {self.status!r} to {new_status!r}")
        return IterationRecord(branch_name=self.branch_name, score=self.score, status=new_status)


def write_json_atomic(path, payload) -> None:
    """Single-writer file update: write a temp file, then atomically replace."""
    directory = os.path.dirname(os.fspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
