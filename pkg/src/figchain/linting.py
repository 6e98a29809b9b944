"""Machine-checkable review criteria for a single documented operation.

An empty finding list means the machine checks hold; human review of
intent is still required. Rules:

C2-MSG-FORMAT        commit message violates the [class: description] grammar
C2-SINGLE-ASPECT     the diff spans more than one taxonomy class
C2-UNDOCUMENTED-CHANGE  declared class differs from the computed one
C1-DATA              marks geometry changed and the fidelity check did not pass
"""
from __future__ import annotations

from dataclasses import dataclass

from .conventions import parse_commit_message
from .diffing import ChangeKind, ElementChange, classify_operation, diff
from .errors import MixedAspect, MsgFormat, UnknownClass
from .fidelity import FidelityReport, FidelityStatus, check_data_fidelity, parse_declarations
from .figmap import FigureMap
from .svgdoc import FigureDocument

RULES = ("C1-DATA", "C2-SINGLE-ASPECT", "C2-MSG-FORMAT", "C2-UNDOCUMENTED-CHANGE")


@dataclass(frozen=True)
class LintFinding:
    rule: str
    severity: str  # "error" | "warning"
    message: str
    location: str

    def __post_init__(self):
        assert self.rule in RULES and self.severity in ("error", "warning")

    def to_json(self) -> dict:
        return {
            "rule": self.rule,
            "severity": self.severity,
            "message": self.message,
            "location": self.location,
        }


def lint_operation(
    message,
    old: FigureDocument,
    new: FigureDocument,
    figure_map: FigureMap,
    declared=(),
    location: str = "commit",
) -> list[LintFinding]:
    """Lint one operation; message is the commit text or an audit Operation."""
    if not isinstance(message, str):
        operation = message
        message = operation.message.serialize()
        if location == "commit":
            location = operation.commit_ref or operation.id
    findings: list[LintFinding] = []

    declared_token: str | None = None
    try:
        declared_token = parse_commit_message(message).class_token
    except (MsgFormat, UnknownClass) as exc:
        findings.append(
            LintFinding("C2-MSG-FORMAT", "error", str(exc), location)
        )

    changes = diff(old, new, figure_map)
    computed_token: str | None = None
    if not changes:
        if declared_token is not None:
            findings.append(
                LintFinding(
                    "C2-UNDOCUMENTED-CHANGE",
                    "warning",
                    f"message declares {declared_token!r} but the diff is empty",
                    location,
                )
            )
    else:
        try:
            computed_token = classify_operation(changes)
        except MixedAspect as exc:
            findings.append(
                LintFinding(
                    "C2-SINGLE-ASPECT",
                    "error",
                    f"operation must focus on one aspect; found {{{', '.join(exc.tokens)}}}",
                    location,
                )
            )
        if declared_token is not None:
            if computed_token is not None and computed_token != declared_token:
                findings.append(
                    LintFinding(
                        "C2-UNDOCUMENTED-CHANGE",
                        "error",
                        f"message declares {declared_token!r} but the diff is {computed_token!r}",
                        location,
                    )
                )
            elif computed_token is None:
                extra = sorted({c.role.token for c in changes} - {declared_token})
                if extra:
                    findings.append(
                        LintFinding(
                            "C2-UNDOCUMENTED-CHANGE",
                            "error",
                            f"diff touches undeclared aspect(s): {', '.join(extra)}",
                            location,
                        )
                    )

    _recognized, unrecognized = parse_declarations(declared)
    for decl in unrecognized:
        findings.append(
            LintFinding(
                "C1-DATA",
                "warning",
                f"declared transform {decl!r} is not recognized and cannot justify changes",
                location,
            )
        )

    if _touches_marks_geometry(changes):
        report = check_data_fidelity(old, new, figure_map, declared)
        if report.status is not FidelityStatus.PASS:
            findings.append(_c1_finding(report, location))
    return findings


def _touches_marks_geometry(changes: list[ElementChange]) -> bool:
    return any(
        c.role.first_level == "marks"
        and (c.kind is not ChangeKind.MODIFY or "geometry" in c.facets)
        for c in changes
    )


def _c1_finding(report: FidelityReport, location: str) -> LintFinding:
    offenders = ", ".join(
        (c.old_ref or c.new_ref or "?") for c in report.mark_changes[:5]
    )
    if report.status is FidelityStatus.NEEDS_DECLARED_TRANSFORM:
        text = (
            "mark geometry is explainable only by an undeclared transform "
            f"(residual {report.residual:.6g}); declare it explicitly"
        )
    else:
        text = (
            f"mark geometry deviates beyond tolerance (residual {report.residual:.6g}) "
            f"at: {offenders}"
        )
    loc = report.mark_changes[0].old_ref if report.mark_changes else None
    return LintFinding("C1-DATA", "error", text, loc or location)
