"""Reviewer bundle assembly and loading.

Layout::

    <bundle>/manifest.json
    <bundle>/figure.map
    <bundle>/op1/before.svg
    <bundle>/op1/after.svg
    <bundle>/op1/diff.json
    ...
    <bundle>/verdicts.json         (written later by verdict merging)

The bundle is self-contained: diff.json is recomputed from the bundled
SVG pair, so re-running the diff on a bundle reproduces it byte for byte.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .audit import ImprovementManifest, Operation, write_json_atomic
from .diffing import ElementChange, diff
from .errors import ManifestIncomplete, MissingArtifact, NoMarks
from .fidelity import check_data_fidelity
from .figmap import FigureMap, parse_figure_map, serialize_figure_map
from .linting import LintFinding, lint_operation
from .svgdoc import parse_figure


@dataclass
class OperationArtifacts:
    before_svg: bytes
    after_svg: bytes
    declared: tuple[str, ...] = ()


@dataclass
class DiffAnalysis:
    changes: list[ElementChange]
    fidelity: dict
    findings: list[LintFinding]

    def to_json(self) -> dict:
        return {
            "changes": [c.to_json() for c in self.changes],
            "fidelity": self.fidelity,
            "findings": [f.to_json() for f in self.findings],
        }


def analyze_pair(
    old_bytes: bytes,
    new_bytes: bytes,
    figure_map: FigureMap,
    message: str | None = None,
    declared=(),
    location: str = "commit",
) -> DiffAnalysis:
    old = parse_figure(old_bytes)
    new = parse_figure(new_bytes)
    changes = diff(old, new, figure_map)
    try:
        fidelity = check_data_fidelity(old, new, figure_map, declared).to_json()
    except NoMarks as exc:
        fidelity = {
            "status": "no-marks",
            "mark_changes": [],
            "fitted_transform": None,
            "residual": 0.0,
            "declared_transforms": [],
            "note": str(exc),
        }
    findings = (
        lint_operation(message, old, new, figure_map, declared, location)
        if message is not None
        else []
    )
    return DiffAnalysis(changes=changes, fidelity=fidelity, findings=findings)


def build_diff_document(
    old_bytes: bytes,
    new_bytes: bytes,
    figure_map: FigureMap,
    message: str | None = None,
    declared=(),
    location: str = "commit",
) -> dict:
    """The JSON diff document consumed by the reviewer UI and audit trail."""
    return analyze_pair(old_bytes, new_bytes, figure_map, message, declared, location).to_json()


def dump_diff_document(document: dict) -> bytes:
    return (json.dumps(document, indent=2) + "\n").encode("utf-8")


def assemble_bundle(
    manifest: ImprovementManifest,
    artifacts: dict[str, OperationArtifacts],
    figure_map: FigureMap,
    out_dir,
) -> Path:
    """Write a self-contained reviewer bundle; returns its directory."""
    manifest.validate()
    for op in manifest.operations:
        if op.id not in artifacts:
            raise MissingArtifact(f"no before/after SVGs for {op.id}")

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    previous_after: bytes | None = None
    enriched_ops: list[Operation] = []
    for op in manifest.operations:
        art = artifacts[op.id]
        if previous_after is not None and art.before_svg != previous_after:
            raise ManifestIncomplete(
                "operations",
                f"{op.id} before-SVG differs from the previous operation's after-SVG",
            )
        previous_after = art.after_svg

        analysis = analyze_pair(
            art.before_svg,
            art.after_svg,
            figure_map,
            message=op.message.serialize(),
            declared=art.declared,
            location=op.commit_ref or op.id,
        )
        op_dir = out / op.id.lower()
        op_dir.mkdir(exist_ok=True)
        (op_dir / "before.svg").write_bytes(art.before_svg)
        (op_dir / "after.svg").write_bytes(art.after_svg)
        (op_dir / "diff.json").write_bytes(dump_diff_document(analysis.to_json()))

        enriched_ops.append(
            Operation(
                id=op.id,
                commit_ref=op.commit_ref,
                message=op.message,
                changes=analysis.changes,
                findings=analysis.findings,
                before_svg=f"{op.id.lower()}/before.svg",
                after_svg=f"{op.id.lower()}/after.svg",
            )
        )

    enriched = ImprovementManifest(
        figure_info=manifest.figure_info,
        author_info=manifest.author_info,
        operations=enriched_ops,
        assessment_info=manifest.assessment_info,
    )
    (out / "figure.map").write_text(serialize_figure_map(figure_map), encoding="utf-8")
    write_json_atomic(out / "manifest.json", enriched.to_json())
    return out


def load_bundle(bundle_dir) -> tuple[ImprovementManifest, FigureMap]:
    bundle = Path(bundle_dir)
    manifest_path = bundle / "manifest.json"
    if not manifest_path.exists():
        raise ManifestIncomplete("figure_info", f"no manifest.json under {bundle}")
    manifest = ImprovementManifest.from_json(json.loads(manifest_path.read_text()))
    manifest.validate()
    for op in manifest.operations:
        for ref in (op.before_svg, op.after_svg):
            if not (bundle / ref).exists():
                raise MissingArtifact(f"{op.id}: bundle is missing {ref}")
    figure_map = parse_figure_map((bundle / "figure.map").read_text())
    return manifest, figure_map
