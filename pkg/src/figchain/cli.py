"""figchain: audit-friendly figure improvement pipeline.

Structured output goes to stdout as JSON; human-oriented notes go to
stderr. Exit codes: 0 success, 1 lint/validation findings of severity
error, 2 input or usage error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import warnings
from pathlib import Path

from . import __version__
from .assessment import (
    ingest_responses,
    load_question_bank,
    lo_accuracy_table,
    score,
    version_order,
)
from .audit import (
    ImprovementManifest,
    Operation,
    Verdict,
    decide_iteration,
    merge_verdicts,
    utc_now,
    write_json_atomic,
)
from .bundle import OperationArtifacts, assemble_bundle, build_diff_document, load_bundle
from .conventions import parse_commit_message
from .errors import FigchainError
from .figmap import classify_elements, parse_figure_map
from .glmm import FitOptions, dataset_from_records, fit, report
from .svgdoc import load_figure


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            code = args.handler(args)
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
        return code
    except FigchainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="figchain", description=__doc__)
    parser.add_argument("--version", action="version", version=f"figchain {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="assign taxonomy roles to every element")
    p.add_argument("svg", type=Path)
    p.add_argument("--map", dest="figure_map", type=Path, required=True)
    p.set_defaults(handler=_cmd_classify)

    p = sub.add_parser("diff", help="structural diff between two figure versions")
    p.add_argument("old", type=Path)
    p.add_argument("new", type=Path)
    p.add_argument("--map", dest="figure_map", type=Path, required=True)
    p.add_argument("--declare", action="append", default=[], metavar="TRANSFORM")
    p.set_defaults(handler=_cmd_diff)

    p = sub.add_parser("lint", help="check one operation against the review criteria")
    p.add_argument("old", type=Path)
    p.add_argument("new", type=Path)
    p.add_argument("--map", dest="figure_map", type=Path, required=True)
    p.add_argument("--message", required=True)
    p.add_argument("--declare", action="append", default=[], metavar="TRANSFORM")
    p.set_defaults(handler=_cmd_lint)

    p = sub.add_parser("bundle", help="assemble a reviewer bundle from a project config")
    p.add_argument("config", type=Path)
    p.set_defaults(handler=_cmd_bundle)

    p = sub.add_parser("score", help="score a response CSV with the default rule")
    p.add_argument("responses", type=Path)
    p.add_argument("--bank", type=Path, required=True)
    p.set_defaults(handler=_cmd_score)

    p = sub.add_parser("lo-table", help="accuracy per learning-objective group and version")
    p.add_argument("responses", type=Path)
    p.add_argument("--bank", type=Path, required=True)
    p.set_defaults(handler=_cmd_lo_table)

    p = sub.add_parser("compare", help="fit the version-comparison mixed model")
    p.add_argument("responses", type=Path)
    p.add_argument("--bank", type=Path, required=True)
    p.add_argument("--pretest", type=Path, default=None,
                   help="CSV participant_id,score overriding computed pre-test totals")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--max-iter", type=int, default=2000)
    p.add_argument("--tol", type=float, default=1e-6)
    p.set_defaults(handler=_cmd_compare)

    p = sub.add_parser("verdicts", help="reviewer verdict utilities")
    vsub = p.add_subparsers(dest="verdicts_command", required=True)
    m = vsub.add_parser("merge", help="merge a verdicts file into a bundle and decide")
    m.add_argument("verdicts", type=Path)
    m.add_argument("--bundle", type=Path, required=True)
    m.set_defaults(handler=_cmd_verdicts_merge)

    return parser


def _emit(payload, note: str | None = None) -> None:
    print(json.dumps(payload, indent=2))
    if note:
        print(note, file=sys.stderr)


def _read_map(path: Path):
    return parse_figure_map(path.read_text(encoding="utf-8"))


def _cmd_classify(args) -> int:
    doc = load_figure(args.svg)
    figure_map = _read_map(args.figure_map)
    assignment = [
        {"path": path, "role": role.token}
        for path, role in classify_elements(doc, figure_map)
    ]
    _emit(assignment, f"{len(assignment)} element(s) classified")
    return 0


def _cmd_diff(args) -> int:
    figure_map = _read_map(args.figure_map)
    document = build_diff_document(
        args.old.read_bytes(), args.new.read_bytes(), figure_map,
        declared=args.declare,
    )
    _emit(document, f"{len(document['changes'])} change(s)")
    return 0


def _cmd_lint(args) -> int:
    figure_map = _read_map(args.figure_map)
    document = build_diff_document(
        args.old.read_bytes(), args.new.read_bytes(), figure_map,
        message=args.message, declared=args.declare,
    )
    findings = document["findings"]
    errors = [f for f in findings if f["severity"] == "error"]
    _emit(document, f"{len(findings)} finding(s), {len(errors)} error(s)")
    return 1 if errors else 0


def _cmd_bundle(args) -> int:
    config_dir = args.config.parent
    config = json.loads(args.config.read_text(encoding="utf-8"))

    def resolve(name: str, required: bool = True) -> Path | None:
        raw = config.get(name)
        if raw is None:
            if required:
                raise FigchainError(f"config is missing {name!r}")
            return None
        path = config_dir / raw
        if not path.exists():
            raise FigchainError(f"config path {name}={raw!r} does not exist")
        return path

    figure_map = _read_map(resolve("figure_map_path"))
    bank_path = resolve("question_bank_path")
    bank = load_question_bank(bank_path.read_bytes())
    responses_path = resolve("responses_csv")
    records = ingest_responses(responses_path.read_bytes(), bank)

    latest = max({r.version_tag for r in records}, key=version_order)
    final = score([r for r in records if r.version_tag == latest])

    operations = []
    artifacts = {}
    for op_cfg in config.get("operations", []):
        before = config_dir / op_cfg["before_svg"]
        after = config_dir / op_cfg["after_svg"]
        for path in (before, after):
            if not path.exists():
                raise FigchainError(f"operation artifact {path} does not exist")
        op = Operation(
            id=op_cfg["id"],
            commit_ref=op_cfg.get("commit_ref", op_cfg["id"].lower()),
            message=parse_commit_message(op_cfg["message"]),
        )
        operations.append(op)
        artifacts[op.id] = OperationArtifacts(
            before_svg=before.read_bytes(),
            after_svg=after.read_bytes(),
            declared=tuple(op_cfg.get("declare", [])),
        )

    manifest = ImprovementManifest(
        figure_info={
            "figure_number": config.get("figure_number", ""),
            "iteration_version": config.get("iteration_version", ""),
            "creation_time": utc_now(),
        },
        author_info=config.get("author", {}),
        operations=operations,
        assessment_info={
            "questions": str(bank_path),
            "responses_ref": str(responses_path),
            "final_score": {
                "value": final.value,
                "rule_name": final.rule_name,
                "n_records": final.n_records,
            },
            "scoring_method": config.get("scoring_method", final.rule_name),
        },
    )
    bundle_dir = config_dir / config.get("bundle_dir", "bundle")
    out = assemble_bundle(manifest, artifacts, figure_map, bundle_dir)
    enriched, _ = load_bundle(out)
    error_count = sum(
        1
        for op in enriched.operations
        for finding in op.findings
        if finding.severity == "error"
    )
    _emit(
        {"bundle_dir": str(out), "operations": len(operations), "lint_errors": error_count},
        f"bundle written to {out}",
    )
    return 1 if error_count else 0


def _cmd_score(args) -> int:
    bank = load_question_bank(args.bank.read_bytes())
    records = ingest_responses(args.responses.read_bytes(), bank)
    result = score(records)
    _emit(
        {"value": result.value, "rule_name": result.rule_name, "n_records": result.n_records},
        f"score {result.value:.4f} over {result.n_records} formal response(s)",
    )
    return 0


def _cmd_lo_table(args) -> int:
    bank = load_question_bank(args.bank.read_bytes())
    records = ingest_responses(args.responses.read_bytes(), bank)
    table = lo_accuracy_table(records, bank)
    improved = sum(1 for g in table["groups"] if g["improved"])
    _emit(table, f"{len(table['groups'])} group(s), {improved} improved")
    return 0


def _read_pretest_csv(path: Path) -> dict[str, float]:
    import csv as _csv

    scores: dict[str, float] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = _csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["participant_id", "score"]:
            raise FigchainError("pretest CSV header must be participant_id,score")
        for row in reader:
            if len(row) >= 2 and row[0].strip():
                scores[row[0].strip()] = float(row[1])
    return scores


def _cmd_compare(args) -> int:
    bank = load_question_bank(args.bank.read_bytes())
    records = ingest_responses(args.responses.read_bytes(), bank)
    pretest = _read_pretest_csv(args.pretest) if args.pretest else None
    dataset = dataset_from_records(records, pretest_scores=pretest)
    seed = args.seed
    if seed is None:
        seed = int(os.environ.get("FIGCHAIN_SEED", "0"))
    options = FitOptions(seed=seed, max_iter=args.max_iter, tol=args.tol)
    result = fit(dataset, options)
    summary = report(result)
    _emit(
        summary.to_json(),
        f"loglik {summary.loglik:.3f}, baseline {summary.baseline_probability:.3f} "
        f"-> version {summary.version_probability:.3f}",
    )
    return 0


def _cmd_verdicts_merge(args) -> int:
    manifest, _ = load_bundle(args.bundle)
    incoming_raw = json.loads(args.verdicts.read_text(encoding="utf-8"))
    if not isinstance(incoming_raw, list):
        raise FigchainError("verdicts file must be a JSON list")
    incoming = [Verdict.from_json(v) for v in incoming_raw]

    store = Path(args.bundle) / "verdicts.json"
    existing = (
        [Verdict.from_json(v) for v in json.loads(store.read_text(encoding="utf-8"))]
        if store.exists()
        else []
    )
    merged = merge_verdicts(existing, incoming)
    decision = decide_iteration(manifest, merged)
    write_json_atomic(store, [v.to_json() for v in merged])
    _emit(
        {"merged": len(merged), "decision": decision.to_json()},
        f"{len(merged)} verdict(s) on file; iteration {decision.status}",
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
