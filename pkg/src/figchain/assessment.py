"""Learning objectives, questions, responses, and scoring.

Questions carry three substantive choices; the fourth choice "I don't
know" is fixed, always offered, and never correct. Responses are
binary-coded: 1 for the correct choice, 0 for everything else including
"I don't know". Correctness is always recomputed from the question
bank, never trusted from input files.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import re
import warnings
from dataclasses import dataclass, replace

from .errors import (
    ChoiceOutOfRange,
    CorrectRecomputed,
    DuplicateResponse,
    EmptyRecords,
    MixedVersions,
    NoAnnotatedSpan,
    SchemaError,
    TermNotFound,
    UnknownQuestion,
)

logger = logging.getLogger(__name__)

IDK_TEXT = "I don't know"
IDK_INDEX = 3

RESPONSE_COLUMNS = (
    "participant_id",
    "version_tag",
    "phase",
    "question_id",
    "choice_index",
    "response_time_ms",
)

PHASES = ("pre", "formal")


@dataclass(frozen=True)
class LearningObjective:
    id: str  # e.g. "a-LO9"
    verb: str
    statement: str
    chart_ref: str = ""

    def __post_init__(self):
        if not self.verb.strip() or not self.statement.strip():
            raise SchemaError(f"learning objective {self.id!r} needs a verb and a statement")

    def render(self) -> str:
        return f"The viewer will {self.verb} {self.statement}"


@dataclass(frozen=True)
class Question:
    id: str
    phase: str
    text_variants: dict[str, str]
    choices: tuple[str, str, str]
    correct_index: int
    lo_links: frozenset[str]
    figure_span: str | None = None
    needs_review: bool = False

    def __post_init__(self):
        if self.phase not in PHASES:
            raise SchemaError(f"question {self.id!r}: phase must be pre or formal")
        if len(self.choices) != 3:
            raise SchemaError(f"question {self.id!r}: exactly 3 substantive choices required")
        if any(c.strip().lower() == IDK_TEXT.lower() for c in self.choices):
            raise SchemaError(
                f"question {self.id!r}: {IDK_TEXT!r} is implicit and cannot be a substantive choice"
            )
        if not (0 <= self.correct_index <= 2):
            raise SchemaError(f"question {self.id!r}: correct_index must be 0..2")
        if not self.lo_links:
            raise SchemaError(f"question {self.id!r}: at least one learning objective link required")

    def text(self, version_tag: str) -> str:
        try:
            return self.text_variants[version_tag]
        except KeyError:
            raise SchemaError(
                f"question {self.id!r} has no text variant for {version_tag!r}"
            ) from None

    def all_choices(self) -> tuple[str, str, str, str]:
        return (*self.choices, IDK_TEXT)

    @property
    def lo_group(self) -> str:
        return "&".join(sorted(self.lo_links))

    def to_json(self) -> dict:
        payload = {
            "id": self.id,
            "phase": self.phase,
            "text_variants": dict(self.text_variants),
            "choices": list(self.choices),
            "correct_index": self.correct_index,
            "lo_links": sorted(self.lo_links),
        }
        if self.figure_span is not None:
            payload["figure_span"] = self.figure_span
        if self.needs_review:
            payload["needs_review"] = True
        return payload

    @classmethod
    def from_json(cls, data: dict) -> "Question":
        try:
            return cls(
                id=data["id"],
                phase=data["phase"],
                text_variants=dict(data["text_variants"]),
                choices=tuple(data["choices"]),
                correct_index=int(data["correct_index"]),
                lo_links=frozenset(data["lo_links"]),
                figure_span=data.get("figure_span"),
                needs_review=bool(data.get("needs_review", False)),
            )
        except KeyError as exc:
            raise SchemaError(f"question object missing key {exc}") from None


def load_question_bank(source: bytes | str) -> dict[str, Question]:
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    try:
        raw = json.loads(source)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"question bank is not valid JSON: {exc}") from None
    if not isinstance(raw, list):
        raise SchemaError("question bank must be a JSON list of question objects")
    bank: dict[str, Question] = {}
    for item in raw:
        q = Question.from_json(item)
        if q.id in bank:
            raise SchemaError(f"duplicate question id {q.id!r} in bank")
        bank[q.id] = q
    return bank


def dump_question_bank(bank: dict[str, Question]) -> str:
    return json.dumps([q.to_json() for q in bank.values()], indent=2) + "\n"


@dataclass(frozen=True)
class ResponseRecord:
    participant_id: str
    version_tag: str
    phase: str
    question_id: str
    choice_index: int
    correct: int
    response_time_ms: int


@dataclass(frozen=True)
class Score:
    value: float
    rule_name: str
    n_records: int


def ingest_responses(data: bytes | str, bank: dict[str, Question]) -> list[ResponseRecord]:
    """Parse and validate the response CSV; correctness is recomputed."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    reader = csv.reader(io.StringIO(data))
    try:
        header = next(reader)
    except StopIteration:
        raise SchemaError("empty response file") from None
    header = [h.strip() for h in header]
    has_correct = tuple(header) == (*RESPONSE_COLUMNS, "correct")
    if not has_correct and tuple(header) != RESPONSE_COLUMNS:
        raise SchemaError(
            f"response CSV header must be {','.join(RESPONSE_COLUMNS)}, got {','.join(header)}"
        )

    records: list[ResponseRecord] = []
    seen: set[tuple[str, str]] = set()
    for row_no, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(header):
            raise SchemaError(f"row {row_no}: expected {len(header)} fields, got {len(row)}")
        pid, version, phase, qid, choice_raw, rt_raw = (cell.strip() for cell in row[:6])
        question = bank.get(qid)
        if question is None:
            raise UnknownQuestion(f"row {row_no}: unknown question {qid!r}")
        if phase != question.phase:
            raise SchemaError(
                f"row {row_no}: phase {phase!r} contradicts the bank ({question.phase!r})"
            )
        try:
            choice = int(choice_raw)
        except ValueError:
            raise ChoiceOutOfRange(f"row {row_no}: choice_index {choice_raw!r} is not an integer") from None
        if not (0 <= choice <= IDK_INDEX):
            raise ChoiceOutOfRange(f"row {row_no}: choice_index {choice} outside 0..{IDK_INDEX}")
        try:
            rt = int(rt_raw)
            if rt < 0:
                raise ValueError
        except ValueError:
            raise SchemaError(f"row {row_no}: response_time_ms must be a nonnegative integer") from None
        if (pid, qid) in seen:
            raise DuplicateResponse(pid, qid)
        seen.add((pid, qid))

        correct = 1 if choice == question.correct_index else 0
        if has_correct and row[6].strip() != "" and int(row[6]) != correct:
            warnings.warn(
                f"row {row_no}: claimed correct={row[6].strip()} recomputed to {correct}",
                CorrectRecomputed,
                stacklevel=2,
            )
        records.append(
            ResponseRecord(
                participant_id=pid,
                version_tag=version,
                phase=phase,
                question_id=qid,
                choice_index=choice,
                correct=correct,
                response_time_ms=rt,
            )
        )
    return records


def mean_accuracy(records: list[ResponseRecord]) -> tuple[float, int]:
    """Default scoring rule: mean correctness over formal-phase records."""
    formal = [r for r in records if r.phase == "formal"]
    if not formal:
        raise EmptyRecords("no formal-phase records to score")
    return sum(r.correct for r in formal) / len(formal), len(formal)


def score(records: list[ResponseRecord], rule=mean_accuracy) -> Score:
    if not records:
        raise EmptyRecords("cannot score an empty record list")
    versions = {r.version_tag for r in records}
    if len(versions) > 1:
        raise MixedVersions(f"records span versions {sorted(versions)}; score one at a time")
    value, n_used = rule(records)
    return Score(value=value, rule_name=rule.__name__, n_records=n_used)


def version_order(tag: str) -> tuple:
    m = re.fullmatch(r"V(\d+)", tag)
    return (0, int(m.group(1))) if m else (1, tag)


def lo_accuracy_table(records: list[ResponseRecord], bank: dict[str, Question]) -> dict:
    """Accuracy per (learning-objective combination, version), with an
    improvement flag where any later version beats an earlier one."""
    groups: dict[str, dict] = {}
    for rec in records:
        question = bank.get(rec.question_id)
        if question is None:
            raise UnknownQuestion(f"response references unknown question {rec.question_id!r}")
        entry = groups.setdefault(
            question.lo_group, {"question_ids": set(), "cells": {}}
        )
        entry["question_ids"].add(question.id)
        cell = entry["cells"].setdefault(rec.version_tag, [0, 0])
        cell[0] += rec.correct
        cell[1] += 1

    table = {"groups": []}
    for lo_group in sorted(groups):
        entry = groups[lo_group]
        versions = {}
        ordered = sorted(entry["cells"], key=version_order)
        for tag in ordered:
            n_correct, n = entry["cells"][tag]
            versions[tag] = {"accuracy": n_correct / n, "n": n}
        accuracies = [versions[tag]["accuracy"] for tag in ordered]
        improved = any(
            accuracies[j] > accuracies[i]
            for i in range(len(accuracies))
            for j in range(i + 1, len(accuracies))
        )
        table["groups"].append(
            {
                "lo_group": lo_group,
                "question_ids": sorted(entry["question_ids"]),
                "versions": versions,
                "improved": improved,
            }
        )
    return table


def adapt_question(
    question: Question,
    from_tag: str,
    to_tag: str,
    terminology: dict[str, str],
) -> Question:
    """Produce the to_tag text variant by exact-phrase substitution.

    Knowledge content (correct_index, lo_links, choice count) is never
    touched; every substitution is logged for reviewer audit, and terms
    that match nothing raise a TermNotFound warning rather than failing.
    """
    source = question.text(from_tag)
    new_text = source
    new_choices = list(question.choices)
    for old_term, new_term in terminology.items():
        hits = new_text.count(old_term) + sum(c.count(old_term) for c in new_choices)
        if hits == 0:
            warnings.warn(
                f"question {question.id!r}: term {old_term!r} not found",
                TermNotFound,
                stacklevel=2,
            )
            continue
        new_text = new_text.replace(old_term, new_term)
        new_choices = [c.replace(old_term, new_term) for c in new_choices]
        logger.info(
            "adapt %s (%s -> %s): %r -> %r (%d occurrence(s))",
            question.id, from_tag, to_tag, old_term, new_term, hits,
        )
    variants = dict(question.text_variants)
    variants[to_tag] = new_text
    return replace(
        question,
        text_variants=variants,
        choices=tuple(new_choices),
    )


_SPACE_BEFORE_PUNCT = re.compile(r"\s+([?.,;:!])")


def derive_pretest(question: Question) -> Question:
    """Derive a pre-test question by deleting the annotated figure span.

    The result is flagged needs_review: equivalence of difficulty and
    knowledge focus requires a human judgment.
    """
    if question.phase != "formal":
        raise NoAnnotatedSpan(f"question {question.id!r} is not a formal-test question")
    if not question.figure_span:
        raise NoAnnotatedSpan(
            f"question {question.id!r} has no annotated figure-reference span"
        )
    variants = {}
    for tag, text in question.text_variants.items():
        if question.figure_span not in text:
            warnings.warn(
                f"question {question.id!r}: span missing in variant {tag!r}",
                TermNotFound,
                stacklevel=2,
            )
            variants[tag] = text
            continue
        stripped = text.replace(question.figure_span, " ")
        stripped = re.sub(r"\s{2,}", " ", stripped)
        stripped = _SPACE_BEFORE_PUNCT.sub(r"\1", stripped)
        # drop separators orphaned by the deletion, e.g. ",?" -> "?"
        stripped = re.sub(r"[,;:]+(?=[?.!,;:])", "", stripped).strip()
        variants[tag] = stripped
    return replace(
        question,
        id=f"pre-{question.id}",
        phase="pre",
        text_variants=variants,
        figure_span=None,
        needs_review=True,
    )


def derive_pretest_bank(bank: dict[str, Question]) -> dict[str, Question]:
    """Pre-test questions for every annotated formal question in the bank."""
    out: dict[str, Question] = {}
    for q in bank.values():
        if q.phase == "formal" and q.figure_span:
            derived = derive_pretest(q)
            out[derived.id] = derived
    return out
