"""Model dataset: one row per (participant, item) response.

Fixed-effect design is [intercept, version, centered pre-test,
version x pre-test]. Random intercepts are indexed by dense participant
and item codes.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import FigchainError

FIXED_EFFECT_NAMES = ("intercept", "version", "pretest", "interaction")


def center_pretest(raw_scores) -> np.ndarray:
    """Mean-center one value per participant; differences are preserved."""
    arr = np.asarray(list(raw_scores), dtype=float)
    if arr.size == 0:
        raise FigchainError("centering requires at least one participant")
    centered = arr - arr.mean()
    # One more pass kills the O(eps) residual mean from the first subtraction.
    centered = centered - centered.mean()
    return centered


@dataclass
class GlmmDataset:
    participant: np.ndarray  # dense codes 0..n_participants-1
    item: np.ndarray  # dense codes 0..n_items-1
    version: np.ndarray  # 0.0 or 1.0 per row
    pretest: np.ndarray  # centered, constant within participant
    outcome: np.ndarray  # 0.0 or 1.0 per row
    participant_ids: list[str] = field(default_factory=list)
    item_ids: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.participant = np.asarray(self.participant, dtype=np.intp)
        self.item = np.asarray(self.item, dtype=np.intp)
        self.version = np.asarray(self.version, dtype=float)
        self.pretest = np.asarray(self.pretest, dtype=float)
        self.outcome = np.asarray(self.outcome, dtype=float)
        self.validate()

    @property
    def n_rows(self) -> int:
        return self.outcome.shape[0]

    @property
    def n_participants(self) -> int:
        return int(self.participant.max()) + 1 if self.n_rows else 0

    @property
    def n_items(self) -> int:
        return int(self.item.max()) + 1 if self.n_rows else 0

    def validate(self) -> None:
        n = self.n_rows
        for name in ("participant", "item", "version", "pretest"):
            if getattr(self, name).shape != (n,):
                raise FigchainError(f"dataset column {name} has the wrong length")
        if n == 0:
            raise FigchainError("dataset has no rows")
        for codes, label in ((self.participant, "participant"), (self.item, "item")):
            uniq = np.unique(codes)
            if uniq[0] != 0 or uniq[-1] != len(uniq) - 1:
                raise FigchainError(f"{label} codes must be dense 0..n-1")
        if not np.isin(self.outcome, (0.0, 1.0)).all():
            raise FigchainError("outcomes must be coded 0/1")
        if not np.isin(self.version, (0.0, 1.0)).all():
            raise FigchainError("version indicator must be coded 0/1")
        # Pre-test is a participant-level covariate, centered across participants.
        per_participant = np.full(self.n_participants, np.nan)
        for idx in range(n):
            p = self.participant[idx]
            if np.isnan(per_participant[p]):
                per_participant[p] = self.pretest[idx]
            elif per_participant[p] != self.pretest[idx]:
                raise FigchainError("pretest must be constant within participant")
        if abs(per_participant.mean()) >= 1e-9:
            raise FigchainError(
                f"pretest must be mean-centered across participants, mean={per_participant.mean():g}"
            )

    def design_matrix(self) -> np.ndarray:
        return np.column_stack(
            [
                np.ones(self.n_rows),
                self.version,
                self.pretest,
                self.version * self.pretest,
            ]
        )


def dataset_from_records(records, pretest_scores: dict[str, float] | None = None) -> GlmmDataset:
    """Build the dataset from assessment ResponseRecords.

    All phases contribute outcome rows. The pre-test covariate defaults
    to each participant's count of correct pre-phase answers; pass
    pretest_scores to override (participant id -> raw score).
    """
    records = list(records)
    if not records:
        raise FigchainError("no response records")
    participants = sorted({r.participant_id for r in records})
    items = sorted({r.question_id for r in records})
    p_index = {pid: k for k, pid in enumerate(participants)}
    i_index = {qid: k for k, qid in enumerate(items)}

    tags = sorted({r.version_tag for r in records})
    if len(tags) != 2:
        raise FigchainError(
            f"version comparison needs exactly two version tags, got {tags}"
        )
    v_index = {tags[0]: 0.0, tags[1]: 1.0}

    if pretest_scores is None:
        raw = {pid: 0.0 for pid in participants}
        for r in records:
            if r.phase == "pre":
                raw[r.participant_id] += r.correct
    else:
        missing = [pid for pid in participants if pid not in pretest_scores]
        if missing:
            raise FigchainError(f"missing pre-test scores for {missing[:5]}")
        raw = {pid: float(pretest_scores[pid]) for pid in participants}
    centered = center_pretest([raw[pid] for pid in participants])
    centered_by_pid = dict(zip(participants, centered))

    return GlmmDataset(
        participant=np.array([p_index[r.participant_id] for r in records]),
        item=np.array([i_index[r.question_id] for r in records]),
        version=np.array([v_index[r.version_tag] for r in records]),
        pretest=np.array([centered_by_pid[r.participant_id] for r in records]),
        outcome=np.array([float(r.correct) for r in records]),
        participant_ids=participants,
        item_ids=items,
    )
