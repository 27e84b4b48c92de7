"""Rater-agreement statistics over 1/3/5 quality scores.

Scores map to ranks (1->1, 3->2, 5->3); "within one" means adjacent legal
scores, since a numeric |diff| <= 1 would collapse into exact agreement on
this scale.
"""
from __future__ import annotations

import csv
import math
from collections import defaultdict
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path

from ..errors import DegenerateMatrix, EmptyInput, IllegalScore
from .icc import compute_icc

LEGAL_SCORES = (1, 3, 5)
_RANK = {1: 1, 3: 2, 5: 3}
DIMENSIONS = ("correctness", "completeness", "clarity")


@dataclass(frozen=True)
class RatingRecord:
    sample_id: str
    stage: int
    rater_id: str
    correctness: int
    completeness: int
    clarity: int

    def __post_init__(self):
        if not 1 <= self.stage <= 5:
            raise ValueError(f"stage {self.stage} outside 1..5")
        for dim in DIMENSIONS:
            score = getattr(self, dim)
            if score not in LEGAL_SCORES:
                raise IllegalScore(f"{dim} score {score!r} not in {LEGAL_SCORES}")

    def score(self, dimension: str) -> int:
        return getattr(self, dimension)


def agreement_rates(pairs: list[tuple[int, int]]) -> dict[str, float]:
    """Exact and within-one agreement percentages over score pairs."""
    if not pairs:
        raise EmptyInput("agreement_rates needs at least one pair")
    exact = within = 0
    for a, b in pairs:
        if a not in _RANK or b not in _RANK:
            raise IllegalScore(f"scores must be in {LEGAL_SCORES}, got {(a, b)}")
        distance = abs(_RANK[a] - _RANK[b])
        if distance == 0:
            exact += 1
        if distance <= 1:
            within += 1
    n = len(pairs)
    return {"exact_pct": exact / n * 100.0, "within_one_pct": within / n * 100.0}


def stage_summary(ratings: list[RatingRecord]) -> dict[int, dict[str, tuple[float, float]]]:
    """Per stage and dimension: (mean, sample sd) over all ratings.

    Stages without data are absent from the map; a single rating has sd 0.0.
    """
    grouped: dict[int, dict[str, list[int]]] = defaultdict(lambda: defaultdict(list))
    for record in ratings:
        for dim in DIMENSIONS:
            grouped[record.stage][dim].append(record.score(dim))
    summary: dict[int, dict[str, tuple[float, float]]] = {}
    for stage in sorted(grouped):
        summary[stage] = {}
        for dim in DIMENSIONS:
            values = grouped[stage][dim]
            mean = sum(values) / len(values)
            if len(values) > 1:
                sd = math.sqrt(sum((v - mean) ** 2 for v in values) / (len(values) - 1))
            else:
                sd = 0.0
            summary[stage][dim] = (mean, sd)
    return summary


def format_mean_sd(mean: float, sd: float) -> str:
    """One-decimal rendering, e.g. "4.8 ± 0.2"."""
    return f"{mean:.1f} ± {sd:.1f}"


@dataclass
class AgreementReport:
    icc_overall: float
    icc_correctness: float
    icc_completeness: float
    icc_clarity: float
    exact_pct: float
    within_one_pct: float
    per_stage_means: dict[int, dict[str, tuple[float, float]]]
    raters: list[str] = field(default_factory=list)
    subjects_dropped: int = 0

    def to_json(self) -> dict:
        return {
            "icc_overall": self.icc_overall,
            "icc_correctness": self.icc_correctness,
            "icc_completeness": self.icc_completeness,
            "icc_clarity": self.icc_clarity,
            "exact_pct": self.exact_pct,
            "within_one_pct": self.within_one_pct,
            "per_stage_means": {
                str(stage): {
                    dim: {"mean": round(mean, 4), "sd": round(sd, 4),
                          "rendered": format_mean_sd(mean, sd)}
                    for dim, (mean, sd) in dims.items()
                }
                for stage, dims in self.per_stage_means.items()
            },
            "raters": list(self.raters),
            "subjects_dropped": self.subjects_dropped,
        }


def build_agreement_report(ratings: list[RatingRecord]) -> AgreementReport:
    """ICC per dimension and overall, pairwise agreement rates, stage means.

    Subjects missing any rater are dropped listwise from the ICC matrices
    (counted in ``subjects_dropped``); pairwise agreement uses every rater
    pair that co-scored a subject.
    """
    if not ratings:
        raise EmptyInput("no ratings")
    raters = sorted({r.rater_id for r in ratings})
    by_subject: dict[str, dict[str, RatingRecord]] = defaultdict(dict)
    for record in ratings:
        by_subject[record.sample_id][record.rater_id] = record

    matrices: dict[str, list[list[int]]] = {dim: [] for dim in DIMENSIONS}
    dropped = 0
    for sample_id in sorted(by_subject):
        row = by_subject[sample_id]
        if set(row) != set(raters):
            dropped += 1
            continue
        for dim in DIMENSIONS:
            matrices[dim].append([row[rater].score(dim) for rater in raters])

    def icc_of(matrix: list[list[int]]) -> float:
        if len(matrix) < 2:
            raise DegenerateMatrix("fewer than 2 complete subjects")
        return compute_icc(matrix)

    stacked = [row for dim in DIMENSIONS for row in matrices[dim]]
    pairs = []
    for row in by_subject.values():
        for a, b in combinations(sorted(row), 2):
            for dim in DIMENSIONS:
                pairs.append((row[a].score(dim), row[b].score(dim)))
    rates = agreement_rates(pairs)

    return AgreementReport(
        icc_overall=icc_of(stacked),
        icc_correctness=icc_of(matrices["correctness"]),
        icc_completeness=icc_of(matrices["completeness"]),
        icc_clarity=icc_of(matrices["clarity"]),
        exact_pct=rates["exact_pct"],
        within_one_pct=rates["within_one_pct"],
        per_stage_means=stage_summary(ratings),
        raters=raters,
        subjects_dropped=dropped,
    )


CSV_HEADER = ["sample_id", "stage", "rater_id", "correctness", "completeness", "clarity"]


def load_ratings_csv(path: str | Path) -> list[RatingRecord]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_HEADER:
            raise IllegalScore(f"ratings CSV header must be {','.join(CSV_HEADER)}")
        return [
            RatingRecord(
                sample_id=row["sample_id"],
                stage=int(row["stage"]),
                rater_id=row["rater_id"],
                correctness=int(row["correctness"]),
                completeness=int(row["completeness"]),
                clarity=int(row["clarity"]),
            )
            for row in reader
        ]
