"""Balanced candidate sampling for benchmark curation."""
from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path

from ..errors import InsufficientRecords
from ..forge.records import TASK_TYPES


@dataclass(frozen=True)
class BenchmarkSpec:
    categories: tuple[str, ...] = TASK_TYPES
    quota_per_category: int = 50
    seed: int = 0

    def __post_init__(self):
        if self.quota_per_category < 1:
            raise ValueError("quota_per_category must be positive")
        unknown = [c for c in self.categories if c not in TASK_TYPES]
        if unknown:
            raise ValueError(f"unknown categories {unknown}")


def sample_candidates(dataset_path: str | Path, spec: BenchmarkSpec, oversample: float = 1.5) -> list[dict]:
    """Seeded uniform per-category sample of quota x oversample records.

    At most one record per source figure per category (diversity rule); the
    per-figure representative is the lexicographically first record_id.
    Raises InsufficientRecords naming every deficient category.
    """
    if oversample < 1.0:
        raise ValueError("oversample factor must be >= 1")
    need = int(round(spec.quota_per_category * oversample))

    by_category: dict[str, dict[str, dict]] = {c: {} for c in spec.categories}
    with open(dataset_path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            category = record["task_type"]
            if category not in by_category:
                continue
            prov = record["provenance"]
            figure_key = f"{prov['article_id']}/{prov['figure_id']}"
            pool = by_category[category]
            incumbent = pool.get(figure_key)
            if incumbent is None or record["record_id"] < incumbent["record_id"]:
                pool[figure_key] = record

    deficits = {c: need - len(pool) for c, pool in by_category.items() if len(pool) < need}
    if deficits:
        raise InsufficientRecords(deficits)

    candidates: list[dict] = []
    for category in spec.categories:
        pool = by_category[category]
        keys = sorted(pool)
        rng = random.Random(f"{spec.seed}:{category}")
        chosen = rng.sample(keys, need)
        candidates.extend(pool[key] for key in chosen)
    return candidates
