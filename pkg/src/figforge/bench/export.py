"""Category-balanced benchmark export."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from ..errors import NoDualVerdicts, QuotaUnmet
from .curation import ACCEPTED, CurationItem, curation_agreement
from .sampling import BenchmarkSpec


@dataclass
class BenchmarkExport:
    items: list[dict]  # accepted instruction records, export order
    manifest: dict


def export_benchmark(
    items: list[CurationItem],
    spec: BenchmarkSpec,
    dataset_digest: str | None = None,
) -> BenchmarkExport:
    """Exactly quota accepted records per category, earliest accepted first.

    Raises QuotaUnmet with the per-category deficit when any category has
    fewer accepted items than the quota.
    """
    accepted = [i for i in items if i.state == ACCEPTED]
    accepted.sort(key=lambda i: (i.accepted_seq if i.accepted_seq is not None else 1 << 60))
    by_category: dict[str, list[CurationItem]] = {c: [] for c in spec.categories}
    for item in accepted:
        if item.category in by_category:
            by_category[item.category].append(item)

    deficits = {
        category: spec.quota_per_category - len(got)
        for category, got in by_category.items()
        if len(got) < spec.quota_per_category
    }
    if deficits:
        raise QuotaUnmet(deficits)

    chosen: list[CurationItem] = []
    counts: dict[str, int] = {}
    for category in spec.categories:
        take = by_category[category][: spec.quota_per_category]
        chosen.extend(take)
        counts[category] = len(take)

    try:
        agreement = curation_agreement(items)
    except NoDualVerdicts:
        agreement = None
    manifest = {
        "per_category_counts": counts,
        "total": sum(counts.values()),
        "quota_per_category": spec.quota_per_category,
        "source_dataset_digest": dataset_digest,
        "curation": {
            "items_reviewed": len(items),
            "accepted": len(accepted),
            "agreement_pct": agreement,
        },
    }
    return BenchmarkExport(items=[i.record for i in chosen], manifest=manifest)


def write_export(export: BenchmarkExport, out_dir: str | Path) -> tuple[Path, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    benchmark_path = out / "benchmark.jsonl"
    manifest_path = out / "manifest.json"
    with open(benchmark_path, "w", encoding="utf-8") as fh:
        for record in export.items:
            fh.write(json.dumps(record, ensure_ascii=False, separators=(",", ":")) + "\n")
    manifest_path.write_text(json.dumps(export.manifest, indent=2, ensure_ascii=False), encoding="utf-8")
    return benchmark_path, manifest_path
