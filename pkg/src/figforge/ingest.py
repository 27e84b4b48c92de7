"""Corpus ingest: apply all gates and produce an index plus rejection report."""
from __future__ import annotations

import csv
import json
from pathlib import Path

from .corpus import apply_caption_gate, extract_inline_text, filter_license, parse_article, word_count
from .corpus.gates import apply_medical_gate
from .errors import ClassifierFailure, DegenerateImage, FigforgeError, ImageDecodeError
from .figures import medical_content_ratio, split_panels
from .figures.segment import decode_image
from .forge.pipeline import discover_packages


def run_ingest(corpus_dir: str | Path, config) -> dict:
    """Gate every figure in the corpus.

    Returns {"index": [...], "rejections": [...], "failures": [...]} where
    index rows describe gate-passing figures and every rejection carries its
    rule name and detail.
    """
    gates = config.gates
    index: list[dict] = []
    rejections: list[dict] = []
    failures: list[dict] = []

    for pkg_dir in discover_packages(Path(corpus_dir)):
        try:
            pkg = parse_article(pkg_dir)
        except FigforgeError as exc:
            failures.append({"article_id": pkg_dir.name, "error": str(exc)})
            continue
        license_gate = filter_license(pkg, gates.license_allowlist)
        if not license_gate.passed:
            rejections.append({"article_id": pkg.article_id, "figure_id": None,
                               "rule": license_gate.rule, "detail": license_gate.detail})
            continue
        for fig in pkg.figures:
            caption_gate = apply_caption_gate(fig, gates.caption_words, gates.sub_caption_words)
            if not caption_gate.passed:
                rejections.append({"article_id": pkg.article_id, "figure_id": fig.figure_id,
                                   "rule": caption_gate.rule, "detail": caption_gate.detail})
                continue
            try:
                gray = decode_image((pkg.root / fig.graphic_path).read_bytes())
                panels = split_panels(gray, gates.min_panel, gates.min_gutter)
            except (ImageDecodeError, DegenerateImage) as exc:
                failures.append({"article_id": pkg.article_id, "figure_id": fig.figure_id,
                                 "error": f"segmentation: {exc}"})
                continue
            crops = {p.panel_id: gray[p.y:p.y + p.height, p.x:p.x + p.width] for p in panels}
            try:
                ratio = medical_content_ratio(panels, gates.build_classifier(), crops=crops)
            except ClassifierFailure as exc:
                failures.append({"article_id": pkg.article_id, "figure_id": fig.figure_id,
                                 "error": f"classifier: {exc}"})
                continue
            medical_gate = apply_medical_gate(ratio, gates.medical_ratio)
            if not medical_gate.passed:
                rejections.append({"article_id": pkg.article_id, "figure_id": fig.figure_id,
                                   "rule": medical_gate.rule, "detail": medical_gate.detail})
                continue
            height, width = gray.shape
            index.append({
                "article_id": pkg.article_id,
                "figure_id": fig.figure_id,
                "graphic": fig.graphic_path,
                "width": width,
                "height": height,
                "panels": len(panels),
                "caption_words": word_count(fig.caption),
                "inline_words": word_count(extract_inline_text(pkg, fig.figure_id)),
                "medical_ratio": ratio,
            })
    return {"index": index, "rejections": rejections, "failures": failures}


def write_ingest_outputs(result: dict, output_dir: str | Path) -> dict[str, Path]:
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    index_path = out / "index.json"
    rejections_path = out / "rejections.json"
    rejections_csv = out / "rejections.csv"
    index_path.write_text(json.dumps(result["index"], indent=2, ensure_ascii=False), encoding="utf-8")
    rejections_path.write_text(
        json.dumps({"rejections": result["rejections"], "failures": result["failures"]},
                   indent=2, ensure_ascii=False),
        encoding="utf-8",
    )
    with open(rejections_csv, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["article_id", "figure_id", "rule", "detail"])
        for row in result["rejections"]:
            writer.writerow([row["article_id"], row["figure_id"] or "", row["rule"], row["detail"]])
    return {"index": index_path, "rejections": rejections_path, "rejections_csv": rejections_csv}
