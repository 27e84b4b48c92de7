"""Gated, checkpointed, resumable dataset generation.

Articles are processed in sorted order and figures in package order; output
lines are written in submission order regardless of worker count, and the
checkpoint advances after every figure, so a killed run resumed from its
checkpoint produces byte-identical output (given the reply cache).
"""
from __future__ import annotations

import hashlib
import io
import json
import logging
import os
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from PIL import Image

from ..corpus import apply_caption_gate, extract_inline_text, filter_license, parse_article
from ..corpus.gates import apply_medical_gate
from ..corpus.package import ArticlePackage, FigureEntry
from ..errors import (
    ClassifierFailure,
    DegenerateImage,
    FigforgeError,
    FigureRejected,
    ImageDecodeError,
    InsufficientPanels,
    UnparseableReply,
)
from ..figures import (
    CompoundFigureRecord,
    PanelBox,
    medical_content_ratio,
    parse_panel_labels,
    split_panels,
)
from ..figures.segment import decode_image
from ..gateway import Gateway
from .records import MULTI_IMAGE_TYPES, Provenance, TASK_TYPES, validate_record
from .stages import (
    ImageRefs,
    stage1_summarize,
    stage2_complement,
    stage3_describe_panels,
    stage4_generate,
    stage5_refine,
)
from .records import ContextBundle

logger = logging.getLogger(__name__)

DATASET_FILE = "dataset.jsonl"
FIGURES_FILE = "figures.jsonl"
REPORT_FILE = "run_report.json"
CHECKPOINT_FILE = "checkpoint.json"
IMAGES_DIR = "images"


def seed_for(base_seed: int, *parts: object) -> int:
    material = ":".join([str(base_seed)] + [str(p) for p in parts])
    return int.from_bytes(hashlib.sha256(material.encode("utf-8")).digest()[:8], "big")


def _jsonl_line(data: dict) -> bytes:
    return (json.dumps(data, ensure_ascii=False, separators=(",", ":")) + "\n").encode("utf-8")


@dataclass
class FigureOutcome:
    key: str
    article_id: str
    figure_id: str
    rejection: dict | None = None
    failure: str | None = None
    records: list = field(default_factory=list)
    figure_meta: dict | None = None
    image_files: dict[str, bytes] = field(default_factory=dict)
    pruned_panels: list[str] = field(default_factory=list)


@dataclass
class Checkpoint:
    status: str = "running"
    completed: list[str] = field(default_factory=list)
    dataset_bytes: int = 0
    figures_bytes: int = 0
    records_emitted: int = 0
    rejections: list[dict] = field(default_factory=list)
    failures: list[dict] = field(default_factory=list)
    pruned_panels: int = 0

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "completed": list(self.completed),
            "dataset_bytes": self.dataset_bytes,
            "figures_bytes": self.figures_bytes,
            "records_emitted": self.records_emitted,
            "rejections": list(self.rejections),
            "failures": list(self.failures),
            "pruned_panels": self.pruned_panels,
        }

    @classmethod
    def load(cls, path: Path) -> "Checkpoint | None":
        if not path.exists():
            return None
        data = json.loads(path.read_text(encoding="utf-8"))
        return cls(
            status=data["status"],
            completed=list(data["completed"]),
            dataset_bytes=int(data["dataset_bytes"]),
            figures_bytes=int(data["figures_bytes"]),
            records_emitted=int(data["records_emitted"]),
            rejections=list(data.get("rejections", [])),
            failures=list(data.get("failures", [])),
            pruned_panels=int(data.get("pruned_panels", 0)),
        )

    def save(self, path: Path) -> None:
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps(self.to_json(), indent=2), encoding="utf-8")
        os.replace(tmp, path)


class _SerializedClassifier:
    """Wrapper honoring a classifier's declared exclusivity."""

    concurrent_safe = True

    def __init__(self, inner):
        self._inner = inner
        self._lock = threading.Lock()

    def is_medical(self, panel, crop):
        with self._lock:
            return self._inner.is_medical(panel, crop)


def shared_classifier(config):
    classifier = config.gates.build_classifier()
    if not getattr(classifier, "concurrent_safe", False):
        classifier = _SerializedClassifier(classifier)
    return classifier


def discover_packages(corpus_dir: Path) -> list[Path]:
    out = []
    for entry in sorted(Path(corpus_dir).iterdir()):
        if entry.is_dir() and ((entry / "article.json").exists() or (entry / "article.xml").exists()):
            out.append(entry)
    return out


def _crop_png(gray_image: Image.Image, panel: PanelBox) -> bytes:
    crop = gray_image.crop((panel.x, panel.y, panel.x + panel.width, panel.y + panel.height))
    buf = io.BytesIO()
    crop.save(buf, format="PNG")
    return buf.getvalue()


def _label_panels(panels: list[PanelBox], sub_captions: dict[str, str]) -> list[PanelBox]:
    labels = list(sub_captions.keys())
    if len(labels) == len(panels):
        return [
            PanelBox(p.panel_id, p.x, p.y, p.width, p.height, label=labels[i])
            for i, p in enumerate(panels)
        ]
    return [
        PanelBox(p.panel_id, p.x, p.y, p.width, p.height,
                 label=p.panel_id if p.panel_id in sub_captions else None)
        for p in panels
    ]


def _process_figure(pkg: ArticlePackage, fig: FigureEntry, config, gateway: Gateway,
                    through_stage: int, classifier=None) -> FigureOutcome:
    key = f"{pkg.article_id}/{fig.figure_id}"
    outcome = FigureOutcome(key=key, article_id=pkg.article_id, figure_id=fig.figure_id)
    gates = config.gates
    if classifier is None:
        classifier = shared_classifier(config)

    caption_gate = apply_caption_gate(fig, gates.caption_words, gates.sub_caption_words)
    if not caption_gate.passed:
        outcome.rejection = {"article_id": pkg.article_id, "figure_id": fig.figure_id,
                             "rule": caption_gate.rule, "detail": caption_gate.detail}
        return outcome

    image_path = pkg.root / fig.graphic_path
    image_bytes = image_path.read_bytes()
    try:
        gray = decode_image(image_bytes)
        panels = split_panels(gray, gates.min_panel, gates.min_gutter)
    except (ImageDecodeError, DegenerateImage) as exc:
        outcome.failure = f"segmentation: {exc}"
        return outcome

    sub_captions = dict(fig.sub_captions) or parse_panel_labels(fig.caption)
    panels = _label_panels(panels, sub_captions)
    height, width = gray.shape

    pil_image = Image.fromarray(gray)
    crops = {p.panel_id: _crop_png(pil_image, p) for p in panels}
    crop_arrays = {p.panel_id: gray[p.y:p.y + p.height, p.x:p.x + p.width] for p in panels}

    try:
        ratio = medical_content_ratio(panels, classifier, crops=crop_arrays)
    except ClassifierFailure as exc:
        outcome.failure = f"classifier: {exc}"
        return outcome
    medical_gate = apply_medical_gate(ratio, gates.medical_ratio)
    if not medical_gate.passed:
        outcome.rejection = {"article_id": pkg.article_id, "figure_id": fig.figure_id,
                             "rule": medical_gate.rule, "detail": medical_gate.detail}
        return outcome

    figure = CompoundFigureRecord(
        figure_id=fig.figure_id, image_width=width, image_height=height,
        panels=panels, caption=fig.caption, sub_captions=sub_captions,
    )

    compound_ref = f"{IMAGES_DIR}/{pkg.article_id}_{fig.figure_id}{Path(fig.graphic_path).suffix}"
    panel_refs = {p.panel_id: f"{IMAGES_DIR}/{pkg.article_id}_{fig.figure_id}_{p.panel_id}.png"
                  for p in figure.panels}
    outcome.image_files[compound_ref] = image_bytes
    for pid, ref in panel_refs.items():
        outcome.image_files[ref] = crops[pid]

    inline_text = extract_inline_text(pkg, fig.figure_id)
    base_seed = seed_for(config.seed, pkg.article_id, fig.figure_id)

    try:
        s1 = stage1_summarize(inline_text, fig.caption, gateway, config.endpoint("stage1"), seed=config.seed)
        summary = s1.summary
        bundle = None
        if through_stage >= 2:
            s2 = stage2_complement(fig.caption, summary, gateway, config.endpoint("stage2"), seed=config.seed)
        if through_stage >= 3:
            ordered_crops = [crops[p.panel_id] for p in figure.panels]
            s3 = stage3_describe_panels(figure, ordered_crops, summary, gateway,
                                        config.endpoint("stage3"), seed=config.seed)
    except (UnparseableReply, FigureRejected) as exc:
        outcome.failure = f"stages: {exc}"
        return outcome

    if through_stage < 3:
        outcome.figure_meta = _figure_meta(pkg, fig, figure, compound_ref, {}, inline_text)
        return outcome

    # drop panels whose description failed; stage 3 already enforced the cap
    usable_panels = [p for p in figure.panels if p.panel_id in s3.descriptions]
    outcome.pruned_panels = s3.failed_panels
    pruned_figure = CompoundFigureRecord(
        figure_id=figure.figure_id, image_width=width, image_height=height,
        panels=usable_panels, caption=fig.caption, sub_captions=sub_captions,
    )
    bundle = ContextBundle(
        figure_id=fig.figure_id,
        inline_summary=summary,
        knowledge_notes=s2.notes,
        panel_descriptions=dict(s3.descriptions),
        caption=fig.caption,
    )
    outcome.figure_meta = _figure_meta(pkg, fig, pruned_figure, compound_ref, s3.descriptions, inline_text)
    if through_stage < 4:
        return outcome

    base_provenance = Provenance(
        article_id=pkg.article_id,
        figure_id=fig.figure_id,
        panel_ids=[],
        stage_model_ids={
            "stage1": config.endpoint("stage1").endpoint_id,
            "stage2": config.endpoint("stage2").endpoint_id,
            "stage3": config.endpoint("stage3").endpoint_id,
        },
        prompt_digests={"stage1": s1.digests, "stage2": s2.digests, "stage3": s3.digests},
        stage1_caption_only=s1.caption_only,
    )
    refs = ImageRefs(compound=compound_ref, panels=panel_refs)

    for task_type in TASK_TYPES:
        count = config.task_mix.get(task_type, 0)
        for index in range(count):
            task_seed = seed_for(config.seed, pkg.article_id, fig.figure_id, task_type, index)
            try:
                record = stage4_generate(
                    task_type, bundle, pruned_figure, gateway, config.endpoint("stage4"),
                    seed=task_seed, refs=refs, base_provenance=base_provenance,
                    record_index=index, tau=gates.tau,
                )
            except InsufficientPanels:
                continue  # figure cannot support this type; not an error
            except UnparseableReply as exc:
                outcome.failure = f"stage4 {task_type}: {exc}"
                return outcome
            if through_stage >= 5:
                record, _ = stage5_refine(record, gateway, config.endpoint("stage5"), seed=config.seed)
            problems = validate_record(record.to_json())
            if problems:
                raise FigforgeError(f"internal: invalid record {record.record_id}: {problems}")
            outcome.records.append(record)
    return outcome


def _figure_meta(pkg, fig, figure: CompoundFigureRecord, compound_ref: str,
                 descriptions: dict[str, str], inline_text: str) -> dict:
    return {
        "article_id": pkg.article_id,
        "figure_id": fig.figure_id,
        "image": compound_ref,
        "width": figure.image_width,
        "height": figure.image_height,
        "caption": figure.caption,
        "caption_words": len(figure.caption.split()),
        "inline_words": len(inline_text.split()),
        "panels": [p.to_json() for p in figure.panels],
        "panel_descriptions": dict(descriptions),
    }


def plan_dry_run(corpus_dir: str | Path, config) -> dict:
    """Gate the corpus and report planned per-stage call counts; no model calls."""
    packages = discover_packages(Path(corpus_dir))
    plan = {"figures_considered": 0, "figures_passing_gates": 0, "planned_calls": {}}
    passing_panels = 0
    per_type: dict[str, int] = {}
    classifier = shared_classifier(config)
    for pkg_dir in packages:
        try:
            pkg = parse_article(pkg_dir)
        except FigforgeError:
            continue
        if not filter_license(pkg, config.gates.license_allowlist).passed:
            continue
        for fig in pkg.figures:
            plan["figures_considered"] += 1
            if not apply_caption_gate(fig, config.gates.caption_words, config.gates.sub_caption_words).passed:
                continue
            try:
                gray = decode_image((pkg.root / fig.graphic_path).read_bytes())
                panels = split_panels(gray, config.gates.min_panel, config.gates.min_gutter)
            except (ImageDecodeError, DegenerateImage):
                continue
            crop_arrays = {p.panel_id: gray[p.y:p.y + p.height, p.x:p.x + p.width] for p in panels}
            try:
                ratio = medical_content_ratio(panels, classifier, crops=crop_arrays)
            except ClassifierFailure:
                continue
            if not apply_medical_gate(ratio, config.gates.medical_ratio).passed:
                continue
            plan["figures_passing_gates"] += 1
            passing_panels += len(panels)
            n_panels = len(panels)
            for task_type, count in config.task_mix.items():
                if task_type in MULTI_IMAGE_TYPES and n_panels < 2:
                    continue
                per_type[task_type] = per_type.get(task_type, 0) + count
    n_figures = plan["figures_passing_gates"]
    model_records = sum(n for t, n in per_type.items() if t != "multi_image_spatial")
    non_exempt = sum(n for t, n in per_type.items()
                     if t not in ("multi_image_spatial", "multi_choice"))
    plan["planned_calls"] = {
        "stage1": n_figures,
        "stage2": n_figures,
        "stage3": passing_panels,
        "stage4": model_records,
        "stage5_max": non_exempt * 3,
    }
    plan["planned_records"] = per_type
    return plan


def run_pipeline(
    corpus_dir: str | Path,
    config,
    checkpoint_dir: str | Path | None = None,
    gateway: Gateway | None = None,
    through_stage: int = 5,
    stop_after_figures: int | None = None,
) -> dict:
    """Run the five stages over every gated figure; returns the run report.

    ``stop_after_figures`` ends the run early with checkpoint status
    "running" (used to exercise resumability); re-invoking continues from
    the checkpoint.
    """
    if gateway is None:
        raise ValueError("run_pipeline needs a gateway (build one via config.build_gateway)")
    config.require_stage_endpoints()
    corpus_dir = Path(corpus_dir)
    output_dir = Path(config.output_dir)
    checkpoint_dir = Path(checkpoint_dir) if checkpoint_dir else Path(config.checkpoint_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    (output_dir / IMAGES_DIR).mkdir(exist_ok=True)
    checkpoint_dir.mkdir(parents=True, exist_ok=True)
    checkpoint_path = checkpoint_dir / CHECKPOINT_FILE
    dataset_path = output_dir / DATASET_FILE
    figures_path = output_dir / FIGURES_FILE

    checkpoint = Checkpoint.load(checkpoint_path)
    if checkpoint is None or checkpoint.status == "complete" and not dataset_path.exists():
        checkpoint = Checkpoint()
    if checkpoint.status == "complete":
        logger.info("checkpoint already complete; nothing to do")
        report_path = output_dir / REPORT_FILE
        if report_path.exists():
            return json.loads(report_path.read_text(encoding="utf-8"))
        return _write_report(output_dir, checkpoint, gateway, config)

    # truncate any torn tail from a killed run
    for path, size in ((dataset_path, checkpoint.dataset_bytes), (figures_path, checkpoint.figures_bytes)):
        if path.exists():
            with open(path, "r+b") as fh:
                fh.truncate(size)
        else:
            path.touch()

    jobs: list[tuple[ArticlePackage, FigureEntry]] = []
    for pkg_dir in discover_packages(corpus_dir):
        try:
            pkg = parse_article(pkg_dir)
        except FigforgeError as exc:
            marker = f"{pkg_dir.name}/*"
            if marker not in checkpoint.completed:
                checkpoint.failures.append({"article_id": pkg_dir.name, "error": f"parse: {exc}"})
                checkpoint.completed.append(marker)
            continue
        license_gate = filter_license(pkg, config.gates.license_allowlist)
        if not license_gate.passed:
            marker = f"{pkg.article_id}/*"
            if marker not in checkpoint.completed:
                checkpoint.rejections.append({
                    "article_id": pkg.article_id, "figure_id": None,
                    "rule": license_gate.rule, "detail": license_gate.detail,
                })
                checkpoint.completed.append(marker)
            continue
        for fig in pkg.figures:
            jobs.append((pkg, fig))

    done = set(checkpoint.completed)
    pending = [(pkg, fig) for pkg, fig in jobs if f"{pkg.article_id}/{fig.figure_id}" not in done]

    processed_now = 0
    stopped_early = False
    classifier = shared_classifier(config)
    with open(dataset_path, "ab") as dataset_fh, open(figures_path, "ab") as figures_fh:
        with ThreadPoolExecutor(max_workers=config.workers) as executor:
            futures = [
                executor.submit(_process_figure, pkg, fig, config, gateway, through_stage,
                                classifier)
                for pkg, fig in pending
            ]
            for future in futures:
                if stopped_early:
                    future.cancel()
                    continue
                outcome = future.result()
                for rel_path, data in outcome.image_files.items():
                    target = output_dir / rel_path
                    target.write_bytes(data)
                if outcome.rejection:
                    checkpoint.rejections.append(outcome.rejection)
                if outcome.failure:
                    checkpoint.failures.append({
                        "article_id": outcome.article_id, "figure_id": outcome.figure_id,
                        "error": outcome.failure,
                    })
                if outcome.figure_meta and not outcome.failure:
                    figures_fh.write(_jsonl_line(outcome.figure_meta))
                    figures_fh.flush()
                for record in outcome.records:
                    dataset_fh.write(_jsonl_line(record.to_json()))
                checkpoint.records_emitted += len(outcome.records)
                checkpoint.pruned_panels += len(outcome.pruned_panels)
                dataset_fh.flush()
                checkpoint.completed.append(outcome.key)
                checkpoint.dataset_bytes = dataset_fh.tell()
                checkpoint.figures_bytes = figures_fh.tell()
                checkpoint.save(checkpoint_path)
                processed_now += 1
                if stop_after_figures is not None and processed_now >= stop_after_figures:
                    logger.info("stopping early after %d figures (test hook)", processed_now)
                    stopped_early = True

    if stopped_early:
        return {"status": "running", "checkpoint": checkpoint.to_json()}

    checkpoint.status = "complete"
    checkpoint.save(checkpoint_path)
    return _write_report(output_dir, checkpoint, gateway, config)


def _write_report(output_dir: Path, checkpoint: Checkpoint, gateway: Gateway, config) -> dict:
    gate_counts = {"license": 0, "compound_caption_length": 0, "sub_caption_length": 0, "medical_ratio": 0}
    for rejection in checkpoint.rejections:
        gate_counts[rejection["rule"]] += 1
    dataset_path = output_dir / DATASET_FILE
    digest = hashlib.sha256(dataset_path.read_bytes()).hexdigest() if dataset_path.exists() else None
    stage_stats = {}
    snapshot = gateway.stats.snapshot()
    for role in ("stage1", "stage2", "stage3", "stage4", "stage5", "embed", "judge", "tagger"):
        if role in config.endpoints and config.endpoints[role].endpoint_id in snapshot:
            stage_stats[role] = snapshot[config.endpoints[role].endpoint_id]
    report = {
        "status": "complete",
        "figures_completed": len(checkpoint.completed),
        "records_emitted": checkpoint.records_emitted,
        "gate_rejections": gate_counts,
        "rejections": checkpoint.rejections,
        "failures": checkpoint.failures,
        "pruned_panels": checkpoint.pruned_panels,
        "dataset_digest": digest,
        "stage_stats": stage_stats,
    }
    (output_dir / REPORT_FILE).write_text(json.dumps(report, indent=2, ensure_ascii=False), encoding="utf-8")
    return report
