"""Corpus characteristic statistics: panel counts, text lengths, resolutions,
and model-tagged modality/anatomical-system distributions.

Statistics run over every figure that parses and decodes, before gating, so
they describe the raw corpus a run would consume.
"""
from __future__ import annotations

import logging
from pathlib import Path

from ..corpus import extract_inline_text, parse_article, word_count
from ..errors import DegenerateImage, FigforgeError, ImageDecodeError
from ..figures import split_panels
from ..figures.segment import decode_image
from ..forge import prompts
from ..forge.pipeline import discover_packages
from ..gateway import CHAT, Gateway, ModelCall, ModelEndpointConfig, SamplingParams, TextPart

logger = logging.getLogger(__name__)

MODALITY_VOCAB = (
    "microscopy",
    "histopathology",
    "multimodal composite",
    "MRI",
    "CT",
    "PET-CT",
    "ultrasound",
    "X-ray",
    "clinical photography",
    "other",
)

ANATOMY_VOCAB = (
    "neurological",
    "musculoskeletal",
    "cardiovascular",
    "gastrointestinal",
    "respiratory",
    "ophthalmology",
    "reproductive",
    "dermatology",
    "other",
)


def _tag_figure(caption: str, gateway: Gateway, endpoint: ModelEndpointConfig) -> tuple[str, str]:
    prompt = prompts.CORPUS_TAG.format(
        caption=caption,
        modalities=", ".join(MODALITY_VOCAB),
        systems=", ".join(ANATOMY_VOCAB),
    )
    call = ModelCall(kind=CHAT, system_prompt=prompts.SYSTEM_PROMPT,
                     user_parts=(TextPart(prompt),), sampling=SamplingParams(temperature=0.0))
    reply = gateway.invoke(endpoint, call)
    modality = anatomy = "other"
    for line in (reply.text or "").splitlines():
        if line.startswith("MODALITY:"):
            modality = line.split(":", 1)[1].strip()
        elif line.startswith("ANATOMY:"):
            anatomy = line.split(":", 1)[1].strip()

    def normalize(term: str, vocab: tuple[str, ...]) -> str:
        for entry in vocab:
            if term.casefold() == entry.casefold():
                return entry
        return "other"

    return normalize(modality, MODALITY_VOCAB), normalize(anatomy, ANATOMY_VOCAB)


def corpus_statistics(
    corpus_dir: str | Path,
    gateway: Gateway | None = None,
    tagger_endpoint: ModelEndpointConfig | None = None,
    min_panel: int = 64,
    min_gutter: int = 5,
) -> dict:
    """Means plus modality/anatomy distributions (percentages sum to 100).

    Tagging needs a gateway and endpoint; without them the distributions are
    omitted and only the deterministic means are reported.
    """
    figures = 0
    panel_total = 0
    caption_words_total = 0
    inline_words_total = 0
    width_total = 0
    height_total = 0
    modality_counts: dict[str, int] = {}
    anatomy_counts: dict[str, int] = {}

    for pkg_dir in discover_packages(Path(corpus_dir)):
        try:
            pkg = parse_article(pkg_dir)
        except FigforgeError as exc:
            logger.warning("skipping %s: %s", pkg_dir.name, exc)
            continue
        for fig in pkg.figures:
            try:
                gray = decode_image((pkg.root / fig.graphic_path).read_bytes())
                panels = split_panels(gray, min_panel, min_gutter)
            except (ImageDecodeError, DegenerateImage) as exc:
                logger.warning("skipping %s/%s: %s", pkg.article_id, fig.figure_id, exc)
                continue
            figures += 1
            panel_total += len(panels)
            caption_words_total += word_count(fig.caption)
            inline_words_total += word_count(extract_inline_text(pkg, fig.figure_id))
            height, width = gray.shape
            width_total += width
            height_total += height
            if gateway is not None and tagger_endpoint is not None:
                modality, anatomy = _tag_figure(fig.caption, gateway, tagger_endpoint)
                modality_counts[modality] = modality_counts.get(modality, 0) + 1
                anatomy_counts[anatomy] = anatomy_counts.get(anatomy, 0) + 1

    if figures == 0:
        return {"figures": 0}

    def distribution(counts: dict[str, int], vocab: tuple[str, ...]) -> dict[str, float]:
        return {term: counts.get(term, 0) / figures * 100.0 for term in vocab}

    stats = {
        "figures": figures,
        "mean_subfigures": panel_total / figures,
        "mean_caption_words": caption_words_total / figures,
        "mean_inline_words": inline_words_total / figures,
        "mean_width": width_total / figures,
        "mean_height": height_total / figures,
    }
    if modality_counts or anatomy_counts:
        stats["modality_pct"] = distribution(modality_counts, MODALITY_VOCAB)
        stats["anatomy_pct"] = distribution(anatomy_counts, ANATOMY_VOCAB)
    return stats
