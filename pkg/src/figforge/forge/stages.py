"""The five instruction-generation stages.

Stages 1-3 build the ContextBundle (inline summary, knowledge notes, panel
descriptions); stage 4 turns a bundle into task-typed draft records; stage 5
screens and refines answer leakage. Every model call's cache digest is
recorded so provenance always resolves against the reply cache.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, replace

from ..errors import (
    AuthError,
    GatewayError,
    FigureRejected,
    InsufficientPanels,
    UnparseableReply,
)
from ..figures import CompoundFigureRecord, derive_spatial_relation, relation_phrase
from ..gateway import (
    CHAT,
    VISION_CHAT,
    Gateway,
    ImagePart,
    ModelCall,
    ModelEndpointConfig,
    SamplingParams,
    TextPart,
    cache_key,
)
from . import prompts
from .leakage import shared_ngrams, hard_redact
from .records import (
    EXEMPT_TYPES,
    OPTION_LETTERS,
    ContextBundle,
    InstructionRecord,
    KnowledgeNote,
    LeakageReport,
    Provenance,
    TASK_TYPES,
)

SPATIAL_QUESTION = (
    "What is the spatial relationship between the sub-image showing {desc_a} "
    "and the sub-image showing {desc_b}?"
)
SPATIAL_ANSWER = "{desc_a} is {phrase} {desc_b}."

QA_TAGS = ("CONTEXT", "QUESTION", "ANSWER", "DISTRACTOR")

MAX_REFINE_ITERATIONS = 3
STAGE3_MAX_FAILURE_FRACTION = 0.25


# -- call plumbing -------------------------------------------------------------

def _chat(
    gateway: Gateway,
    endpoint: ModelEndpointConfig,
    prompt: str,
    images: tuple[bytes, ...] = (),
    seed: int | None = None,
) -> tuple[str, str]:
    """Issue one chat/vision call; returns (reply text, cache digest)."""
    parts: tuple = (TextPart(prompt),) + tuple(ImagePart.from_bytes(b) for b in images)
    call = ModelCall(
        kind=VISION_CHAT if images else CHAT,
        system_prompt=prompts.SYSTEM_PROMPT,
        user_parts=parts,
        sampling=SamplingParams(temperature=0.0, seed=seed),
    )
    digest = cache_key(endpoint, call).digest
    reply = gateway.invoke(endpoint, call)
    return (reply.text or ""), digest


def _chat_with_repair(gateway, endpoint, prompt, parse, images=(), seed=None):
    """Parse a reply; on skeleton violation retry once with a repair note."""
    digests = []
    text, digest = _chat(gateway, endpoint, prompt, images, seed)
    digests.append(digest)
    try:
        return parse(text), digests
    except UnparseableReply:
        pass
    text, digest = _chat(gateway, endpoint, prompt + prompts.REPAIR_NOTE, images, seed)
    digests.append(digest)
    try:
        return parse(text), digests
    except UnparseableReply as exc:
        raise UnparseableReply(f"reply violated skeleton twice: {exc}", reply=text) from exc


def parse_tagged_blocks(reply: str, tags: tuple[str, ...] = QA_TAGS) -> dict[str, list[str]]:
    """Collect ``TAG: content`` blocks; untagged lines extend the open block."""
    blocks: dict[str, list[str]] = {}
    current: str | None = None
    for line in reply.splitlines():
        stripped = line.strip()
        matched = None
        for tag in tags:
            if stripped.startswith(tag + ":"):
                matched = tag
                break
        if matched:
            blocks.setdefault(matched, []).append(stripped[len(matched) + 1:].strip())
            current = matched
        elif current and stripped:
            blocks[current][-1] = (blocks[current][-1] + " " + stripped).strip()
    return blocks


def _parse_qa(reply: str, want_distractors: int = 0) -> dict:
    blocks = parse_tagged_blocks(reply)
    for tag in ("CONTEXT", "QUESTION", "ANSWER"):
        if not blocks.get(tag) or not blocks[tag][0]:
            raise UnparseableReply(f"missing {tag} block", reply=reply)
    distractors = [d for d in blocks.get("DISTRACTOR", []) if d]
    if want_distractors and len(distractors) != want_distractors:
        raise UnparseableReply(
            f"expected {want_distractors} DISTRACTOR blocks, got {len(distractors)}", reply=reply
        )
    return {
        "context": blocks["CONTEXT"][0],
        "question": blocks["QUESTION"][0],
        "answer": blocks["ANSWER"][0],
        "distractors": distractors,
    }


# -- stage results --------------------------------------------------------------

@dataclass(frozen=True)
class Stage1Result:
    summary: str
    caption_only: bool
    digests: list[str]


@dataclass(frozen=True)
class Stage2Result:
    notes: list[KnowledgeNote]
    digests: list[str]


@dataclass(frozen=True)
class Stage3Result:
    descriptions: dict[str, str]
    failed_panels: list[str]
    digests: list[str]


@dataclass(frozen=True)
class ImageRefs:
    """Where a record's images live, as written into the dataset."""
    compound: str
    panels: dict[str, str]

    @classmethod
    def placeholder(cls, figure: CompoundFigureRecord) -> "ImageRefs":
        return cls(
            compound=f"figure/{figure.figure_id}",
            panels={p.panel_id: f"panel/{figure.figure_id}/{p.panel_id}" for p in figure.panels},
        )


# -- stages 1..3 ------------------------------------------------------------------

def stage1_summarize(
    inline_text: str,
    caption: str,
    gateway: Gateway,
    endpoint: ModelEndpointConfig,
    seed: int | None = None,
) -> Stage1Result:
    """Condense figure-citing inline text into a clinical narrative.

    Empty inline text degrades to a caption-only summary and flags the
    result, rather than failing the figure.
    """
    if not caption:
        raise ValueError("stage 1 needs a non-empty caption")
    caption_only = not inline_text.strip()
    prompt = prompts.STAGE1_SUMMARY.format(caption=caption, inline_text=inline_text)
    text, digest = _chat(gateway, endpoint, prompt, seed=seed)
    summary = text.strip()
    if not summary:
        summary = caption
    return Stage1Result(summary=summary, caption_only=caption_only, digests=[digest])


def _parse_knowledge(reply: str) -> list[KnowledgeNote]:
    blocks = parse_tagged_blocks(reply, tags=("CONCEPT", "EXPLANATION"))
    concepts = blocks.get("CONCEPT", [])
    explanations = blocks.get("EXPLANATION", [])
    if not concepts or len(concepts) != len(explanations):
        raise UnparseableReply("reply lacks paired CONCEPT/EXPLANATION blocks", reply=reply)
    notes = []
    seen = set()
    for concept, explanation in zip(concepts, explanations):
        if not concept or not explanation:
            raise UnparseableReply("empty CONCEPT or EXPLANATION", reply=reply)
        if concept.casefold() in seen:
            continue
        seen.add(concept.casefold())
        notes.append(KnowledgeNote(concept=concept, explanation=explanation))
    return notes


def stage2_complement(
    caption: str,
    summary: str,
    gateway: Gateway,
    endpoint: ModelEndpointConfig,
    seed: int | None = None,
) -> Stage2Result:
    """Extract concept/explanation notes; dedup concepts case-insensitively."""
    if not caption:
        raise ValueError("stage 2 needs a non-empty caption")
    prompt = prompts.STAGE2_KNOWLEDGE.format(caption=caption, summary=summary)
    notes, digests = _chat_with_repair(gateway, endpoint, prompt, _parse_knowledge, seed=seed)
    return Stage2Result(notes=notes, digests=digests)


def stage3_describe_panels(
    figure: CompoundFigureRecord,
    crops: list[bytes],
    summary: str,
    gateway: Gateway,
    endpoint: ModelEndpointConfig,
    seed: int | None = None,
    max_failure_fraction: float = STAGE3_MAX_FAILURE_FRACTION,
) -> Stage3Result:
    """One grounded description per panel crop.

    Per-panel backend failures are tolerated up to ``max_failure_fraction``
    of the figure's panels; beyond that the figure is rejected.
    """
    if len(crops) != len(figure.panels):
        raise ValueError("crops must correspond one-to-one with figure.panels")
    descriptions: dict[str, str] = {}
    failed: list[str] = []
    digests: list[str] = []
    for panel, crop in zip(figure.panels, crops):
        label = panel.label or panel.panel_id
        prompt = prompts.STAGE3_PANEL.format(
            label=label,
            sub_caption=figure.sub_captions.get(label, ""),
            summary=summary,
        )
        try:
            text, digest = _chat(gateway, endpoint, prompt, images=(crop,), seed=seed)
        except AuthError:
            raise
        except GatewayError:
            failed.append(panel.panel_id)
            continue
        digests.append(digest)
        description = text.strip()
        if description:
            descriptions[panel.panel_id] = description
        else:
            failed.append(panel.panel_id)
    if len(figure.panels) and len(failed) / len(figure.panels) > max_failure_fraction:
        raise FigureRejected(
            f"figure {figure.figure_id!r}: {len(failed)}/{len(figure.panels)} panel descriptions failed"
        )
    return Stage3Result(descriptions=descriptions, failed_panels=failed, digests=digests)


# -- stage 4 -----------------------------------------------------------------------

def _bundle_sections(bundle: ContextBundle) -> dict[str, str]:
    return {
        "summary": bundle.inline_summary,
        "knowledge": "\n".join(f"{n.concept}: {n.explanation}" for n in bundle.knowledge_notes),
        "panel_descriptions": "\n".join(
            f"{pid}: {desc}" for pid, desc in bundle.panel_descriptions.items()
        ),
        "caption": bundle.caption,
    }


def _base_provenance(figure: CompoundFigureRecord) -> Provenance:
    return Provenance(
        article_id="standalone",
        figure_id=figure.figure_id,
        panel_ids=[],
        stage_model_ids={},
        prompt_digests={},
    )


def stage4_generate(
    task_type: str,
    bundle: ContextBundle,
    figure: CompoundFigureRecord,
    gateway: Gateway,
    endpoint: ModelEndpointConfig,
    seed: int,
    refs: ImageRefs | None = None,
    base_provenance: Provenance | None = None,
    record_index: int = 0,
    tau: float = 0.05,
) -> InstructionRecord:
    """Draft one record of ``task_type`` from a completed bundle.

    The spatial type never calls a model: a seeded panel pair, the geometric
    relation, and fixed question/answer templates fully determine it.
    """
    if task_type not in TASK_TYPES:
        raise ValueError(f"unknown task type {task_type!r}")
    refs = refs or ImageRefs.placeholder(figure)
    base = base_provenance or _base_provenance(figure)
    usable = [p for p in figure.panels if p.panel_id in bundle.panel_descriptions]
    record_id = f"{base.article_id}.{figure.figure_id}.{task_type}.{record_index:02d}"
    rng = random.Random(seed)
    sections = _bundle_sections(bundle)

    def provenance(panel_ids: list[str], digests: list[str]) -> Provenance:
        prov = replace(
            base,
            panel_ids=panel_ids,
            stage_model_ids=dict(base.stage_model_ids),
            prompt_digests={k: list(v) for k, v in base.prompt_digests.items()},
        )
        if digests:
            prov.stage_model_ids["stage4"] = endpoint.endpoint_id
            prov.prompt_digests["stage4"] = digests
        else:
            prov.stage_model_ids.setdefault("stage4", "template")
        return prov

    if task_type == "multi_image_spatial":
        if len(usable) < 2:
            raise InsufficientPanels(f"{figure.figure_id!r} has {len(usable)} described panels; spatial needs 2")
        idx_a, idx_b = rng.sample(range(len(usable)), 2)
        a, b = usable[idx_a], usable[idx_b]
        relation = derive_spatial_relation(a, b, figure.image_width, figure.image_height, tau)
        desc_a = bundle.panel_descriptions[a.panel_id]
        desc_b = bundle.panel_descriptions[b.panel_id]
        return InstructionRecord(
            record_id=record_id,
            task_type=task_type,
            images=[refs.panels[a.panel_id], refs.panels[b.panel_id]],
            context=bundle.inline_summary,
            question=SPATIAL_QUESTION.format(desc_a=desc_a, desc_b=desc_b),
            answer=SPATIAL_ANSWER.format(desc_a=desc_a, phrase=relation_phrase(relation), desc_b=desc_b),
            provenance=provenance([a.panel_id, b.panel_id], []),
        )

    if task_type == "multi_image_multi_subimage":
        if len(usable) < 2:
            raise InsufficientPanels(f"{figure.figure_id!r}: multi-subimage needs >=2 described panels")
        prompt = prompts.STAGE4_MULTI_SUBIMAGE.format(**sections)
        parsed, digests = _chat_with_repair(gateway, endpoint, prompt, _parse_qa, seed=seed)
        panel_ids = [p.panel_id for p in usable]
        return InstructionRecord(
            record_id=record_id, task_type=task_type,
            images=[refs.panels[pid] for pid in panel_ids],
            context=parsed["context"], question=parsed["question"], answer=parsed["answer"],
            provenance=provenance(panel_ids, digests),
        )

    if task_type == "multi_image_single_subimage":
        if len(usable) < 2:
            raise InsufficientPanels(f"{figure.figure_id!r}: single-subimage needs a compound context")
        focus = usable[rng.randrange(len(usable))]
        prompt = prompts.STAGE4_SINGLE_SUBIMAGE.format(
            focus_panel=focus.panel_id, **sections
        )
        parsed, digests = _chat_with_repair(gateway, endpoint, prompt, _parse_qa, seed=seed)
        return InstructionRecord(
            record_id=record_id, task_type=task_type,
            images=[refs.panels[p.panel_id] for p in usable],
            context=parsed["context"], question=parsed["question"], answer=parsed["answer"],
            provenance=provenance([focus.panel_id], digests),
        )

    if task_type == "single_image":
        prompt = prompts.STAGE4_COMPOUND.format(**sections)
        parsed, digests = _chat_with_repair(gateway, endpoint, prompt, _parse_qa, seed=seed)
        return InstructionRecord(
            record_id=record_id, task_type=task_type,
            images=[refs.compound],
            context=parsed["context"], question=parsed["question"], answer=parsed["answer"],
            provenance=provenance([p.panel_id for p in usable], digests),
        )

    if task_type == "text_only":
        prompt = prompts.STAGE4_TEXT_ONLY.format(
            summary=sections["summary"], knowledge=sections["knowledge"], caption=sections["caption"]
        )
        parsed, digests = _chat_with_repair(gateway, endpoint, prompt, _parse_qa, seed=seed)
        return InstructionRecord(
            record_id=record_id, task_type=task_type, images=[],
            context=parsed["context"], question=parsed["question"], answer=parsed["answer"],
            provenance=provenance([], digests),
        )

    # multi_choice
    prompt = prompts.STAGE4_MULTI_CHOICE.format(**sections)
    parsed, digests = _chat_with_repair(
        gateway, endpoint, prompt, lambda r: _parse_qa(r, want_distractors=3), seed=seed
    )
    entries = [(parsed["answer"], True)] + [(d, False) for d in parsed["distractors"]]
    rng.shuffle(entries)
    options = [text for text, _ in entries]
    correct_option = OPTION_LETTERS[[flag for _, flag in entries].index(True)]
    return InstructionRecord(
        record_id=record_id, task_type=task_type,
        images=[refs.compound],
        context=parsed["context"], question=parsed["question"], answer=parsed["answer"],
        options=options, correct_option=correct_option,
        provenance=provenance([p.panel_id for p in usable], digests),
    )


# -- stage 5 ------------------------------------------------------------------------

def stage5_refine(
    record: InstructionRecord,
    gateway: Gateway,
    endpoint: ModelEndpointConfig,
    seed: int | None = None,
    max_iterations: int = MAX_REFINE_ITERATIONS,
) -> tuple[InstructionRecord, LeakageReport]:
    """Remove context/answer 4-gram overlap.

    Spatial and multi-choice records pass through untouched. Otherwise the
    model may rewrite the context up to ``max_iterations`` times; persisting
    leakage is removed by deterministic sentence redaction, so the final
    context never shares a 4-gram with the answer.
    """
    if record.task_type in EXEMPT_TYPES:
        return record, LeakageReport([], 0, False)

    initial = shared_ngrams(record.context, record.answer)
    if not initial:
        return record, LeakageReport([], 0, False)

    context = record.context
    leaked = initial
    iterations = 0
    digests: list[str] = []
    while leaked and iterations < max_iterations:
        iterations += 1
        prompt = prompts.STAGE5_REFINE.format(
            context=context,
            answer=record.answer,
            phrases="\n".join(leaked),
            attempt=iterations,
        )
        text, digest = _chat(gateway, endpoint, prompt, seed=seed)
        digests.append(digest)
        rewritten = text.strip()
        if rewritten:
            context = rewritten
        leaked = shared_ngrams(context, record.answer)

    hard_redacted = False
    if leaked:
        context = hard_redact(context, record.answer)
        hard_redacted = True

    refined = context != record.context
    result = record.with_context(context, refined=refined)
    if digests:
        result.provenance.stage_model_ids["stage5"] = endpoint.endpoint_id
        result.provenance.prompt_digests["stage5"] = digests
    return result, LeakageReport(initial, iterations, hard_redacted)
