"""Instruction records, context bundles, and the output-schema validator."""
from __future__ import annotations

from dataclasses import dataclass, replace

TASK_TYPES = (
    "multi_image_multi_subimage",
    "multi_image_single_subimage",
    "multi_image_spatial",
    "single_image",
    "text_only",
    "multi_choice",
)
MULTI_IMAGE_TYPES = TASK_TYPES[:3]
# spatial answers are template-deterministic and option sets must stay fixed,
# so these two types skip context refinement
EXEMPT_TYPES = ("multi_image_spatial", "multi_choice")

OPTION_LETTERS = ("A", "B", "C", "D")


@dataclass(frozen=True)
class KnowledgeNote:
    concept: str
    explanation: str


@dataclass
class ContextBundle:
    figure_id: str
    inline_summary: str
    knowledge_notes: list[KnowledgeNote]
    panel_descriptions: dict[str, str]
    caption: str

    def __post_init__(self):
        concepts = [n.concept.casefold() for n in self.knowledge_notes]
        if len(concepts) != len(set(concepts)):
            raise ValueError(f"bundle for {self.figure_id!r}: duplicate knowledge concepts")

    def covers(self, panel_ids: list[str]) -> bool:
        return all(pid in self.panel_descriptions for pid in panel_ids)


@dataclass
class Provenance:
    article_id: str
    figure_id: str
    panel_ids: list[str]
    stage_model_ids: dict[str, str]
    prompt_digests: dict[str, list[str]]
    refined: bool = False
    stage1_caption_only: bool = False

    def to_json(self) -> dict:
        return {
            "article_id": self.article_id,
            "figure_id": self.figure_id,
            "panel_ids": list(self.panel_ids),
            "stage_model_ids": dict(self.stage_model_ids),
            "prompt_digests": {k: list(v) for k, v in self.prompt_digests.items()},
            "refined": self.refined,
            "stage1_caption_only": self.stage1_caption_only,
        }

    @classmethod
    def from_json(cls, data: dict) -> "Provenance":
        return cls(
            article_id=data["article_id"],
            figure_id=data["figure_id"],
            panel_ids=list(data["panel_ids"]),
            stage_model_ids=dict(data["stage_model_ids"]),
            prompt_digests={k: list(v) for k, v in data["prompt_digests"].items()},
            refined=bool(data["refined"]),
            stage1_caption_only=bool(data.get("stage1_caption_only", False)),
        )


@dataclass
class InstructionRecord:
    record_id: str
    task_type: str
    images: list[str]
    context: str
    question: str
    answer: str
    provenance: Provenance
    options: list[str] | None = None
    correct_option: str | None = None

    def with_context(self, context: str, refined: bool) -> "InstructionRecord":
        return replace(self, context=context,
                       provenance=replace(self.provenance, refined=refined))

    def to_json(self) -> dict:
        return {
            "record_id": self.record_id,
            "task_type": self.task_type,
            "images": list(self.images),
            "context": self.context,
            "question": self.question,
            "answer": self.answer,
            "options": list(self.options) if self.options is not None else None,
            "correct_option": self.correct_option,
            "provenance": self.provenance.to_json(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "InstructionRecord":
        return cls(
            record_id=data["record_id"],
            task_type=data["task_type"],
            images=list(data["images"]),
            context=data["context"],
            question=data["question"],
            answer=data["answer"],
            options=list(data["options"]) if data.get("options") is not None else None,
            correct_option=data.get("correct_option"),
            provenance=Provenance.from_json(data["provenance"]),
        )


@dataclass(frozen=True)
class LeakageReport:
    overlapping_ngrams: list[str]
    iterations_used: int
    hard_redacted: bool

    def __post_init__(self):
        if not 0 <= self.iterations_used <= 3:
            raise ValueError("iterations_used outside 0..3")


def validate_record(data: dict) -> list[str]:
    """Schema check on one serialized record; returns violation strings.

    Runs over every line of an output file, so it works on plain dicts.
    """
    problems: list[str] = []

    def need(condition: bool, message: str) -> None:
        if not condition:
            problems.append(message)

    need(bool(data.get("record_id")), "record_id empty")
    task_type = data.get("task_type")
    need(task_type in TASK_TYPES, f"unknown task_type {task_type!r}")
    images = data.get("images")
    need(isinstance(images, list), "images must be a list")
    need(isinstance(data.get("question"), str) and data["question"].strip() != "", "question empty")
    need(isinstance(data.get("answer"), str) and data["answer"].strip() != "", "answer empty")
    need(isinstance(data.get("context"), str), "context missing")

    options = data.get("options")
    correct = data.get("correct_option")
    if task_type == "multi_choice":
        need(isinstance(options, list) and len(options) == 4, "multi_choice needs exactly 4 options")
        need(correct in OPTION_LETTERS, f"correct_option {correct!r} not in A..D")
        if isinstance(options, list) and correct in OPTION_LETTERS and len(options) == 4:
            need(options[OPTION_LETTERS.index(correct)] == data.get("answer"),
                 "options[correct_option] must equal answer")
    else:
        need(options is None, f"{task_type} must not carry options")
        need(correct is None, f"{task_type} must not carry correct_option")

    provenance = data.get("provenance")
    if not isinstance(provenance, dict):
        problems.append("provenance missing")
        return problems
    for key in ("article_id", "figure_id"):
        need(bool(provenance.get(key)), f"provenance.{key} empty")
    need(isinstance(provenance.get("panel_ids"), list), "provenance.panel_ids missing")
    need(isinstance(provenance.get("stage_model_ids"), dict) and provenance["stage_model_ids"],
         "provenance.stage_model_ids empty")
    need(isinstance(provenance.get("prompt_digests"), dict), "provenance.prompt_digests missing")
    need(isinstance(provenance.get("refined"), bool), "provenance.refined missing")

    if isinstance(images, list):
        if task_type == "text_only":
            need(images == [], "text_only records carry no images")
        elif task_type in MULTI_IMAGE_TYPES:
            panel_ids = provenance.get("panel_ids") or []
            need(len(images) >= 2 or (len(images) == 1 and len(panel_ids) >= 2),
                 "multi-image records need >=2 images or one compound image referencing >=2 panels")
        else:
            need(len(images) == 1, f"{task_type} records carry exactly one image")
    return problems
