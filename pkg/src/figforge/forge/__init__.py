from .records import (
    EXEMPT_TYPES,
    MULTI_IMAGE_TYPES,
    TASK_TYPES,
    ContextBundle,
    InstructionRecord,
    KnowledgeNote,
    LeakageReport,
    Provenance,
    validate_record,
)
from .leakage import content_ngrams, hard_redact, shared_ngrams
from .stages import (
    ImageRefs,
    stage1_summarize,
    stage2_complement,
    stage3_describe_panels,
    stage4_generate,
    stage5_refine,
)
from .pipeline import run_pipeline

__all__ = [
    "TASK_TYPES",
    "MULTI_IMAGE_TYPES",
    "EXEMPT_TYPES",
    "KnowledgeNote",
    "ContextBundle",
    "Provenance",
    "InstructionRecord",
    "LeakageReport",
    "validate_record",
    "content_ngrams",
    "shared_ngrams",
    "hard_redact",
    "ImageRefs",
    "stage1_summarize",
    "stage2_complement",
    "stage3_describe_panels",
    "stage4_generate",
    "stage5_refine",
    "run_pipeline",
]
