from .package import ArticlePackage, FigureEntry, Paragraph, parse_article, write_manifest
from .gates import GateDecision, apply_caption_gate, filter_license, word_count, DEFAULT_LICENSE_ALLOWLIST
from .package import extract_inline_text

__all__ = [
    "ArticlePackage",
    "FigureEntry",
    "Paragraph",
    "GateDecision",
    "DEFAULT_LICENSE_ALLOWLIST",
    "parse_article",
    "write_manifest",
    "extract_inline_text",
    "filter_license",
    "apply_caption_gate",
    "word_count",
]
