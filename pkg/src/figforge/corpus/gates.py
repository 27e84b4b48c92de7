"""Deterministic corpus gates: license, caption length, medical ratio.

All gates are pure functions returning a GateDecision; they never raise on
ordinary input so a run can account for every rejection.
"""
from __future__ import annotations

from dataclasses import dataclass

from .package import ArticlePackage, FigureEntry

DEFAULT_LICENSE_ALLOWLIST = frozenset({"CC BY", "CC BY-SA", "CC0", "CC BY-NC"})

RULE_LICENSE = "license"
RULE_COMPOUND_CAPTION = "compound_caption_length"
RULE_SUB_CAPTION = "sub_caption_length"
RULE_MEDICAL_RATIO = "medical_ratio"

GATE_RULES = (RULE_LICENSE, RULE_COMPOUND_CAPTION, RULE_SUB_CAPTION, RULE_MEDICAL_RATIO)


@dataclass(frozen=True)
class GateDecision:
    passed: bool
    rule: str
    detail: str = ""

    def __post_init__(self):
        if self.rule not in GATE_RULES:
            raise ValueError(f"unknown gate rule {self.rule!r}")
        if not self.passed and not self.detail:
            raise ValueError("failed GateDecision needs a non-empty detail")


def word_count(text: str) -> int:
    """Number of maximal non-whitespace runs."""
    return len(text.split())


def filter_license(pkg: ArticlePackage, allowlist: frozenset[str] | set[str] = DEFAULT_LICENSE_ALLOWLIST) -> GateDecision:
    """Pass iff the package license matches the allowlist, case-insensitively
    after trimming."""
    if not allowlist:
        raise ValueError("license allowlist must be non-empty")
    normalized = {tag.strip().casefold() for tag in allowlist}
    tag = pkg.license.strip().casefold()
    if tag in normalized:
        return GateDecision(True, RULE_LICENSE)
    return GateDecision(False, RULE_LICENSE, f"license {pkg.license!r} not in allowlist")


def apply_caption_gate(
    fig: FigureEntry,
    min_caption_words: int = 50,
    min_sub_caption_words: int = 10,
) -> GateDecision:
    """Pass iff the compound caption strictly exceeds ``min_caption_words``
    and every sub-caption that exists has at least ``min_sub_caption_words``.

    Figures without sub-captions are not penalized for lacking them.
    """
    n = word_count(fig.caption)
    if n <= min_caption_words:
        return GateDecision(
            False, RULE_COMPOUND_CAPTION,
            f"caption has {n} words (needs more than {min_caption_words})",
        )
    for label, sub in fig.sub_captions.items():
        m = word_count(sub)
        if m < min_sub_caption_words:
            return GateDecision(
                False, RULE_SUB_CAPTION,
                f"sub-caption {label!r} has {m} words (needs at least {min_sub_caption_words})",
            )
    return GateDecision(True, RULE_COMPOUND_CAPTION)


def apply_medical_gate(ratio: float, threshold: float = 0.9) -> GateDecision:
    """Pass iff the medical content ratio strictly exceeds the threshold."""
    if ratio > threshold:
        return GateDecision(True, RULE_MEDICAL_RATIO)
    return GateDecision(
        False, RULE_MEDICAL_RATIO,
        f"medical ratio {ratio:.4g} (needs more than {threshold:.4g})",
    )
