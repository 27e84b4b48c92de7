"""Exact-letter multi-choice scoring with macro-averaged class metrics."""
from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import EmptyItemSet


@dataclass(frozen=True)
class MultiChoiceItem:
    predicted_letter: str
    gold_letter: str
    options_count: int = 4

    def __post_init__(self):
        legal = [chr(ord("A") + i) for i in range(self.options_count)]
        for name, letter in (("predicted", self.predicted_letter), ("gold", self.gold_letter)):
            if letter not in legal:
                raise ValueError(f"{name} letter {letter!r} outside A..{legal[-1]}")


def extract_option_letter(prediction: str, options_count: int = 4) -> str | None:
    """Pull the answered option letter out of free-form model output.

    Accepts forms like "B", "b.", "(B)", "B) because ...". Returns None when
    no leading option letter is found.
    """
    m = re.match(r"\s*[\(\[]?([A-Za-z])[\)\]\.:,]?(?:\s|$)", prediction or "")
    if not m:
        return None
    letter = m.group(1).upper()
    if ord(letter) - ord("A") >= options_count:
        return None
    return letter


def score_multichoice(items: list[MultiChoiceItem]) -> dict[str, float]:
    """Accuracy plus macro precision/recall/F1 over option letters, all x100.

    A letter participates in the macro average iff it occurs in gold or in
    predictions.
    """
    if not items:
        raise EmptyItemSet("score_multichoice needs at least one item")
    correct = sum(1 for item in items if item.predicted_letter == item.gold_letter)
    accuracy = correct / len(items) * 100.0

    classes = sorted({i.gold_letter for i in items} | {i.predicted_letter for i in items})
    precisions, recalls, f1s = [], [], []
    for letter in classes:
        tp = sum(1 for i in items if i.predicted_letter == letter and i.gold_letter == letter)
        fp = sum(1 for i in items if i.predicted_letter == letter and i.gold_letter != letter)
        fn = sum(1 for i in items if i.predicted_letter != letter and i.gold_letter == letter)
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        precisions.append(precision)
        recalls.append(recall)
        f1s.append(f1)

    def macro(values: list[float]) -> float:
        return sum(values) / len(values) * 100.0

    return {
        "accuracy": accuracy,
        "macro_f1": macro(f1s),
        "macro_recall": macro(recalls),
        "macro_precision": macro(precisions),
    }
