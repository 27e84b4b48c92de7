"""Pluggable panel classifiers and the medical-content gate helper.

The pipeline never assumes a particular model: anything implementing
PanelClassifier works. Shipped defaults are deliberately simple — the gate
logic, not the classifier, is the contract.
"""
from __future__ import annotations

from typing import Protocol, runtime_checkable

import numpy as np

from ..errors import ClassifierFailure
from .boxes import PanelBox


@runtime_checkable
class PanelClassifier(Protocol):
    """Decides whether one panel shows medical content.

    ``concurrent_safe`` declares whether the classifier may be called from
    multiple workers at once; the pipeline serializes calls when it is False.
    """

    concurrent_safe: bool

    def is_medical(self, panel: PanelBox, crop: np.ndarray | None) -> bool: ...


class AlwaysMedicalClassifier:
    """Pass-through default: every panel counts as medical."""

    concurrent_safe = True

    def is_medical(self, panel: PanelBox, crop: np.ndarray | None) -> bool:
        return True


class BrightnessClassifier:
    """Crude heuristic: panels that are mostly near-white look like charts or
    text blocks rather than medical imagery."""

    concurrent_safe = True

    def __init__(self, white_level: int = 250, white_fraction: float = 0.8):
        self.white_level = white_level
        self.white_fraction = white_fraction

    def is_medical(self, panel: PanelBox, crop: np.ndarray | None) -> bool:
        if crop is None:
            raise ClassifierFailure(panel.panel_id, "brightness classifier needs pixel data")
        white = float(np.mean(np.asarray(crop) >= self.white_level))
        return white < self.white_fraction


class StubClassifier:
    """Test double: verdict per panel_id, default medical."""

    concurrent_safe = True

    def __init__(self, non_medical: set[str] | None = None, failing: set[str] | None = None):
        self.non_medical = set(non_medical or ())
        self.failing = set(failing or ())

    def is_medical(self, panel: PanelBox, crop: np.ndarray | None) -> bool:
        if panel.panel_id in self.failing:
            raise ClassifierFailure(panel.panel_id, "stubbed failure")
        return panel.panel_id not in self.non_medical


def medical_content_ratio(
    panels: list[PanelBox],
    classifier: PanelClassifier,
    crops: dict[str, np.ndarray] | None = None,
) -> float:
    """Area-weighted fraction of panel area classified medical.

    ClassifierFailure propagates with its panel_id attached; the caller
    decides whether that sinks the figure.
    """
    if not panels:
        raise ValueError("medical_content_ratio needs at least one panel")
    total = 0
    medical = 0
    for panel in panels:
        crop = (crops or {}).get(panel.panel_id)
        try:
            verdict = classifier.is_medical(panel, crop)
        except ClassifierFailure:
            raise
        except Exception as exc:
            raise ClassifierFailure(panel.panel_id, str(exc)) from exc
        total += panel.area
        if verdict:
            medical += panel.area
    return medical / total
