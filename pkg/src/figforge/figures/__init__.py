from .boxes import (
    CompoundFigureRecord,
    PanelBox,
    SpatialRelation,
    derive_spatial_relation,
    order_panels,
    relation_phrase,
)
from .classify import (
    AlwaysMedicalClassifier,
    BrightnessClassifier,
    PanelClassifier,
    StubClassifier,
    medical_content_ratio,
)
from .labels import LabelSpan, parse_panel_label_spans, parse_panel_labels
from .segment import split_panels

__all__ = [
    "PanelBox",
    "CompoundFigureRecord",
    "SpatialRelation",
    "derive_spatial_relation",
    "relation_phrase",
    "order_panels",
    "split_panels",
    "parse_panel_labels",
    "parse_panel_label_spans",
    "LabelSpan",
    "PanelClassifier",
    "AlwaysMedicalClassifier",
    "BrightnessClassifier",
    "StubClassifier",
    "medical_content_ratio",
]
