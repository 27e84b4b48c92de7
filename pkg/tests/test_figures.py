import random

import numpy as np
import pytest
from hypothesis import given, strategies as st

from figforge.errors import ClassifierFailure, DegenerateImage, ImageDecodeError
from figforge.figures import (
    AlwaysMedicalClassifier,
    BrightnessClassifier,
    CompoundFigureRecord,
    PanelBox,
    SpatialRelation,
    StubClassifier,
    derive_spatial_relation,
    medical_content_ratio,
    parse_panel_label_spans,
    parse_panel_labels,
    split_panels,
)
from figforge.figures.segment import decode_image

from helpers import grid_png, png_bytes
from oracles import ref_spatial


# -- segmentation ---------------------------------------------------------------

def test_split_two_squares_vertical_gutter():
    image = png_bytes(200, 100, [(0, 5, 90, 90), (110, 5, 90, 90)])
    boxes = split_panels(image)
    assert len(boxes) == 2
    assert (boxes[0].x, boxes[0].y, boxes[0].width, boxes[0].height) == (0, 5, 90, 90)
    assert (boxes[1].x, boxes[1].y, boxes[1].width, boxes[1].height) == (110, 5, 90, 90)


def test_split_uniform_dark_image_single_box():
    image = png_bytes(100, 100, [(0, 0, 100, 100)])
    boxes = split_panels(image)
    assert len(boxes) == 1
    assert (boxes[0].x, boxes[0].y, boxes[0].width, boxes[0].height) == (0, 0, 100, 100)


def test_split_2x2_grid_row_major():
    image = grid_png(2, 2, panel=90, gutter=10, margin=10)
    boxes = split_panels(image)
    assert len(boxes) == 4
    expected = [(10, 10), (110, 10), (10, 110), (110, 110)]
    assert [(b.x, b.y) for b in boxes] == expected
    assert all(b.width == 90 and b.height == 90 for b in boxes)
    assert [b.panel_id for b in boxes] == ["A", "B", "C", "D"]


def test_split_rejects_tiny_image():
    image = png_bytes(30, 30, [(0, 0, 30, 30)])
    with pytest.raises(DegenerateImage):
        split_panels(image)


def test_split_rejects_garbage_bytes():
    with pytest.raises(ImageDecodeError):
        split_panels(b"not an image")


def test_split_deterministic():
    image = grid_png(3, 2)
    assert split_panels(image) == split_panels(image)


def test_split_covers_non_background_pixels():
    image = png_bytes(300, 200, [(5, 5, 120, 80), (150, 10, 140, 70), (5, 110, 280, 80)])
    gray = decode_image(image)
    boxes = split_panels(image)
    content = np.argwhere(gray < 250)
    covered = np.zeros(gray.shape, dtype=bool)
    for b in boxes:
        covered[b.y:b.y + b.height, b.x:b.x + b.width] = True
    assert all(covered[y, x] for y, x in content)


def test_split_boxes_within_bounds_and_disjoint():
    image = grid_png(3, 3, panel=70, gutter=8, margin=6)
    gray = decode_image(image)
    h, w = gray.shape
    boxes = split_panels(image)
    for b in boxes:
        assert b.within(w, h)
    for i, a in enumerate(boxes):
        for b in boxes[i + 1:]:
            assert a.overlap_area(b) <= 0.05 * min(a.area, b.area)


# -- label parsing ----------------------------------------------------------------

def test_parse_labels_two_markers():
    assert parse_panel_labels("(A) CT scan. (B) Histology.") == {"A": "CT scan.", "B": "Histology."}


def test_parse_labels_none():
    assert parse_panel_labels("No markers here.") == {}


def test_parse_labels_three_markers_in_order():
    result = parse_panel_labels("(A) first (B) second (C) third")
    assert list(result.items()) == [("A", "first"), ("B", "second"), ("C", "third")]


def test_parse_labels_bare_forms_at_sentence_start():
    result = parse_panel_labels("A. Coronal view. B. Sagittal view.")
    assert result == {"A": "Coronal view.", "B": "Sagittal view."}


def test_parse_labels_mid_sentence_letter_not_a_marker():
    result = parse_panel_labels("Deficiency of vitamin A. Supplementation helped.")
    assert result == {}


def test_parse_labels_case_preserved():
    assert parse_panel_labels("(a) one. (b) two.") == {"a": "one.", "b": "two."}


@given(st.text(max_size=200))
def test_parse_label_spans_partition_caption(caption):
    spans = parse_panel_label_spans(caption)
    if not spans:
        return
    preamble = caption[:spans[0].start]
    rebuilt = preamble + "".join(caption[s.start:s.end] for s in spans)
    assert rebuilt == caption


# -- spatial relations ---------------------------------------------------------------

def test_spatial_left_of():
    a = PanelBox("A", 0, 0, 100, 100)
    b = PanelBox("B", 200, 0, 100, 100)
    assert derive_spatial_relation(a, b, 400, 100, tau=0.05) is SpatialRelation.LEFT_OF


def test_spatial_identical_boxes_coincident():
    a = PanelBox("A", 10, 10, 50, 50)
    b = PanelBox("B", 10, 10, 50, 50)
    assert derive_spatial_relation(a, b, 200, 200) is SpatialRelation.COINCIDENT


def test_spatial_matches_bruteforce_oracle():
    rng = random.Random(20240817)
    image_w, image_h = 800, 600
    for _ in range(1000):
        ax, ay = rng.randrange(0, 700), rng.randrange(0, 500)
        aw, ah = rng.randrange(1, image_w - ax + 1), rng.randrange(1, image_h - ay + 1)
        bx, by = rng.randrange(0, 700), rng.randrange(0, 500)
        bw, bh = rng.randrange(1, image_w - bx + 1), rng.randrange(1, image_h - by + 1)
        tau = rng.choice([0.0, 0.01, 0.05, 0.2])
        a = PanelBox("A", ax, ay, aw, ah)
        b = PanelBox("B", bx, by, bw, bh)
        got = derive_spatial_relation(a, b, image_w, image_h, tau)
        want = ref_spatial(ax, ay, aw, ah, bx, by, bw, bh, image_w, image_h, tau)
        assert got.value == want


@given(
    st.integers(0, 500), st.integers(0, 500), st.integers(1, 100), st.integers(1, 100),
    st.integers(0, 500), st.integers(0, 500), st.integers(1, 100), st.integers(1, 100),
    st.sampled_from([0.0, 0.02, 0.05, 0.1]),
)
def test_spatial_antisymmetry(ax, ay, aw, ah, bx, by, bw, bh, tau):
    a = PanelBox("A", ax, ay, aw, ah)
    b = PanelBox("B", bx, by, bw, bh)
    forward = derive_spatial_relation(a, b, 600, 600, tau)
    backward = derive_spatial_relation(b, a, 600, 600, tau)
    assert forward.mirror() is backward


# -- compound record invariants -------------------------------------------------------

def test_compound_record_orders_row_major():
    panels = [
        PanelBox("C", 0, 100, 50, 50),
        PanelBox("A", 0, 0, 50, 50),
        PanelBox("B", 60, 2, 50, 50),
    ]
    record = CompoundFigureRecord("F1", 200, 200, panels, caption="")
    assert [p.panel_id for p in record.panels] == ["A", "B", "C"]


def test_compound_record_rejects_heavy_overlap():
    panels = [PanelBox("A", 0, 0, 100, 100), PanelBox("B", 10, 10, 100, 100)]
    with pytest.raises(ValueError):
        CompoundFigureRecord("F1", 200, 200, panels, caption="")


def test_panel_box_serialization_round_trip():
    box = PanelBox("A", 3, 4, 10, 20, label="A")
    assert PanelBox.from_json(box.to_json()) == box


# -- medical content ratio ---------------------------------------------------------

def test_ratio_all_medical():
    panels = [PanelBox(str(i), 0, i * 10, 10, 10) for i in range(4)]
    assert medical_content_ratio(panels, AlwaysMedicalClassifier()) == 1.0


def test_ratio_nine_of_ten_equal_areas():
    panels = [PanelBox(str(i), 0, i * 10, 10, 10) for i in range(10)]
    classifier = StubClassifier(non_medical={"9"})
    assert medical_content_ratio(panels, classifier) == pytest.approx(0.9)


def test_ratio_area_weighted():
    panels = [PanelBox("big", 0, 0, 30, 10), PanelBox("small", 0, 20, 10, 10)]
    classifier = StubClassifier(non_medical={"small"})
    assert medical_content_ratio(panels, classifier) == pytest.approx(0.75)


def test_ratio_propagates_classifier_failure():
    panels = [PanelBox("A", 0, 0, 10, 10)]
    with pytest.raises(ClassifierFailure) as exc:
        medical_content_ratio(panels, StubClassifier(failing={"A"}))
    assert exc.value.panel_id == "A"


def test_brightness_classifier_flags_white_panels():
    classifier = BrightnessClassifier()
    dark = np.full((50, 50), 40, dtype=np.uint8)
    white = np.full((50, 50), 255, dtype=np.uint8)
    assert classifier.is_medical(PanelBox("A", 0, 0, 50, 50), dark)
    assert not classifier.is_medical(PanelBox("B", 0, 0, 50, 50), white)
