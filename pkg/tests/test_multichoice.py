import pytest

from figforge.errors import EmptyItemSet
from figforge.evalsuite import MultiChoiceItem, score_multichoice
from figforge.evalsuite.multichoice import extract_option_letter


def items_from(pairs):
    return [MultiChoiceItem(p, g) for p, g in pairs]


def test_45_of_50_is_accuracy_90():
    pairs = [("A", "A")] * 45 + [("B", "A")] * 5
    assert score_multichoice(items_from(pairs))["accuracy"] == pytest.approx(90.0)


def test_perfect_predictions_all_100():
    pairs = [("A", "A"), ("B", "B"), ("C", "C"), ("D", "D")] * 3
    scores = score_multichoice(items_from(pairs))
    for value in scores.values():
        assert value == pytest.approx(100.0)


def test_macro_metrics_hand_computed():
    # gold: A, A, B ; predicted: A, B, B
    scores = score_multichoice(items_from([("A", "A"), ("B", "A"), ("B", "B")]))
    # class A: tp=1 fp=0 fn=1 -> P=1, R=.5, F=2/3
    # class B: tp=1 fp=1 fn=0 -> P=.5, R=1, F=2/3
    assert scores["accuracy"] == pytest.approx(2 / 3 * 100)
    assert scores["macro_precision"] == pytest.approx(75.0)
    assert scores["macro_recall"] == pytest.approx(75.0)
    assert scores["macro_f1"] == pytest.approx(2 / 3 * 100)


def test_absent_classes_skipped():
    scores = score_multichoice(items_from([("A", "A"), ("A", "A")]))
    # only class A participates
    assert scores["macro_precision"] == pytest.approx(100.0)


def test_empty_items_raise():
    with pytest.raises(EmptyItemSet):
        score_multichoice([])


def test_illegal_letter_rejected():
    with pytest.raises(ValueError):
        MultiChoiceItem("E", "A")


def test_extract_option_letter_forms():
    assert extract_option_letter("B") == "B"
    assert extract_option_letter(" b. because") == "B"
    assert extract_option_letter("(C) option three") == "C"
    assert extract_option_letter("D) final") == "D"
    assert extract_option_letter("The answer is long") is None
    assert extract_option_letter("E") is None
    assert extract_option_letter("") is None
