import random

import pytest
from hypothesis import given, strategies as st

from figforge.evalsuite import bleu4, rouge_l, tokenize

from oracles import ref_bleu4, ref_rouge_l, ref_tokens

VOCAB = ["the", "cat", "sat", "on", "mat", "lesion", "mri", "scan", "shows", "left",
         "right", "tumor", "biopsy", "confirmed", "margin", "axial", "view", "and"]


def random_text(rng, lo=0, hi=25):
    return " ".join(rng.choice(VOCAB) for _ in range(rng.randint(lo, hi)))


def test_tokenizer_matches_reference_definition():
    samples = [
        "The cat, sat: on (the) mat!",
        "  MRI-scan shows T2 hyper-intensity. ",
        "", "...", "a",
    ]
    for text in samples:
        assert tokenize(text) == ref_tokens(text)


# -- BLEU ----------------------------------------------------------------------

def test_bleu_identity_is_one():
    text = "the lesion shows clear margins on axial view"
    assert bleu4(text, text) == pytest.approx(1.0, abs=1e-12)


def test_bleu_empty_candidate_is_zero():
    assert bleu4("", "any reference text here") == 0.0
    assert bleu4("   ", "any reference text here") == 0.0


def test_bleu_not_symmetric():
    a = "the cat sat on the mat today"
    b = "the cat sat"
    assert bleu4(a, b) != bleu4(b, a)


def test_bleu_matches_oracle_on_30_random_pairs():
    rng = random.Random(4217)
    for _ in range(30):
        cand = random_text(rng)
        ref = random_text(rng)
        assert bleu4(cand, ref) == pytest.approx(ref_bleu4(cand, ref), abs=1e-9)


@given(st.text(max_size=120), st.text(max_size=120))
def test_bleu_in_range_and_whitespace_invariant(cand, ref):
    score = bleu4(cand, ref)
    assert 0.0 <= score <= 1.0
    assert bleu4(f"  {cand}\t", f"\n{ref} ") == score


# -- ROUGE-L ---------------------------------------------------------------------

def test_rouge_identity():
    text = "histology confirmed the diagnosis"
    scores = rouge_l(text, text)
    assert scores == {"precision": 1.0, "recall": 1.0, "f": 1.0}


def test_rouge_hand_case():
    scores = rouge_l("the cat on the mat", "the cat sat on the mat")
    assert scores["precision"] == pytest.approx(1.0)
    assert scores["recall"] == pytest.approx(5 / 6)
    assert scores["f"] == pytest.approx(10 / 11, abs=1e-12)


def test_rouge_disjoint_vocabulary():
    assert rouge_l("alpha beta", "gamma delta")["f"] == 0.0


def test_rouge_matches_oracle_on_30_random_pairs():
    rng = random.Random(90210)
    for _ in range(30):
        cand = random_text(rng)
        ref = random_text(rng)
        mine = rouge_l(cand, ref)
        want = ref_rouge_l(cand, ref)
        for key in ("precision", "recall", "f"):
            assert mine[key] == pytest.approx(want[key], abs=1e-9)


@given(st.text(max_size=120), st.text(max_size=120))
def test_rouge_in_range_and_whitespace_invariant(cand, ref):
    scores = rouge_l(cand, ref)
    for value in scores.values():
        assert 0.0 <= value <= 1.0
    assert rouge_l(f" {cand} ", f" {ref} ") == scores
