import random

import pytest
from hypothesis import given, strategies as st

from figforge.errors import DegenerateMatrix, EmptyInput, IllegalScore
from figforge.stats import (
    RatingRecord,
    agreement_rates,
    build_agreement_report,
    compute_icc,
    format_mean_sd,
    load_ratings_csv,
    stage_summary,
)

from oracles import ref_icc_2_1


# -- ICC -------------------------------------------------------------------------

def test_icc_perfect_agreement_distinct_subjects():
    matrix = [[1, 1, 1], [3, 3, 3], [5, 5, 5], [3, 3, 3]]
    assert compute_icc(matrix) == pytest.approx(1.0)


def test_icc_matches_anova_oracle_on_20_random_matrices():
    rng = random.Random(7321)
    for _ in range(20):
        matrix = [[rng.choice([1, 3, 5]) + rng.random() for _ in range(3)] for _ in range(6)]
        assert compute_icc(matrix) == pytest.approx(ref_icc_2_1(matrix), abs=1e-9)


def test_icc_degenerate_shapes():
    with pytest.raises(DegenerateMatrix):
        compute_icc([[1, 3, 5]])
    with pytest.raises(DegenerateMatrix):
        compute_icc([[1], [3]])


def test_icc_zero_variance_returns_one():
    assert compute_icc([[3, 3], [3, 3]]) == 1.0


def test_icc_translation_invariance():
    rng = random.Random(99)
    matrix = [[rng.uniform(1, 5) for _ in range(3)] for _ in range(6)]
    shifted = [[v + 17.5 for v in row] for row in matrix]
    assert compute_icc(shifted) == pytest.approx(compute_icc(matrix), abs=1e-9)


@given(st.lists(st.lists(st.integers(1, 5), min_size=3, max_size=3), min_size=2, max_size=12))
def test_icc_never_exceeds_one(matrix):
    assert compute_icc(matrix) <= 1.0 + 1e-12


# -- agreement rates ----------------------------------------------------------------

def test_agreement_identity_pair():
    rates = agreement_rates([(5, 5)])
    assert rates == {"exact_pct": 100.0, "within_one_pct": 100.0}


def test_agreement_adjacent_pair():
    rates = agreement_rates([(5, 3)])
    assert rates["exact_pct"] == 0.0
    assert rates["within_one_pct"] == 100.0


def test_agreement_extreme_pair():
    rates = agreement_rates([(5, 1)])
    assert rates["exact_pct"] == 0.0
    assert rates["within_one_pct"] == 0.0


def test_agreement_within_one_dominates_exact():
    pairs = [(1, 1), (3, 5), (5, 1), (3, 3), (1, 3)]
    rates = agreement_rates(pairs)
    assert rates["within_one_pct"] >= rates["exact_pct"]


def test_agreement_symmetry():
    pairs = [(5, 3), (1, 5), (3, 3)]
    flipped = [(b, a) for a, b in pairs]
    assert agreement_rates(pairs) == agreement_rates(flipped)


def test_agreement_errors():
    with pytest.raises(EmptyInput):
        agreement_rates([])
    with pytest.raises(IllegalScore):
        agreement_rates([(2, 5)])


# -- stage summary --------------------------------------------------------------------

def rating(sample, stage, rater, c=5, p=5, l=5):
    return RatingRecord(sample, stage, rater, c, p, l)


def test_stage_summary_constant_sample():
    ratings = [rating(f"s{i}", 1, "r1", c=5) for i in range(3)]
    summary = stage_summary(ratings)
    mean, sd = summary[1]["correctness"]
    assert (mean, sd) == (5.0, 0.0)
    assert format_mean_sd(mean, sd) == "5.0 ± 0.0"


def test_stage_summary_hand_case():
    ratings = [rating("s1", 2, "r1", c=5), rating("s2", 2, "r1", c=3)]
    mean, sd = stage_summary(ratings)[2]["correctness"]
    assert mean == pytest.approx(4.0)
    assert sd == pytest.approx(2 ** 0.5)
    assert format_mean_sd(mean, sd) == "4.0 ± 1.4"


def test_stage_summary_omits_empty_stages():
    summary = stage_summary([rating("s1", 2, "r1")])
    assert 5 not in summary
    assert set(summary) == {2}


def test_stage_summary_means_in_range():
    rng = random.Random(5)
    ratings = [
        rating(f"s{i}", rng.randint(1, 5), "r1",
               c=rng.choice([1, 3, 5]), p=rng.choice([1, 3, 5]), l=rng.choice([1, 3, 5]))
        for i in range(50)
    ]
    for dims in stage_summary(ratings).values():
        for mean, _ in dims.values():
            assert 1.0 <= mean <= 5.0


# -- full report ------------------------------------------------------------------------

def test_build_agreement_report_end_to_end():
    ratings = []
    rng = random.Random(11)
    for i in range(12):
        base = rng.choice([1, 3, 5])
        for rater in ("alice", "bob"):
            wobble = rng.choice([0, 0, 2]) if rater == "bob" else 0
            score = min(5, base + wobble)
            ratings.append(rating(f"s{i}", (i % 5) + 1, rater, c=score, p=base, l=base))
    report = build_agreement_report(ratings)
    assert report.icc_overall <= 1.0
    assert report.within_one_pct >= report.exact_pct
    assert report.raters == ["alice", "bob"]
    assert report.subjects_dropped == 0
    payload = report.to_json()
    assert set(payload["per_stage_means"]) == {"1", "2", "3", "4", "5"}


def test_report_drops_incomplete_subjects():
    ratings = [rating(f"s{i}", 1, r) for i in range(4) for r in ("a", "b")]
    ratings.append(rating("s_partial", 1, "a"))
    report = build_agreement_report(ratings)
    assert report.subjects_dropped == 1


def test_ratings_csv_round_trip(tmp_path):
    path = tmp_path / "ratings.csv"
    path.write_text(
        "sample_id,stage,rater_id,correctness,completeness,clarity\n"
        "s1,1,alice,5,3,5\n"
        "s1,1,bob,5,5,5\n",
        encoding="utf-8",
    )
    loaded = load_ratings_csv(path)
    assert loaded[0] == RatingRecord("s1", 1, "alice", 5, 3, 5)
    assert len(loaded) == 2
