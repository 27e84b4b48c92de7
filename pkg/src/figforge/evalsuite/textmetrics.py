"""String-overlap metrics: BLEU@4 and ROUGE-L.

Tokenization is fixed for the whole metric suite: casefold, then maximal
runs of alphanumeric characters (punctuation and whitespace both split).
BLEU is precision-oriented and intentionally not symmetric; ROUGE-L reports
precision, recall, and the balanced F.
"""
from __future__ import annotations

import math
from collections import Counter
from itertools import groupby


def tokenize(text: str) -> list[str]:
    return ["".join(group) for is_word, group in groupby(text.casefold(), key=str.isalnum) if is_word]


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def bleu4(candidate: str, reference: str) -> float:
    """BLEU with clipped modified precisions for n=1..4, uniform weights,
    brevity penalty, and add-one smoothing on zero-match orders.

    Empty candidates score 0. Result is in [0, 1].
    """
    cand = tokenize(candidate)
    ref = tokenize(reference)
    if not cand:
        return 0.0
    log_sum = 0.0
    for n in range(1, 5):
        cand_counts = _ngrams(cand, n)
        ref_counts = _ngrams(ref, n)
        matches = sum(min(count, ref_counts[gram]) for gram, count in cand_counts.items())
        total = max(len(cand) - n + 1, 0)
        if matches == 0:
            p = (matches + 1) / (total + 1)
        else:
            p = matches / total
        log_sum += 0.25 * math.log(p)
    brevity = 1.0 if len(cand) >= len(ref) else math.exp(1 - len(ref) / len(cand))
    return brevity * math.exp(log_sum)


def rouge_l(candidate: str, reference: str) -> dict[str, float]:
    """Token-level longest-common-subsequence precision/recall/F (beta=1)."""
    cand = tokenize(candidate)
    ref = tokenize(reference)
    if not cand or not ref:
        return {"precision": 0.0, "recall": 0.0, "f": 0.0}
    lcs = _lcs_length(cand, ref)
    precision = lcs / len(cand)
    recall = lcs / len(ref)
    f = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return {"precision": precision, "recall": recall, "f": f}


def _lcs_length(a: list[str], b: list[str]) -> int:
    # rolling single-row DP keeps memory linear in len(b)
    prev = [0] * (len(b) + 1)
    for token in a:
        current = [0]
        for j, other in enumerate(b, start=1):
            if token == other:
                current.append(prev[j - 1] + 1)
            else:
                current.append(max(prev[j], current[j - 1]))
        prev = current
    return prev[-1]
