"""Leakage screening: case-folded alphanumeric 4-gram overlap.

The deterministic hard-redaction fallback removes every sentence overlapped
by a shared 4-gram occurrence, looping until no overlap remains, so the
zero-overlap post-condition never depends on model cooperation.
"""
from __future__ import annotations

import re
from itertools import groupby

NGRAM_ORDER = 4

_SENTENCE_SPLIT = re.compile(r"(?<=[.!?])\s+")


def _tokens(text: str) -> list[str]:
    return ["".join(g) for word, g in groupby(text.casefold(), key=str.isalnum) if word]


def content_ngrams(text: str, n: int = NGRAM_ORDER) -> set[tuple[str, ...]]:
    tokens = _tokens(text)
    return {tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1)}


def shared_ngrams(context: str, answer: str, n: int = NGRAM_ORDER) -> list[str]:
    """Sorted, human-readable list of n-grams common to context and answer."""
    common = content_ngrams(context, n) & content_ngrams(answer, n)
    return sorted(" ".join(gram) for gram in common)


def split_sentences(text: str) -> list[str]:
    return [s for s in _SENTENCE_SPLIT.split(text.strip()) if s]


def hard_redact(context: str, answer: str, n: int = NGRAM_ORDER) -> str:
    """Drop every sentence overlapped by a context/answer shared n-gram.

    Shared n-grams are recomputed over the joined survivors each pass, so
    n-grams spanning sentence boundaries cannot survive. Result shares zero
    n-grams with the answer (possibly by becoming empty).
    """
    answer_grams = content_ngrams(answer, n)
    if not answer_grams:
        return context
    sentences = split_sentences(context)
    while sentences:
        token_owner: list[int] = []  # stream position -> sentence index
        stream: list[str] = []
        for idx, sentence in enumerate(sentences):
            for token in _tokens(sentence):
                stream.append(token)
                token_owner.append(idx)
        doomed: set[int] = set()
        for i in range(len(stream) - n + 1):
            if tuple(stream[i:i + n]) in answer_grams:
                doomed.update(token_owner[i:i + n])
        if not doomed:
            break
        sentences = [s for idx, s in enumerate(sentences) if idx not in doomed]
    return " ".join(sentences)
