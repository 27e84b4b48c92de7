"""Embedding-backed metrics: token-level BERTScore-style F1 and whole-text STS.

Both go through the gateway's embed calls, so they inherit its caching and
determinism. Matching is greedy max over the cosine matrix with similarities
clamped at 0, and STS reports max(0, cosine) x 100.
"""
from __future__ import annotations

import numpy as np

from ..gateway import EMBED, Gateway, ModelCall, ModelEndpointConfig, TextPart
from .textmetrics import tokenize


def _embed_texts(gateway: Gateway, endpoint: ModelEndpointConfig, texts: list[str]) -> np.ndarray:
    call = ModelCall(kind=EMBED, user_parts=tuple(TextPart(t) for t in texts))
    reply = gateway.invoke(endpoint, call)
    return np.asarray(reply.vectors, dtype=np.float64)


def _unit_rows(matrix: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(matrix, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    return matrix / norms


def bertscore(candidate: str, reference: str, gateway: Gateway, endpoint: ModelEndpointConfig) -> dict[str, float]:
    """Greedy-max token matching over per-token embeddings.

    Precision averages each candidate token's best similarity to any
    reference token; recall is symmetric; F1 is their harmonic mean. Either
    side empty scores all zeros.
    """
    cand_tokens = tokenize(candidate)
    ref_tokens = tokenize(reference)
    if not cand_tokens or not ref_tokens:
        return {"precision": 0.0, "recall": 0.0, "f1": 0.0}
    cand_vecs = _unit_rows(_embed_texts(gateway, endpoint, cand_tokens))
    ref_vecs = _unit_rows(_embed_texts(gateway, endpoint, ref_tokens))
    similarity = np.clip(cand_vecs @ ref_vecs.T, 0.0, None)
    precision = float(similarity.max(axis=1).mean())
    recall = float(similarity.max(axis=0).mean())
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return {"precision": precision, "recall": recall, "f1": f1}


def sts(candidate: str, reference: str, gateway: Gateway, endpoint: ModelEndpointConfig) -> float:
    """Whole-text cosine similarity on a 0-100 scale, negatives floored at 0."""
    vecs = _unit_rows(_embed_texts(gateway, endpoint, [candidate, reference]))
    cosine = float(vecs[0] @ vecs[1])
    return max(0.0, cosine) * 100.0
