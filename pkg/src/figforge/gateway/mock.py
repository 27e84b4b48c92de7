"""Deterministic mock backend.

Replies are pure functions of the call's cache key: chat/vision replies come
from per-task default handlers (keyed by the prompt's ``TASK:`` marker line)
or from caller-supplied fixtures; embeddings are unit-norm pseudo-random
vectors seeded per text part. With this backend the whole pipeline is a pure
function of its inputs.

Prompt grammar the mock understands::

    TASK: SOME_MARKER
    INSTRUCTIONS:
    free text...
    CAPTION:
    section content...

Section headers are upper-case lines ending in ':'; content runs to the next
header. Fixture values may be strings or callables ``(call, sections,
digest) -> str`` and may raise to simulate backend failures.
"""
from __future__ import annotations

import hashlib
import json
import re
from typing import Callable

import numpy as np

from .model import EMBED, CacheKey, ModelCall, ModelEndpointConfig, ModelReply, cache_key

MARKER_RE = re.compile(r"^TASK:\s*([A-Z0-9_]+)\s*$", re.M)
_SECTION_RE = re.compile(r"^([A-Z][A-Z0-9 _]*):\s*$", re.M)

EMBED_DIM = 32


def split_sections(prompt: str) -> dict[str, str]:
    """Parse the prompt grammar into {section name: stripped content}."""
    sections: dict[str, str] = {}
    matches = list(_SECTION_RE.finditer(prompt))
    for i, m in enumerate(matches):
        end = matches[i + 1].start() if i + 1 < len(matches) else len(prompt)
        sections[m.group(1)] = prompt[m.end():end].strip()
    return sections


def find_marker(prompt: str) -> str | None:
    m = MARKER_RE.search(prompt)
    return m.group(1) if m else None


def _tokens(text: str) -> list[str]:
    return re.findall(r"[0-9a-z]+", text.casefold())


def _first_sentence(text: str) -> str:
    text = text.strip()
    for stop in (". ", ".\n"):
        idx = text.find(stop)
        if idx >= 0:
            return text[: idx + 1]
    return text


def _overlap_f1(candidate: str, reference: str) -> float:
    cand, ref = _tokens(candidate), _tokens(reference)
    if not cand or not ref:
        return 0.0
    common = len(set(cand) & set(ref))
    if common == 0:
        return 0.0
    p = common / len(set(cand))
    r = common / len(set(ref))
    return 2 * p * r / (p + r)


def embedding_for_text(model_name: str, text: str, dim: int = EMBED_DIM) -> tuple[float, ...]:
    """Unit-norm pseudo-random vector seeded by the text part's digest."""
    digest = hashlib.sha256(f"{model_name}\x00{text}".encode("utf-8")).digest()
    seed = int.from_bytes(digest[:8], "big")
    rng = np.random.default_rng(seed)
    vec = rng.standard_normal(dim)
    vec /= np.linalg.norm(vec)
    return tuple(float(v) for v in vec)


Fixture = "str | Callable[[ModelCall, dict, str], str]"


class MockBackend:
    """Stand-in for remote endpoints; see module docstring."""

    def __init__(
        self,
        fixtures: dict[str, object] | None = None,
        embed_fixtures: dict[str, list[float]] | None = None,
    ):
        self.fixtures = dict(fixtures or {})
        self.embed_fixtures = dict(embed_fixtures or {})

    def send(self, config: ModelEndpointConfig, call: ModelCall) -> ModelReply:
        key = cache_key(config, call)
        if call.kind == EMBED:
            return self._embed(config, call)
        text = self._chat_reply(call, key)
        n_prompt = len(_tokens(call.prompt_text()))
        return ModelReply(text=text, usage={"prompt_tokens": n_prompt, "completion_tokens": len(_tokens(text))})

    def _embed(self, config: ModelEndpointConfig, call: ModelCall) -> ModelReply:
        vectors = []
        for text in call.text_parts():
            if text in self.embed_fixtures:
                vectors.append(tuple(float(v) for v in self.embed_fixtures[text]))
            else:
                vectors.append(embedding_for_text(config.model_name, text))
        return ModelReply(vectors=tuple(vectors), usage={"prompt_tokens": len(vectors), "completion_tokens": 0})

    def _chat_reply(self, call: ModelCall, key: CacheKey) -> str:
        prompt = call.prompt_text()
        marker = find_marker(prompt) or "UNKNOWN"
        sections = split_sections(prompt)
        fixture = self.fixtures.get(marker)
        if fixture is not None:
            if callable(fixture):
                return fixture(call, sections, key.digest)
            return str(fixture)
        handler = _DEFAULT_HANDLERS.get(marker, _handle_unknown)
        return handler(call, sections, key.digest)


# -- default handlers ---------------------------------------------------------

def _handle_unknown(call: ModelCall, sections: dict, digest: str) -> str:
    return f"[mock {digest[:8]}] acknowledged"


def _handle_inline_summary(call: ModelCall, sections: dict, digest: str) -> str:
    source = sections.get("INLINE TEXT") or sections.get("CAPTION", "")
    lead = _first_sentence(source)
    return f"{lead} [summary {digest[:8]}]"


def _handle_knowledge_notes(call: ModelCall, sections: dict, digest: str) -> str:
    caption = sections.get("CAPTION", "")
    seen = set()
    concepts = []
    for word in re.findall(r"[A-Za-z][A-Za-z-]{5,}", caption):
        low = word.casefold()
        if low not in seen:
            seen.add(low)
            concepts.append(word)
        if len(concepts) == 3:
            break
    if not concepts:
        concepts = ["finding"]
    blocks = [
        f"CONCEPT: {c}\nEXPLANATION: Background on {c} relevant to this case. [note {digest[:8]}]"
        for c in concepts
    ]
    return "\n".join(blocks)


def _handle_panel_description(call: ModelCall, sections: dict, digest: str) -> str:
    label = sections.get("PANEL LABEL", "?")
    sub = sections.get("SUB CAPTION", "")
    body = sub if sub else "medical image content"
    return f"Sub-image {label} shows {body} [desc {digest[:8]}]"


def _context_source(sections: dict) -> tuple[str, list[str], str]:
    summary = sections.get("SUMMARY", "")
    descs = [ln.strip() for ln in sections.get("PANEL DESCRIPTIONS", "").splitlines() if ln.strip()]
    knowledge = sections.get("KNOWLEDGE", "")
    return summary, descs, knowledge


def _qa_reply(sections: dict, digest: str, question: str) -> str:
    summary, descs, knowledge = _context_source(sections)
    context = " ".join(x for x in [summary] + descs if x)
    leaky = int(digest[:2], 16) % 2 == 1
    if leaky and descs:
        answer = _first_sentence(descs[0])
    else:
        concept = _first_sentence(knowledge) if knowledge else "the documented findings"
        answer = f"The case is consistent with {concept} [ans {digest[:8]}]"
    return f"CONTEXT: {context}\nQUESTION: {question}\nANSWER: {answer}"


def _handle_multi_subimage(call: ModelCall, sections: dict, digest: str) -> str:
    return _qa_reply(sections, digest, f"What do the sub-images jointly demonstrate? [q {digest[:8]}]")


def _handle_single_subimage(call: ModelCall, sections: dict, digest: str) -> str:
    label = sections.get("FOCUS PANEL", "A")
    return _qa_reply(sections, digest, f"What does sub-image {label} demonstrate in this case? [q {digest[:8]}]")


def _handle_compound(call: ModelCall, sections: dict, digest: str) -> str:
    return _qa_reply(sections, digest, f"What does the figure demonstrate overall? [q {digest[:8]}]")


def _handle_text_only(call: ModelCall, sections: dict, digest: str) -> str:
    return _qa_reply(sections, digest, f"Based on the description, what is the diagnosis? [q {digest[:8]}]")


def _handle_multi_choice(call: ModelCall, sections: dict, digest: str) -> str:
    summary, descs, knowledge = _context_source(sections)
    context = " ".join(x for x in [summary] + descs if x)
    answer = _first_sentence(descs[0]) if descs else f"Correct finding [ans {digest[:8]}]"
    lines = [
        f"CONTEXT: {context}",
        f"QUESTION: Which statement best matches the findings? [q {digest[:8]}]",
        f"ANSWER: {answer}",
    ]
    for i in range(1, 4):
        lines.append(f"DISTRACTOR: Plausible but incorrect finding {i} [alt {digest[:8]}]")
    return "\n".join(lines)


def _handle_refine_context(call: ModelCall, sections: dict, digest: str) -> str:
    # Echo: a dumb rewriter that never actually removes the leak, so the
    # pipeline's deterministic hard-redaction path carries the guarantee.
    return sections.get("CONTEXT", "")


def _handle_judge(call: ModelCall, sections: dict, digest: str) -> str:
    reference = sections.get("REFERENCE", "")
    a = sections.get("CANDIDATE A", "")
    b = sections.get("CANDIDATE B", "")
    fa = _overlap_f1(a, reference)
    fb = _overlap_f1(b, reference)
    if fa > fb:
        winner = "A"
    elif fb > fa:
        winner = "B"
    else:
        winner = "tie"
    return json.dumps({"winner": winner, "rationale": f"token-overlap comparison [{digest[:8]}]"})


def _handle_corpus_tag(call: ModelCall, sections: dict, digest: str) -> str:
    caption = sections.get("CAPTION", "").casefold()

    def pick(vocab_csv: str) -> str:
        vocab = [v.strip() for v in vocab_csv.split(",") if v.strip()]
        if not vocab:
            return "other"
        for term in vocab:
            if term.casefold() in caption:
                return term
        return vocab[int(digest[:8], 16) % len(vocab)]

    modality = pick(sections.get("MODALITIES", ""))
    anatomy = pick(sections.get("SYSTEMS", ""))
    return f"MODALITY: {modality}\nANATOMY: {anatomy}"


_DEFAULT_HANDLERS: dict[str, Callable] = {
    "INLINE_SUMMARY": _handle_inline_summary,
    "KNOWLEDGE_NOTES": _handle_knowledge_notes,
    "PANEL_DESCRIPTION": _handle_panel_description,
    "INSTRUCTION_MULTI_SUBIMAGE": _handle_multi_subimage,
    "INSTRUCTION_SINGLE_SUBIMAGE": _handle_single_subimage,
    "INSTRUCTION_COMPOUND": _handle_compound,
    "INSTRUCTION_TEXT_ONLY": _handle_text_only,
    "INSTRUCTION_MULTI_CHOICE": _handle_multi_choice,
    "REFINE_CONTEXT": _handle_refine_context,
    "JUDGE": _handle_judge,
    "CORPUS_TAG": _handle_corpus_tag,
}
