"""Caption label-marker parsing.

Recognizes single-letter panel markers of the forms "(A)", "A)", and "A."
(case preserved), mapping each label to the caption span up to the next
marker. Parenthesized markers match at any word boundary; the bare "A)" and
"A." forms only at sentence starts, which keeps mid-sentence letters like
"vitamin A." from splitting the caption.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

_PAREN_RE = re.compile(r"\(([A-Za-z])\)")
_BARE_RE = re.compile(r"([A-Za-z])([.)])(?=\s|$)")


@dataclass(frozen=True)
class LabelSpan:
    label: str
    marker: str  # the literal marker text, e.g. "(A)"
    text: str    # stripped sub-caption span
    start: int   # offset of the marker in the caption
    end: int     # offset one past the raw span (start of next marker or len)


def _word_start(caption: str, pos: int) -> bool:
    return pos == 0 or caption[pos - 1].isspace()


def _sentence_start(caption: str, pos: int) -> bool:
    prefix = caption[:pos].rstrip()
    return not prefix or prefix.endswith((".", "!", "?", ":", ";"))


def parse_panel_label_spans(caption: str) -> list[LabelSpan]:
    """All label markers with their raw span offsets, in caption order.

    ``caption[span.start:span.end]`` covers marker plus raw span, so the
    preamble followed by those slices reconstructs the caption exactly.
    """
    hits: list[tuple[int, int, str, str]] = []
    for m in _PAREN_RE.finditer(caption):
        if _word_start(caption, m.start()):
            hits.append((m.start(), m.end(), m.group(1), m.group(0)))
    for m in _BARE_RE.finditer(caption):
        if _word_start(caption, m.start()) and _sentence_start(caption, m.start()):
            hits.append((m.start(), m.end(), m.group(1), m.group(0)))
    hits.sort()

    spans = []
    for i, (start, mk_end, label, marker) in enumerate(hits):
        end = hits[i + 1][0] if i + 1 < len(hits) else len(caption)
        if end < mk_end:  # overlapping matches; keep the earlier marker only
            continue
        spans.append(LabelSpan(label=label, marker=marker,
                               text=caption[mk_end:end].strip(), start=start, end=end))
    return spans


def parse_panel_labels(caption: str) -> dict[str, str]:
    """Ordered map of panel label to its stripped sub-caption span.

    Returns an empty map when the caption carries no markers. On duplicate
    labels the first span wins.
    """
    out: dict[str, str] = {}
    for span in parse_panel_label_spans(caption):
        out.setdefault(span.label, span.text)
    return out
