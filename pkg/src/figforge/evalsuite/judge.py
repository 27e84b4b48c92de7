"""Pairwise LLM-as-a-judge protocol with position-bias cancellation."""
from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass

from ..gateway import CHAT, Gateway, ModelCall, ModelEndpointConfig, TextPart

JUDGE_SYSTEM = (
    "You compare two candidate answers against a reference answer for a "
    "medical question. Factual correctness dominates; completeness and "
    "clarity break ties."
)

JUDGE_TEMPLATE = """TASK: JUDGE
INSTRUCTIONS:
Decide which candidate answer better matches the reference. Output a strict
JSON object: {{"winner": "A" | "B" | "tie", "rationale": "<brief reason>"}}.
No other text.
REFERENCE:
{reference}
CANDIDATE A:
{candidate_a}
CANDIDATE B:
{candidate_b}
"""

WIN, LOSE, TIE = "win", "lose", "tie"


@dataclass(frozen=True)
class JudgeVerdict:
    outcome: str  # win / lose / tie, from output_a's perspective
    rationale: str

    def __post_init__(self):
        if self.outcome not in (WIN, LOSE, TIE):
            raise ValueError(f"illegal outcome {self.outcome!r}")


def _parse_verdict(reply: str) -> dict | None:
    try:
        data = json.loads(reply)
    except json.JSONDecodeError:
        # tolerate a JSON object embedded in stray prose
        m = re.search(r"\{.*\}", reply, re.S)
        if not m:
            return None
        try:
            data = json.loads(m.group(0))
        except json.JSONDecodeError:
            return None
    if not isinstance(data, dict) or data.get("winner") not in ("A", "B", "tie"):
        return None
    return data


def judge_pairwise(
    reference: str,
    output_a: str,
    output_b: str,
    gateway: Gateway,
    endpoint: ModelEndpointConfig,
    ab_seed: int = 0,
) -> JudgeVerdict:
    """Judge output_a against output_b; outcome is from output_a's side.

    Presentation order of the two candidates is swapped per ab_seed so
    position bias cancels in aggregate; unparseable replies retry once with a
    repair note, then degrade to a tie.
    """
    swapped = bool(random.Random(ab_seed).getrandbits(1))
    first, second = (output_b, output_a) if swapped else (output_a, output_b)
    prompt = JUDGE_TEMPLATE.format(reference=reference, candidate_a=first, candidate_b=second)

    data = None
    for attempt in range(2):
        text = prompt if attempt == 0 else prompt + "\nREPAIR:\nPrevious reply was not valid JSON. JSON only.\n"
        call = ModelCall(kind=CHAT, system_prompt=JUDGE_SYSTEM, user_parts=(TextPart(text),))
        reply = gateway.invoke(endpoint, call)
        data = _parse_verdict(reply.text or "")
        if data is not None:
            break
    if data is None:
        return JudgeVerdict(TIE, "unparseable")

    winner = data["winner"]
    rationale = str(data.get("rationale", ""))
    if winner == "tie":
        return JudgeVerdict(TIE, rationale)
    winner_is_a_slot = winner == "A"
    # map the presented slot back to the caller's labels
    won_by_output_a = winner_is_a_slot != swapped
    return JudgeVerdict(WIN if won_by_output_a else LOSE, rationale)


def aggregate_verdicts(verdicts: list[JudgeVerdict]) -> dict[str, float]:
    """Win/tie/lose percentages; always sums to 100 over a non-empty list."""
    if not verdicts:
        return {"win_pct": 0.0, "tie_pct": 0.0, "lose_pct": 0.0}
    n = len(verdicts)
    win = sum(1 for v in verdicts if v.outcome == WIN)
    tie = sum(1 for v in verdicts if v.outcome == TIE)
    lose = n - win - tie
    return {"win_pct": win / n * 100.0, "tie_pct": tie / n * 100.0, "lose_pct": lose / n * 100.0}
