"""Join prediction files to a dataset and build per-task-type metric tables."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from ..gateway import Gateway, ModelEndpointConfig
from .multichoice import MultiChoiceItem, extract_option_letter, score_multichoice
from .semantic import bertscore, sts
from .textmetrics import bleu4, rouge_l

MULTI_CHOICE = "multi_choice"

OPEN_COLUMNS = ("bleu4", "rouge_l", "bertscore", "sts")
CHOICE_COLUMNS = ("accuracy", "macro_f1", "macro_recall", "macro_precision")


@dataclass(frozen=True)
class TextPair:
    candidate: str
    reference: str


def load_jsonl(path: str | Path) -> list[dict]:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                rows.append(json.loads(line))
    return rows


def evaluate_predictions(
    dataset_path: str | Path,
    predictions_path: str | Path,
    gateway: Gateway,
    embed_endpoint: ModelEndpointConfig,
    task_types: list[str] | None = None,
) -> dict:
    """Score a predictions JSONL ({"record_id", "prediction"}) against a dataset.

    Open-ended task types report mean BLEU@4 / ROUGE-L F / BERTScore F1
    (each x100) and STS; multi_choice reports the exact-letter protocol.
    Predictions without a parsable option letter count as incorrect for
    accuracy and are excluded from the macro confusion; the report carries
    their count.
    """
    records = {r["record_id"]: r for r in load_jsonl(dataset_path)}
    predictions = {p["record_id"]: p.get("prediction", "") for p in load_jsonl(predictions_path)}

    joined: dict[str, list[tuple[dict, str]]] = {}
    missing = 0
    for record_id, record in records.items():
        if task_types and record["task_type"] not in task_types:
            continue
        if record_id not in predictions:
            missing += 1
            continue
        joined.setdefault(record["task_type"], []).append((record, predictions[record_id]))

    per_task: dict[str, dict] = {}
    for task_type, pairs in sorted(joined.items()):
        if task_type == MULTI_CHOICE:
            per_task[task_type] = _score_choice_task(pairs)
        else:
            per_task[task_type] = _score_open_task(pairs, gateway, embed_endpoint)

    return {
        "per_task": per_task,
        "counts": {
            "records": len(records),
            "predictions": len(predictions),
            "evaluated": sum(len(v) for v in joined.values()),
            "missing_predictions": missing,
        },
    }


def _score_open_task(pairs, gateway, embed_endpoint) -> dict:
    bleu_total = rouge_total = bert_total = sts_total = 0.0
    for record, prediction in pairs:
        reference = record["answer"]
        bleu_total += bleu4(prediction, reference)
        rouge_total += rouge_l(prediction, reference)["f"]
        bert_total += bertscore(prediction, reference, gateway, embed_endpoint)["f1"]
        sts_total += sts(prediction, reference, gateway, embed_endpoint)
    n = len(pairs)
    return {
        "bleu4": bleu_total / n * 100.0,
        "rouge_l": rouge_total / n * 100.0,
        "bertscore": bert_total / n * 100.0,
        "sts": sts_total / n,
        "n": n,
    }


def _score_choice_task(pairs) -> dict:
    items = []
    correct = 0
    unparseable = 0
    for record, prediction in pairs:
        gold = record["correct_option"]
        letter = extract_option_letter(prediction, len(record["options"]))
        if letter is None:
            unparseable += 1
            continue
        items.append(MultiChoiceItem(letter, gold, len(record["options"])))
        if letter == gold:
            correct += 1
    result: dict = {"n": len(pairs), "unparseable": unparseable}
    if items:
        result.update(score_multichoice(items))
    else:
        result.update({c: 0.0 for c in CHOICE_COLUMNS})
    # accuracy counts unparseable predictions as wrong
    result["accuracy"] = correct / len(pairs) * 100.0
    return result
