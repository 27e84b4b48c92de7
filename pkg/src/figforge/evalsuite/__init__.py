from .judge import JudgeVerdict, aggregate_verdicts, judge_pairwise
from .multichoice import MultiChoiceItem, score_multichoice
from .semantic import bertscore, sts
from .textmetrics import bleu4, rouge_l, tokenize
from .runner import TextPair, evaluate_predictions

__all__ = [
    "TextPair",
    "tokenize",
    "bleu4",
    "rouge_l",
    "bertscore",
    "sts",
    "MultiChoiceItem",
    "score_multichoice",
    "JudgeVerdict",
    "judge_pairwise",
    "aggregate_verdicts",
    "evaluate_predictions",
]
