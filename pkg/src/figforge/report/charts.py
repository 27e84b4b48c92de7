"""Report figures rendered alongside the delimited outputs."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

plt.rcParams["figure.figsize"] = (7.0, 4.5)
plt.rcParams["font.size"] = 9
plt.rcParams["axes.titlesize"] = 10


def save_distribution_pie(fractions: dict[str, float], title: str, path: str | Path) -> Path:
    """Pie over percentage fractions; zero slices are dropped from the wheel."""
    shown = {k: v for k, v in fractions.items() if v > 0}
    fig, ax = plt.subplots()
    if shown:
        ax.pie(list(shown.values()), labels=list(shown.keys()),
               autopct="%.1f%%", startangle=90, counterclock=False)
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)


def save_stage_means(per_stage_means: dict[int, dict[str, tuple[float, float]]],
                     path: str | Path) -> Path:
    """Grouped bars of per-stage mean scores with sd whiskers."""
    stages = sorted(per_stage_means)
    dimensions = ("correctness", "completeness", "clarity")
    width = 0.25
    fig, ax = plt.subplots()
    for offset, dim in enumerate(dimensions):
        xs = [s + (offset - 1) * width for s in stages]
        means = [per_stage_means[s][dim][0] for s in stages]
        sds = [per_stage_means[s][dim][1] for s in stages]
        ax.bar(xs, means, width=width, yerr=sds, capsize=3, label=dim)
    ax.set_xticks(stages)
    ax.set_xticklabels([f"stage {s}" for s in stages])
    ax.set_ylim(0, 5.5)
    ax.set_ylabel("mean score (1/3/5 scale)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)


OPEN_METRICS = ("bleu4", "rouge_l", "bertscore", "sts")
CHOICE_METRICS = ("accuracy", "macro_f1", "macro_recall", "macro_precision")


def _grouped_bars(ax, tasks: list[str], per_task: dict[str, dict], metrics: tuple[str, ...]):
    width = 0.8 / len(metrics)
    for offset, metric in enumerate(metrics):
        xs = [i + (offset - (len(metrics) - 1) / 2) * width for i in range(len(tasks))]
        ax.bar(xs, [per_task[t].get(metric, 0.0) for t in tasks], width=width, label=metric)
    ax.set_xticks(range(len(tasks)))
    ax.set_xticklabels(tasks, rotation=20, ha="right")
    ax.set_ylabel("score (0-100)")
    ax.legend(fontsize=7)


def save_metric_bars(per_task: dict[str, dict], path: str | Path) -> Path:
    """Grouped metric bars: open-ended tasks and multi-choice side by side."""
    open_tasks = sorted(t for t in per_task if "accuracy" not in per_task[t])
    choice_tasks = sorted(t for t in per_task if "accuracy" in per_task[t])
    panels = (1 if open_tasks else 0) + (1 if choice_tasks else 0)
    fig, axes = plt.subplots(1, max(panels, 1), figsize=(5.5 * max(panels, 1), 4.5), squeeze=False)
    column = 0
    if open_tasks:
        _grouped_bars(axes[0][column], open_tasks, per_task, OPEN_METRICS)
        axes[0][column].set_title("open-ended tasks")
        column += 1
    if choice_tasks:
        _grouped_bars(axes[0][column], choice_tasks, per_task, CHOICE_METRICS)
        axes[0][column].set_title("multi-choice")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)


def save_judge_outcomes(per_task: dict[str, dict[str, float]], path: str | Path) -> Path:
    """Stacked win/tie/lose percentage bars per task type."""
    tasks = sorted(per_task)
    wins = [per_task[t]["win_pct"] for t in tasks]
    ties = [per_task[t]["tie_pct"] for t in tasks]
    loses = [per_task[t]["lose_pct"] for t in tasks]
    fig, ax = plt.subplots()
    ax.bar(tasks, wins, label="win")
    ax.bar(tasks, ties, bottom=wins, label="tie")
    ax.bar(tasks, loses, bottom=[w + t for w, t in zip(wins, ties)], label="lose")
    ax.set_ylabel("% of items")
    ax.set_ylim(0, 100)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)
