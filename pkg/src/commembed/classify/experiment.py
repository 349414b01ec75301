"""Cross-validated classification experiment with pluggable context channels.

Each fold trains a vectorizer and model on the other folds only and
predicts its held-out comments, so the whole corpus ends up with exactly
one out-of-fold prediction per comment. The report mirrors the usual
binary layout: accuracy, macro precision/recall/F1, and the share of each
gold label classified derogatory (true-positive rate for DEG, false-positive
rate for the three non-derogatory labels), plus an optional flip table
against a baseline run's predictions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..vecspace import EmbeddingSpace
from .corpus import DEG, GOLD_LABELS, NDG, LabeledComment
from .features import CHANNELS, ContextVectorizer, TextVectorizer, combine_blocks
from .folds import FoldAssignment, label_balance, stratified_folds
from .model import LogisticModel, train_model
from .preprocess import preprocess


@dataclass
class ExperimentConfig:
    channel: str = "none"
    folds: int = 5
    seed: int = 0
    l2_strength: float = 1e-4
    neighbor_k: int = 5
    run_name: str = ""

    def __post_init__(self):
        if self.channel not in CHANNELS:
            raise ValueError(f"unknown channel {self.channel!r}")
        if not self.run_name:
            self.run_name = f"channel-{self.channel}"


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    predictions: dict[str, str]
    fold_assignment: FoldAssignment
    report: dict
    models: list[LogisticModel] = field(default_factory=list)

    def save_report(self, path: str | Path) -> None:
        with open(path, "wt", encoding="utf-8") as fh:
            json.dump(self.report, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _outcome(pred_deg: bool, gold_deg: bool) -> str:
    if pred_deg:
        return "tp" if gold_deg else "fp"
    return "fn" if gold_deg else "tn"


def compute_metrics(corpus: list[LabeledComment], predictions: dict[str, str]) -> dict:
    """Binary metrics plus the per-gold-label derogatory-classification rates."""
    n = len(corpus)
    correct = 0
    per_class = {DEG: {"tp": 0, "fp": 0, "fn": 0}, NDG: {"tp": 0, "fp": 0, "fn": 0}}
    label_counts = {label: 0 for label in GOLD_LABELS}
    label_deg = {label: 0 for label in GOLD_LABELS}
    for c in corpus:
        pred = predictions[c.id]
        gold = c.binary_gold
        label_counts[c.gold] += 1
        label_deg[c.gold] += pred == DEG
        if pred == gold:
            correct += 1
            per_class[gold]["tp"] += 1
        else:
            per_class[pred]["fp"] += 1
            per_class[gold]["fn"] += 1

    def prf(cls: str) -> tuple[float, float, float]:
        tp, fp, fn = (per_class[cls][k] for k in ("tp", "fp", "fn"))
        p = tp / (tp + fp) if tp + fp else 0.0
        r = tp / (tp + fn) if tp + fn else 0.0
        f = 2 * p * r / (p + r) if p + r else 0.0
        return p, r, f

    p_deg, r_deg, f_deg = prf(DEG)
    p_ndg, r_ndg, f_ndg = prf(NDG)
    return {
        "accuracy": correct / n if n else 0.0,
        "macro_precision": (p_deg + p_ndg) / 2,
        "macro_recall": (r_deg + r_ndg) / 2,
        "macro_f1": (f_deg + f_ndg) / 2,
        "label_counts": label_counts,
        "pct_classified_deg": {
            label: (label_deg[label] / label_counts[label] if label_counts[label] else None)
            for label in GOLD_LABELS
        },
    }


def reconcile_accuracy(report: dict) -> float:
    """Recompute accuracy from the per-gold-label cells and label counts.

    For DEG the cell is the true-positive rate; for the other labels the
    complement of the cell is the correct-classification rate.
    """
    counts = report["label_counts"]
    cells = report["pct_classified_deg"]
    total = sum(counts.values())
    if total == 0:
        return 0.0
    correct = 0.0
    for label, count in counts.items():
        if count == 0:
            continue
        rate = cells[label]
        correct += count * (rate if label == DEG else 1.0 - rate)
    return correct / total


def flip_table(
    corpus: list[LabeledComment],
    baseline: dict[str, str],
    current: dict[str, str],
) -> dict:
    """Context-sensitivity breakdown between two prediction sets.

    Comments with identical labels from both runs are tallied by outcome;
    flipped comments are tallied by each run's outcome, and as fixed
    (baseline wrong, current right) or broken (the reverse).
    """
    identical = {"tp": 0, "fp": 0, "tn": 0, "fn": 0}
    baseline_side = {"tp": 0, "fp": 0, "tn": 0, "fn": 0}
    current_side = {"tp": 0, "fp": 0, "tn": 0, "fn": 0}
    fixed = broken = 0
    for c in corpus:
        gold_deg = c.binary_gold == DEG
        b = baseline[c.id] == DEG
        k = current[c.id] == DEG
        if b == k:
            identical[_outcome(b, gold_deg)] += 1
        else:
            baseline_side[_outcome(b, gold_deg)] += 1
            current_side[_outcome(k, gold_deg)] += 1
            if k == gold_deg:
                fixed += 1
            else:
                broken += 1
    both_correct = identical["tp"] + identical["tn"]
    both_wrong = identical["fp"] + identical["fn"]
    return {
        "identical": identical,
        "baseline_only": baseline_side,
        "current_only": current_side,
        "both_correct": both_correct,
        "both_wrong": both_wrong,
        "fixed_by_context": fixed,
        "broken_by_context": broken,
        "context_sensitive": fixed + broken,
    }


def run_experiment(
    corpus: list[LabeledComment],
    config: ExperimentConfig,
    space: EmbeddingSpace | None = None,
    baseline_predictions: dict[str, str] | None = None,
    baseline_name: str | None = None,
) -> ExperimentResult:
    if not corpus:
        raise ValueError("empty corpus")
    if config.channel == "neighborhood" and space is None:
        raise ValueError("neighborhood channel requires an embedding space")

    assignment = stratified_folds(corpus, config.folds, config.seed)
    tokens = {c.id: preprocess(c.body) for c in corpus}

    predictions: dict[str, str] = {}
    models: list[LogisticModel] = []
    per_fold = []
    for f in range(config.folds):
        train = [c for c in corpus if assignment.mapping[c.id] != f]
        test = [c for c in corpus if assignment.mapping[c.id] == f]
        vec = TextVectorizer().fit([tokens[c.id] for c in train])
        X_train = vec.transform([tokens[c.id] for c in train])
        X_test = vec.transform([tokens[c.id] for c in test])
        if config.channel != "none":
            ctx = ContextVectorizer(config.channel, space, config.neighbor_k).fit(train)
            X_train = combine_blocks(X_train, ctx.transform(train))
            X_test = combine_blocks(X_test, ctx.transform(test))
        y_train = np.array([c.binary_gold == DEG for c in train])
        model = train_model(X_train, y_train, config.l2_strength)
        models.append(model)
        pred_deg = model.predict_deg(X_test)
        hits = 0
        for c, p in zip(test, pred_deg):
            predictions[c.id] = DEG if p else NDG
            hits += (DEG if p else NDG) == c.binary_gold
        per_fold.append(
            {"fold": f, "size": len(test), "accuracy": hits / len(test) if test else 0.0}
        )

    fallbacks = 0
    if config.channel == "neighborhood":
        fallbacks = sum(1 for c in corpus if c.subreddit not in space)

    report = {
        "run": config.run_name,
        "channel": config.channel,
        "folds": config.folds,
        "seed": config.seed,
        "l2_strength": config.l2_strength,
        "neighbor_k": config.neighbor_k,
        "corpus_size": len(corpus),
        **compute_metrics(corpus, predictions),
        "per_fold": per_fold,
        "fold_balance": label_balance(corpus, assignment),
        "neighborhood_fallbacks": fallbacks,
        "predictions": predictions,
        "baseline": baseline_name,
        "flip_table": (
            flip_table(corpus, baseline_predictions, predictions)
            if baseline_predictions is not None
            else None
        ),
    }
    return ExperimentResult(config, predictions, assignment, report, models)


def load_report(path: str | Path) -> dict:
    with open(path, "rt", encoding="utf-8") as fh:
        return json.load(fh)
