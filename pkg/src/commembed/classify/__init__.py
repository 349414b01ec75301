"""Context-channel abusive-language classification over the labeled corpus."""

from .corpus import (
    DEG,
    GOLD_LABELS,
    NDG,
    CorpusFormatError,
    LabeledComment,
    load_corpus,
    save_corpus,
)
from .experiment import (
    ExperimentConfig,
    ExperimentResult,
    compute_metrics,
    flip_table,
    load_report,
    reconcile_accuracy,
    run_experiment,
)
from .features import CHANNELS, ContextVectorizer, TextVectorizer, build_context_features
from .folds import FoldAssignment, label_balance, stratified_folds
from .model import LogisticModel, train_model
from .preprocess import preprocess

__all__ = [
    "DEG",
    "NDG",
    "GOLD_LABELS",
    "CHANNELS",
    "CorpusFormatError",
    "LabeledComment",
    "load_corpus",
    "save_corpus",
    "ExperimentConfig",
    "ExperimentResult",
    "compute_metrics",
    "flip_table",
    "load_report",
    "reconcile_accuracy",
    "run_experiment",
    "ContextVectorizer",
    "TextVectorizer",
    "build_context_features",
    "FoldAssignment",
    "label_balance",
    "stratified_folds",
    "LogisticModel",
    "train_model",
    "preprocess",
]
