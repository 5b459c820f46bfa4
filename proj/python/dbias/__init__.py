"""Text de-biasing pipeline: bias detection, span recognition, mask-and-infill
rewriting, and fairness metrics, backed by the C++ core."""

from ._core import (
    DetectorModel,
    Document,
    Lexicon,
    Token,
    TrainConfig,
    bucketize_age,
    bucketize_education,
    build_lexicon,
    confusion,
    debias,
    disparate_impact,
    evaluate_before_after,
    generalized_bias_auc,
    load_mbic,
    power_mean,
    prf_acc,
    recognize,
    roc_auc,
    run_pipeline,
    split_sentences,
    tokenize,
    train_detector,
)

__version__ = "0.1.0"

__all__ = [
    "DetectorModel",
    "Document",
    "Lexicon",
    "Token",
    "TrainConfig",
    "bucketize_age",
    "bucketize_education",
    "build_lexicon",
    "confusion",
    "debias",
    "disparate_impact",
    "evaluate_before_after",
    "generalized_bias_auc",
    "load_mbic",
    "power_mean",
    "prf_acc",
    "recognize",
    "roc_auc",
    "run_pipeline",
    "split_sentences",
    "tokenize",
    "train_detector",
]
