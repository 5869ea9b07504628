"""Metrics, evaluation protocols, ablation sweeps and reports."""

from lung_attr_seg.evaluation.metrics import dice_jaccard, dice_metric, jaccard_metric
from lung_attr_seg.evaluation.evaluate import (
    EvalResult,
    SampleScore,
    evaluate,
    evaluate_masks,
    predict_masks,
    score_masks,
)

__all__ = [
    "dice_jaccard",
    "dice_metric",
    "jaccard_metric",
    "EvalResult",
    "SampleScore",
    "evaluate",
    "evaluate_masks",
    "predict_masks",
    "score_masks",
]
