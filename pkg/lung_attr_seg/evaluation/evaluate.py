"""
Evaluation of a trained model (or of fixed masks) against ground truth.

Predictions are binarised as ``sigmoid(P) > alpha``.  Scores are averaged
over samples in sample-id order, so the result does not depend on the
order of the dataset.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence

import numpy as np
import torch

from lung_attr_seg.data.loader import collate_samples
from lung_attr_seg.data.saliency import check_threshold
from lung_attr_seg.data.sample import ImageTextSample
from lung_attr_seg.errors import MissingGroundTruth
from lung_attr_seg.evaluation.metrics import dice_jaccard
from lung_attr_seg.model.network import SegModel

logger = logging.getLogger(__name__)


@dataclass
class SampleScore:
    sample_id: str
    dice: float
    jaccard: float


@dataclass
class EvalResult:
    """Mean Dice and Jaccard over a dataset."""

    dice: float
    jaccard: float
    n_samples: int
    per_sample: Optional[List[SampleScore]] = field(default=None, repr=False)

    def to_dict(self, per_sample: bool = False) -> dict:
        out = {"dice": self.dice, "jaccard": self.jaccard, "n_samples": self.n_samples}
        if per_sample and self.per_sample is not None:
            out["per_sample"] = [vars(s) for s in self.per_sample]
        return out


def _require_ground_truth(samples: Sequence[ImageTextSample]) -> None:
    for s in samples:
        if s.gt_mask is None:
            raise MissingGroundTruth(s.sample_id)


def score_masks(predictions: Mapping[str, np.ndarray], samples: Sequence[ImageTextSample]) -> EvalResult:
    """Score one predicted binary mask per sample id against ``gt_mask``."""
    if not samples:
        raise ValueError("cannot evaluate an empty dataset")
    _require_ground_truth(samples)
    scores = []
    for s in sorted(samples, key=lambda s: s.sample_id):
        d, j = dice_jaccard(predictions[s.sample_id], s.gt_mask)
        scores.append(SampleScore(s.sample_id, d, j))
    return EvalResult(
        dice=float(np.mean([s.dice for s in scores])),
        jaccard=float(np.mean([s.jaccard for s in scores])),
        n_samples=len(scores),
        per_sample=scores,
    )


def evaluate_masks(samples: Sequence[ImageTextSample]) -> EvalResult:
    """Score the coarse masks themselves as predictions (the coarse baseline)."""
    return score_masks({s.sample_id: s.coarse_mask for s in samples}, samples)


def predict_masks(
    model: SegModel,
    samples: Sequence[ImageTextSample],
    alpha: float = 0.5,
    batch_size: int = 16,
) -> Dict[str, np.ndarray]:
    """Binary ``(1, H, W)`` uint8 predictions keyed by sample id."""
    check_threshold("alpha", alpha)
    device = next(model.parameters()).device
    was_training = model.training
    model.eval()
    out: Dict[str, np.ndarray] = {}
    try:
        with torch.no_grad():
            for start in range(0, len(samples), batch_size):
                batch = collate_samples(samples[start:start + batch_size])
                bundle = model(batch.images.to(device), batch.texts(model.config.text_input), alpha)
                masks = (torch.sigmoid(bundle.P) > alpha).to(torch.uint8).cpu().numpy()
                for sid, mask in zip(batch.sample_ids, masks):
                    out[sid] = mask
    finally:
        model.train(was_training)
    return out


def evaluate(
    model: SegModel,
    samples: Sequence[ImageTextSample],
    alpha: float = 0.5,
    batch_size: int = 16,
) -> EvalResult:
    """Binarise the model's predictions at ``alpha`` and score them."""
    if not samples:
        raise ValueError("cannot evaluate an empty dataset")
    samples = list(samples)
    _require_ground_truth(samples)
    result = score_masks(predict_masks(model, samples, alpha, batch_size), samples)
    logger.debug("evaluated %d samples: dice=%.4f jaccard=%.4f", result.n_samples, result.dice, result.jaccard)
    return result
