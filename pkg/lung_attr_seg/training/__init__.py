"""Objective terms, training configuration and the optimisation loop."""

from lung_attr_seg.training.losses import (
    LossReport,
    LossWeights,
    attribute_loss,
    coarse_loss,
    dice_loss,
    pseudo_labels,
    seg_loss,
    self_training_loss,
    total_loss,
)
from lung_attr_seg.training.config import TrainConfig
from lung_attr_seg.training.trainer import EpochRecord, FitResult, Trainer, fit, split_pool

__all__ = [
    "LossReport",
    "LossWeights",
    "attribute_loss",
    "coarse_loss",
    "dice_loss",
    "pseudo_labels",
    "seg_loss",
    "self_training_loss",
    "total_loss",
    "TrainConfig",
    "EpochRecord",
    "FitResult",
    "Trainer",
    "fit",
    "split_pool",
]
