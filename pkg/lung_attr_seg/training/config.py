"""Training hyperparameters."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Tuple

from lung_attr_seg.errors import ConfigError
from lung_attr_seg.training.losses import LossWeights

MODES = ("transductive", "inductive")


@dataclass(frozen=True)
class TrainConfig:
    """Optimisation schedule.

    Parameters
    ----------
    lr : float
        Adam learning rate.
    batch_size : int
        Samples per step.
    epochs : int
        Passes over the training split; 0 returns the initial model.
    weights : LossWeights
        Loss weights and thresholds.
    warmup_epochs : int
        Epochs before the self-training term is switched on.
    seed : int
        Seeds parameter initialisation, shuffling, augmentation and splits.
    eval_every : int
        Evaluate every this many epochs (the last epoch is always evaluated).
    grad_clip : float
        Global-norm gradient clip; 0 disables clipping.
    betas : tuple of float
        Adam moment coefficients.
    augment : bool
        Random rotation and flips of the training samples.
    train_fraction : float
        Share of the pool used for training in inductive mode.
    val_fraction : float
        Share of the training split held out for best-checkpoint selection.
    num_workers : int
        DataLoader worker processes.
    """

    lr: float = 1e-4
    batch_size: int = 12
    epochs: int = 60
    weights: LossWeights = field(default_factory=LossWeights)
    warmup_epochs: int = 5
    seed: int = 0
    eval_every: int = 1
    grad_clip: float = 5.0
    betas: Tuple[float, float] = (0.9, 0.999)
    augment: bool = True
    train_fraction: float = 0.8
    val_fraction: float = 0.0
    num_workers: int = 0

    def __post_init__(self) -> None:
        if self.lr <= 0:
            raise ConfigError(f"lr must be > 0, got {self.lr}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.epochs < 0 or self.warmup_epochs < 0:
            raise ConfigError("epochs and warmup_epochs must be >= 0")
        if self.eval_every < 1:
            raise ConfigError(f"eval_every must be >= 1, got {self.eval_every}")
        if self.grad_clip < 0:
            raise ConfigError(f"grad_clip must be >= 0, got {self.grad_clip}")
        if len(self.betas) != 2 or not all(0 <= b < 1 for b in self.betas):
            raise ConfigError(f"betas must be two values in [0, 1), got {self.betas}")
        if not 0 < self.train_fraction < 1:
            raise ConfigError(f"train_fraction must be in (0, 1), got {self.train_fraction}")
        if not 0 <= self.val_fraction < 1:
            raise ConfigError(f"val_fraction must be in [0, 1), got {self.val_fraction}")
        if self.num_workers < 0:
            raise ConfigError(f"num_workers must be >= 0, got {self.num_workers}")


def check_mode(mode: str) -> str:
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}, got {mode!r}")
    return mode
