"""
Optimisation loop.

``Trainer.train_step`` performs one Adam step on every trainable
parameter (the frozen attribute encoder is never handed to the
optimiser).  Pseudo-labels for the self-training term are recomputed from
the current predictions at every step, and the term is only added once
``epoch >= warmup_epochs``.

``fit`` runs the two evaluation protocols:

  transductive   train on the whole pool, evaluate on the same pool
  inductive      train on a seeded split, evaluate on the held-out rest

The best epoch (highest Dice on the validation split, or on the
evaluation set when there is no validation split) and the last epoch are
both kept and reported.
"""

from __future__ import annotations

import copy
import dataclasses
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import torch
from torch.utils.data import DataLoader
from tqdm import tqdm

from lung_attr_seg.attributes.taxonomy import AttributeTaxonomy
from lung_attr_seg.data.augment import AugmentConfig
from lung_attr_seg.data.loader import Batch, SampleDataset, collate_samples
from lung_attr_seg.data.sample import ImageTextSample
from lung_attr_seg.errors import ConfigError, NonFiniteLoss
from lung_attr_seg.evaluation.evaluate import EvalResult, evaluate
from lung_attr_seg.io.json_io import JsonLinesWriter
from lung_attr_seg.model.checkpoint import save_checkpoint
from lung_attr_seg.model.config import ModelConfig
from lung_attr_seg.model.network import SegModel
from lung_attr_seg.training.config import TrainConfig, check_mode
from lung_attr_seg.training.losses import LossReport, assemble_losses

logger = logging.getLogger(__name__)

LOG_NAME = "train_log.jsonl"
BEST_NAME = "best.pt"
LAST_NAME = "last.pt"


class Trainer:
    """Owns the model, the optimiser and the step counter of one run."""

    def __init__(self, model: SegModel, config: TrainConfig, log: Optional[JsonLinesWriter] = None) -> None:
        self.model = model
        self.config = config
        self.log = log
        self.step = 0
        self.optimizer = torch.optim.Adam(
            list(model.trainable_parameters()),
            lr=config.lr,
            betas=tuple(config.betas),
            weight_decay=0.0,
        )

    @property
    def device(self) -> torch.device:
        return next(self.model.parameters()).device

    def train_step(self, batch: Batch, epoch: int = 0) -> LossReport:
        """One gradient step on ``batch``; returns its losses.

        Raises NonFiniteLoss (before any parameter changes) when a loss
        term is NaN or Inf.
        """
        if len(batch) == 0:
            raise ValueError("empty batch")
        model, weights = self.model, self.config.weights
        model.train()
        device = self.device
        self.optimizer.zero_grad(set_to_none=True)

        bundle = model(batch.images.to(device), batch.texts(model.config.text_input), weights.alpha)
        total, terms, coverage = assemble_losses(
            bundle.P,
            bundle.attr_logits,
            batch.coarse_masks.to(device),
            batch.labels.to(device),
            weights,
            self_training=epoch >= self.config.warmup_epochs,
        )
        for name, value in (*terms.items(), ("l_total", total)):
            if not torch.isfinite(value):
                self.optimizer.zero_grad(set_to_none=True)
                raise NonFiniteLoss(name, value.detach().item())

        total.backward()
        if self.config.grad_clip > 0:
            torch.nn.utils.clip_grad_norm_(list(model.trainable_parameters()), self.config.grad_clip)
        self.optimizer.step()
        self.step += 1

        report = LossReport(
            l_c=terms["l_c"].detach().item(),
            l_a=terms["l_a"].detach().item(),
            l_st=terms["l_st"].detach().item(),
            l_total=total.detach().item(),
            pseudo_label_coverage=coverage,
            weights={"lambda_c": weights.lambda_c, "lambda_a": weights.lambda_a, "lambda_st": weights.lambda_st},
        )
        if self.log is not None:
            self.log.write({"epoch": epoch, "step": self.step, **report.to_dict()})
        return report

    def train_epoch(self, loader: DataLoader, epoch: int) -> LossReport:
        reports = [self.train_step(batch, epoch) for batch in loader]
        return LossReport.mean(reports)


@dataclass
class EpochRecord:
    """Mean losses of one epoch plus the evaluations run after it."""

    epoch: int
    losses: LossReport
    eval: Optional[EvalResult] = None
    val: Optional[EvalResult] = None

    def to_dict(self) -> dict:
        out: Dict[str, Any] = {"epoch": self.epoch, **self.losses.to_dict()}
        if self.eval is not None:
            out["eval"] = self.eval.to_dict()
        if self.val is not None:
            out["val"] = self.val.to_dict()
        return out


@dataclass
class FitResult:
    """Outcome of ``fit``: the last model plus what is needed to restore the best one."""

    model: SegModel
    history: List[EpochRecord] = field(default_factory=list)
    mode: str = "transductive"
    train_ids: List[str] = field(default_factory=list)
    val_ids: List[str] = field(default_factory=list)
    eval_ids: List[str] = field(default_factory=list)
    best_epoch: Optional[int] = None
    best_state: Optional[Dict[str, torch.Tensor]] = field(default=None, repr=False)

    @property
    def last_eval(self) -> Optional[EvalResult]:
        for record in reversed(self.history):
            if record.eval is not None:
                return record.eval
        return None

    @property
    def best_eval(self) -> Optional[EvalResult]:
        for record in self.history:
            if record.epoch == self.best_epoch:
                return record.eval
        return None

    def best_model(self) -> SegModel:
        """A copy of the model with the best epoch's weights (the last model if none)."""
        model = copy.deepcopy(self.model)
        if self.best_state is not None:
            model.load_state_dict(self.best_state)
        model.eval()
        return model

    def summary(self) -> dict:
        best, last = self.best_eval, self.last_eval
        return {
            "mode": self.mode,
            "epochs": len(self.history),
            "best_epoch": self.best_epoch,
            "best": best.to_dict() if best else None,
            "last": last.to_dict() if last else None,
            "n_train": len(self.train_ids),
            "n_val": len(self.val_ids),
            "n_eval": len(self.eval_ids),
        }


def split_pool(
    samples: Sequence[ImageTextSample], mode: str, config: TrainConfig
) -> Tuple[List[ImageTextSample], List[ImageTextSample], List[ImageTextSample]]:
    """``(train, val, eval)`` for the chosen protocol.

    Transductive: train and eval are the whole pool.  Inductive: a seeded
    permutation puts ``train_fraction`` of the pool in train and the rest
    in eval.  ``val_fraction`` of the train part is held out in both modes.
    """
    check_mode(mode)
    samples = list(samples)
    n = len(samples)
    order = np.random.default_rng(config.seed).permutation(n)
    shuffled = [samples[i] for i in order]

    if mode == "inductive":
        if n < 2:
            raise ConfigError("inductive mode needs at least 2 samples")
        n_train = min(n - 1, max(1, round(config.train_fraction * n)))
        train, held_out = shuffled[:n_train], shuffled[n_train:]
    else:
        train, held_out = shuffled, samples

    n_val = round(config.val_fraction * len(train))
    n_val = min(n_val, len(train) - 1)
    val = train[len(train) - n_val:] if n_val > 0 else []
    train = train[:len(train) - n_val]
    return train, val, held_out


def _has_ground_truth(samples: Sequence[ImageTextSample]) -> bool:
    return bool(samples) and all(s.gt_mask is not None for s in samples)


def fit(
    samples: Sequence[ImageTextSample],
    config: Optional[TrainConfig] = None,
    mode: str = "transductive",
    model_config: Optional[ModelConfig] = None,
    taxonomy: Optional[AttributeTaxonomy] = None,
    model: Optional[SegModel] = None,
    run_dir: Optional[str | Path] = None,
    hyperparameters: Optional[Dict[str, Any]] = None,
    progress: bool = False,
) -> FitResult:
    """Train a model on ``samples`` under the transductive or inductive protocol.

    Parameters
    ----------
    samples : sequence of ImageTextSample
        The pool. Ground-truth masks are only read by evaluation; when the
        evaluation set lacks them, evaluation is skipped.
    config : TrainConfig
    mode : {"transductive", "inductive"}
    model_config, taxonomy : optional
        Used to build the model when ``model`` is not given. Parameter
        initialisation is seeded with ``config.seed``.
    model : SegModel, optional
        Start from an existing model (trained in place).
    run_dir : path, optional
        Receives ``train_log.jsonl`` and ``checkpoints/{best,last}.pt``.
    hyperparameters : dict, optional
        Stored in the checkpoints; defaults to the train config.
    progress : bool
        Show a tqdm bar over epochs.
    """
    config = config or TrainConfig()
    check_mode(mode)
    samples = list(samples)
    if not samples:
        raise ValueError("cannot fit on an empty dataset")

    torch.manual_seed(config.seed)
    if model is None:
        model = SegModel(model_config, taxonomy)
    taxonomy = model.taxonomy
    hyperparameters = hyperparameters or {"mode": mode, **dataclasses.asdict(config)}

    train, val, held_out = split_pool(samples, mode, config)
    evaluate_on = held_out if _has_ground_truth(held_out) else []
    if not evaluate_on:
        logger.warning("evaluation set has no ground-truth masks; evaluation skipped")
    select_on = val if _has_ground_truth(val) else evaluate_on
    logger.info(
        "fit: mode=%s train=%d val=%d eval=%d epochs=%d", mode, len(train), len(val), len(evaluate_on), config.epochs
    )

    result = FitResult(
        model=model,
        mode=mode,
        train_ids=[s.sample_id for s in train],
        val_ids=[s.sample_id for s in val],
        eval_ids=[s.sample_id for s in held_out],
    )

    ckpt_dir = None
    log = None
    if run_dir is not None:
        run_dir = Path(run_dir)
        ckpt_dir = run_dir / "checkpoints"
        ckpt_dir.mkdir(parents=True, exist_ok=True)
        log = JsonLinesWriter(run_dir / LOG_NAME)

    dataset = SampleDataset(
        train, AugmentConfig() if config.augment else None, seed=config.seed, taxonomy=taxonomy
    )
    trainer = Trainer(model, config, log)
    alpha = config.weights.alpha
    best_score = -math.inf

    try:
        for epoch in tqdm(range(config.epochs), desc="train", unit="epoch", disable=not progress):
            dataset.set_epoch(epoch)
            loader = DataLoader(
                dataset,
                batch_size=config.batch_size,
                shuffle=True,
                collate_fn=collate_samples,
                num_workers=config.num_workers,
                generator=torch.Generator().manual_seed(config.seed * 1_000_003 + epoch),
            )
            record = EpochRecord(epoch=epoch, losses=trainer.train_epoch(loader, epoch))

            last_epoch = epoch == config.epochs - 1
            if evaluate_on and ((epoch + 1) % config.eval_every == 0 or last_epoch):
                record.eval = evaluate(model, evaluate_on, alpha, config.batch_size)
                if select_on is not evaluate_on:
                    record.val = evaluate(model, select_on, alpha, config.batch_size)
                score = (record.val or record.eval).dice
                if score > best_score:
                    best_score = score
                    result.best_epoch = epoch
                    result.best_state = copy.deepcopy(model.state_dict())
                    if ckpt_dir is not None:
                        save_checkpoint(ckpt_dir / BEST_NAME, model, hyperparameters, epoch, record.to_dict())
                if log is not None:
                    log.write({"event": "eval", **record.to_dict()})
                logger.info(
                    "epoch %d: l_total=%.4f dice=%.4f jaccard=%.4f",
                    epoch, record.losses.l_total, record.eval.dice, record.eval.jaccard,
                )
            else:
                logger.info("epoch %d: l_total=%.4f", epoch, record.losses.l_total)
            result.history.append(record)

        if ckpt_dir is not None:
            last = result.history[-1] if result.history else None
            save_checkpoint(
                ckpt_dir / LAST_NAME,
                model,
                hyperparameters,
                last.epoch if last else -1,
                last.to_dict() if last else {},
            )
    finally:
        if log is not None:
            log.close()

    model.eval()
    return result
