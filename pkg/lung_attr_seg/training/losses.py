"""
Objective terms.

    L_seg(P, Y) = 0.5 * BCE(sigmoid(P), Y) + 0.5 * Dice(P, Y)
    L_c         = L_seg(P, Y_hat)                     coarse masks
    L_a         = sum_m CE(softmax(e_m(x_MI)), C_m)   summed over heads
    Y_bar       = 1[sigmoid(P) > delta]               detached pseudo-labels
    L_st        = L_seg(P, Y_bar)
    L_total     = lambda_c * L_c + lambda_a * L_a + lambda_st * L_st

Masks are ``(B, 1, H, W)`` (a single ``(1, H, W)`` mask is accepted too).
BCE is the pixel mean; Dice is computed per sample and averaged over the
batch; cross-entropy is the batch mean per head.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import torch
import torch.nn.functional as F

from lung_attr_seg.data.saliency import check_threshold
from lung_attr_seg.errors import ConfigError, InvalidLabels, ShapeMismatch

DICE_EPS = 1e-6


@dataclass(frozen=True)
class LossWeights:
    """Loss weights and thresholds.

    Parameters
    ----------
    lambda_c, lambda_a, lambda_st : float
        Non-negative weights of L_c, L_a and L_st.
    alpha : float
        Gate threshold of the mask-guided features (and evaluation).
    delta : float
        Pseudo-label confidence threshold.
    tau : float
        Coarse-mask threshold.
    attribute_heads : tuple of int
        1-based ids of the heads that contribute to L_a.
    """

    lambda_c: float = 1.0
    lambda_a: float = 0.9
    lambda_st: float = 1.0
    alpha: float = 0.5
    delta: float = 0.7
    tau: float = 0.5
    attribute_heads: Tuple[int, ...] = (1, 2, 3, 4)

    def __post_init__(self) -> None:
        for name in ("lambda_c", "lambda_a", "lambda_st"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0, got {getattr(self, name)}")
        for name in ("alpha", "delta", "tau"):
            check_threshold(name, getattr(self, name))
        if any(h < 1 for h in self.attribute_heads):
            raise ConfigError(f"attribute head ids are 1-based, got {self.attribute_heads}")


@dataclass
class LossReport:
    """Scalar losses of one step (or the mean over several)."""

    l_c: float
    l_a: float
    l_st: float
    l_total: float
    pseudo_label_coverage: float = 0.0
    weights: Dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "l_c": self.l_c,
            "l_a": self.l_a,
            "l_st": self.l_st,
            "l_total": self.l_total,
            "coverage": self.pseudo_label_coverage,
        }

    def is_finite(self) -> bool:
        return all(math.isfinite(v) for v in (self.l_c, self.l_a, self.l_st, self.l_total))

    @classmethod
    def mean(cls, reports: Sequence["LossReport"]) -> "LossReport":
        if not reports:
            raise ValueError("no reports to average")
        n = len(reports)
        return cls(
            l_c=sum(r.l_c for r in reports) / n,
            l_a=sum(r.l_a for r in reports) / n,
            l_st=sum(r.l_st for r in reports) / n,
            l_total=sum(r.l_total for r in reports) / n,
            pseudo_label_coverage=sum(r.pseudo_label_coverage for r in reports) / n,
            weights=dict(reports[-1].weights),
        )


def _flatten_pair(P: torch.Tensor, Y: torch.Tensor) -> Tuple[torch.Tensor, torch.Tensor]:
    if P.shape != Y.shape:
        raise ShapeMismatch("target mask", tuple(P.shape), tuple(Y.shape))
    if P.dim() == 3:
        P, Y = P.unsqueeze(0), Y.unsqueeze(0)
    return P.reshape(P.shape[0], -1), Y.reshape(Y.shape[0], -1).to(P.dtype)


def dice_loss(P: torch.Tensor, Y: torch.Tensor, eps: float = DICE_EPS) -> torch.Tensor:
    """``1 - (2 sum(sigma(P) Y) + eps) / (sum sigma(P) + sum Y + eps)``, batch mean."""
    P, Y = _flatten_pair(P, Y)
    probs = torch.sigmoid(P)
    inter = (probs * Y).sum(dim=1)
    dice = (2.0 * inter + eps) / (probs.sum(dim=1) + Y.sum(dim=1) + eps)
    return (1.0 - dice).mean()


def seg_loss(P: torch.Tensor, Y: torch.Tensor) -> torch.Tensor:
    """Half pixel-mean binary cross-entropy, half Dice loss."""
    Pf, Yf = _flatten_pair(P, Y)
    bce = F.binary_cross_entropy_with_logits(Pf, Yf)
    return 0.5 * bce + 0.5 * dice_loss(P, Y)


def coarse_loss(P: torch.Tensor, coarse_mask: torch.Tensor) -> torch.Tensor:
    return seg_loss(P, coarse_mask)


def attribute_loss(
    attr_logits: Sequence[torch.Tensor],
    labels: torch.Tensor,
    heads: Optional[Sequence[int]] = None,
) -> torch.Tensor:
    """Sum over the selected heads of the batch-mean softmax cross-entropy.

    ``labels`` is ``(B, M)`` (or ``(M,)``) integer categories; ``heads``
    holds 1-based head ids and defaults to all of them.
    """
    if labels.dim() == 1:
        labels = labels.unsqueeze(0)
        attr_logits = [l.unsqueeze(0) if l.dim() == 1 else l for l in attr_logits]
    if labels.shape[1] != len(attr_logits):
        raise InvalidLabels(f"{labels.shape[1]} label columns for {len(attr_logits)} heads")
    heads = range(1, len(attr_logits) + 1) if heads is None else heads

    total = attr_logits[0].new_zeros(())
    for m in heads:
        if not 1 <= m <= len(attr_logits):
            raise InvalidLabels(f"head id {m} outside 1..{len(attr_logits)}")
        logits, target = attr_logits[m - 1], labels[:, m - 1]
        width = logits.shape[-1]
        if bool(((target < 0) | (target >= width)).any()):
            raise InvalidLabels(f"attribute {m}: label outside [0, {width})")
        total = total + F.cross_entropy(logits, target)
    return total


def pseudo_labels(P: torch.Tensor, delta: float = 0.7) -> torch.Tensor:
    """``1[sigmoid(P) > delta]`` as a detached float mask."""
    check_threshold("delta", delta)
    with torch.no_grad():
        return (torch.sigmoid(P) > delta).to(P.dtype)


def self_training_loss(P: torch.Tensor, delta: float = 0.7) -> torch.Tensor:
    return seg_loss(P, pseudo_labels(P, delta))


def total_loss(l_c, l_a, l_st, weights: LossWeights):
    return weights.lambda_c * l_c + weights.lambda_a * l_a + weights.lambda_st * l_st


def assemble_losses(
    P: torch.Tensor,
    attr_logits: List[torch.Tensor],
    coarse_masks: torch.Tensor,
    labels: torch.Tensor,
    weights: LossWeights,
    self_training: bool = True,
) -> Tuple[torch.Tensor, Dict[str, torch.Tensor], float]:
    """All terms of one batch: ``(L_total, {name: term}, pseudo-label coverage)``.

    L_st is zero when ``self_training`` is False (warm-up epochs).
    """
    l_c = coarse_loss(P, coarse_masks)
    l_a = attribute_loss(attr_logits, labels, weights.attribute_heads)
    if self_training:
        y_bar = pseudo_labels(P, weights.delta)
        l_st = seg_loss(P, y_bar)
        coverage = float(y_bar.mean())
    else:
        l_st = P.new_zeros(())
        coverage = 0.0
    terms = {"l_c": l_c, "l_a": l_a, "l_st": l_st}
    return total_loss(l_c, l_a, l_st, weights), terms, coverage
