"""Mask-guided feature gating and the M attribute classifiers."""

from __future__ import annotations

from typing import List, Sequence

import torch
import torch.nn as nn
import torch.nn.functional as F


def prediction_gate(P: torch.Tensor, alpha: float, size) -> torch.Tensor:
    """``1[sigmoid(P) > alpha]`` downsampled to ``size`` by nearest neighbour; no gradient."""
    with torch.no_grad():
        gate = (torch.sigmoid(P) > alpha).to(P.dtype)
        return F.interpolate(gate, size=tuple(size), mode="nearest")


def masked_features(x_I: torch.Tensor, P: torch.Tensor, alpha: float = 0.5) -> torch.Tensor:
    """x_MI = x_I * gate, the gate broadcast over channels and held constant."""
    return x_I * prediction_gate(P, alpha, x_I.shape[-2:])


class AttributeClassifier(nn.Module):
    """Global average pooling, then two fully-connected layers with a ReLU."""

    def __init__(self, channels: int, hidden: int, n_classes: int) -> None:
        super().__init__()
        self.pool = nn.AdaptiveAvgPool2d(1)
        self.fc1 = nn.Linear(channels, hidden)
        self.fc2 = nn.Linear(hidden, n_classes)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.fc2(F.relu(self.fc1(self.pool(x).flatten(1))))


class AttributeHeads(nn.Module):
    def __init__(self, channels: int, hidden: int, sizes: Sequence[int]) -> None:
        super().__init__()
        self.heads = nn.ModuleList(AttributeClassifier(channels, hidden, n) for n in sizes)

    def forward(self, x: torch.Tensor) -> List[torch.Tensor]:
        return [head(x) for head in self.heads]
