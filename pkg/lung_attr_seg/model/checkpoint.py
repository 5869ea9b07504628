"""
Self-describing checkpoints.

Payload (``torch.save``)::

    {
      "format": 1,
      "state_dict": {name: tensor},          # frozen encoder table included
      "model_config": {...},                 # ModelConfig fields
      "taxonomy": "<taxonomy file text>",
      "hyperparameters": {...},              # resolved run config
      "epoch": int,
      "metrics": {...},
    }

Loading rebuilds the model from the stored config and taxonomy and checks
every tensor's shape before copying it in.
"""

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional

import torch

from lung_attr_seg.attributes.taxonomy import AttributeTaxonomy
from lung_attr_seg.errors import CheckpointMismatch
from lung_attr_seg.model.config import ModelConfig
from lung_attr_seg.model.network import SegModel

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1


@dataclass
class Checkpoint:
    model: SegModel
    hyperparameters: Dict[str, Any] = field(default_factory=dict)
    epoch: int = 0
    metrics: Dict[str, Any] = field(default_factory=dict)


def save_checkpoint(
    filepath: str | Path,
    model: SegModel,
    hyperparameters: Optional[Dict[str, Any]] = None,
    epoch: int = 0,
    metrics: Optional[Dict[str, Any]] = None,
) -> None:
    payload = {
        "format": FORMAT_VERSION,
        "state_dict": {k: v.detach().cpu().clone() for k, v in model.state_dict().items()},
        "model_config": dataclasses.asdict(model.config),
        "taxonomy": model.taxonomy.to_text(),
        "hyperparameters": dict(hyperparameters or {}),
        "epoch": int(epoch),
        "metrics": dict(metrics or {}),
    }
    torch.save(payload, Path(filepath))
    logger.debug("saved checkpoint %s (epoch %d)", filepath, epoch)


def load_checkpoint(filepath: str | Path) -> Checkpoint:
    filepath = Path(filepath)
    if not filepath.exists():
        raise FileNotFoundError(f"checkpoint not found: {filepath}")
    payload = torch.load(filepath, map_location="cpu", weights_only=True)
    if payload.get("format") != FORMAT_VERSION:
        raise CheckpointMismatch(f"{filepath}: unsupported checkpoint format {payload.get('format')!r}")

    cfg_dict = dict(payload["model_config"])
    config = ModelConfig(**cfg_dict)
    taxonomy = AttributeTaxonomy.from_text(payload["taxonomy"])
    model = SegModel(config, taxonomy)

    expected = model.state_dict()
    stored = payload["state_dict"]
    missing = sorted(set(expected) - set(stored))
    unexpected = sorted(set(stored) - set(expected))
    if missing or unexpected:
        raise CheckpointMismatch(f"{filepath}: missing {missing}, unexpected {unexpected}")
    for name, tensor in stored.items():
        if tuple(tensor.shape) != tuple(expected[name].shape):
            raise CheckpointMismatch(
                f"{filepath}: {name} has shape {tuple(tensor.shape)}, "
                f"model expects {tuple(expected[name].shape)}"
            )
    model.load_state_dict(stored)
    model.eval()
    return Checkpoint(
        model=model,
        hyperparameters=payload.get("hyperparameters", {}),
        epoch=payload.get("epoch", 0),
        metrics=payload.get("metrics", {}),
    )
