"""Batching: a torch ``Dataset`` over samples and the collate function."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
import torch
from torch.utils.data import Dataset

from lung_attr_seg.attributes.taxonomy import AttributeTaxonomy
from lung_attr_seg.data.augment import AugmentConfig, augment_sample
from lung_attr_seg.data.sample import ImageTextSample
from lung_attr_seg.errors import ShapeMismatch


@dataclass
class Batch:
    """Stacked tensors of a list of samples."""

    sample_ids: List[str]
    images: torch.Tensor  # (B, 1, H, W) float32
    coarse_masks: torch.Tensor  # (B, 1, H, W) float32 in {0, 1}
    labels: torch.Tensor  # (B, M) int64
    attr_texts: List[str]
    raw_texts: List[str]
    gt_masks: Optional[torch.Tensor] = None

    def __len__(self) -> int:
        return len(self.sample_ids)

    def texts(self, text_input: str) -> List[str]:
        return self.attr_texts if text_input == "attributes" else self.raw_texts


def collate_samples(samples: Sequence[ImageTextSample]) -> Batch:
    if not samples:
        raise ValueError("cannot collate an empty batch")
    shape = samples[0].image.shape
    for s in samples:
        if s.image.shape != shape:
            raise ShapeMismatch(f"sample {s.sample_id} image", shape, s.image.shape)
    has_gt = all(s.gt_mask is not None for s in samples)
    return Batch(
        sample_ids=[s.sample_id for s in samples],
        images=torch.from_numpy(np.stack([s.image for s in samples])).float(),
        coarse_masks=torch.from_numpy(np.stack([s.coarse_mask for s in samples])).float(),
        labels=torch.tensor([s.attr_labels.categories for s in samples], dtype=torch.long),
        attr_texts=[s.attr_description.text for s in samples],
        raw_texts=[s.raw_text for s in samples],
        gt_masks=torch.from_numpy(np.stack([s.gt_mask for s in samples])).float() if has_gt else None,
    )


class SampleDataset(Dataset):
    """Samples with optional per-epoch augmentation.

    The augmentation stream of item ``i`` in epoch ``e`` is seeded with
    ``(seed, e, i)``, so results do not depend on worker count or order.
    """

    def __init__(
        self,
        samples: Sequence[ImageTextSample],
        augment: Optional[AugmentConfig] = None,
        seed: int = 0,
        taxonomy: Optional[AttributeTaxonomy] = None,
    ) -> None:
        self.samples = list(samples)
        self.augment = augment
        self.seed = seed
        self.taxonomy = taxonomy or AttributeTaxonomy.default()
        self.epoch = 0

    def set_epoch(self, epoch: int) -> None:
        self.epoch = epoch

    def __len__(self) -> int:
        return len(self.samples)

    def __getitem__(self, index: int) -> ImageTextSample:
        sample = self.samples[index]
        if self.augment is None:
            return sample
        rng = np.random.default_rng([self.seed, self.epoch, index])
        return augment_sample(sample, rng, self.augment, self.taxonomy)
