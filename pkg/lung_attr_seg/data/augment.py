"""
Joint image/mask/label augmentation: rotation and flips.

Masks are transformed with the image (nearest-neighbour for masks).  Flips
also move the attribute targets so they keep describing the image:

  - horizontal flip exchanges the left and right lung, i.e. attributes
    3 and 4 swap; the side count (attribute 1) is symmetric
  - vertical flip turns upper into lower zones:
    upper <-> lower, upper middle <-> middle lower

Whenever the labels change the texts are re-rendered from them.
Rotations are small (default +/-15 degrees) and keep labels as they are.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import ndimage

from lung_attr_seg.attributes.parser import (
    AttributeLabels,
    render_description,
    to_attribute_description,
)
from lung_attr_seg.attributes.taxonomy import LEFT_POSITION, RIGHT_POSITION, AttributeTaxonomy
from lung_attr_seg.data.sample import ImageTextSample

_VERTICAL_MIRROR = {
    "upper": "lower",
    "lower": "upper",
    "upper middle": "middle lower",
    "middle lower": "upper middle",
}


@dataclass(frozen=True)
class AugmentConfig:
    max_rotation: float = 15.0
    p_hflip: float = 0.5
    p_vflip: float = 0.5


def mirror_vertical(labels: AttributeLabels, taxonomy: AttributeTaxonomy) -> AttributeLabels:
    values = list(labels.values(taxonomy))
    for attr_id in (LEFT_POSITION, RIGHT_POSITION):
        values[attr_id - 1] = _VERTICAL_MIRROR.get(values[attr_id - 1], values[attr_id - 1])
    return AttributeLabels.from_values(values, taxonomy)


def augment_sample(
    sample: ImageTextSample,
    rng: np.random.Generator,
    config: Optional[AugmentConfig] = None,
    taxonomy: Optional[AttributeTaxonomy] = None,
) -> ImageTextSample:
    config = config or AugmentConfig()
    taxonomy = taxonomy or AttributeTaxonomy.default()

    image = sample.image[0].astype(np.float32)
    coarse = sample.coarse_mask[0]
    gt = None if sample.gt_mask is None else sample.gt_mask[0]
    labels = sample.attr_labels

    if rng.random() < config.p_hflip:
        image, coarse = image[:, ::-1], coarse[:, ::-1]
        gt = None if gt is None else gt[:, ::-1]
        labels = labels.swap_sides()
    if rng.random() < config.p_vflip:
        image, coarse = image[::-1, :], coarse[::-1, :]
        gt = None if gt is None else gt[::-1, :]
        labels = mirror_vertical(labels, taxonomy)

    angle = rng.uniform(-config.max_rotation, config.max_rotation) if config.max_rotation > 0 else 0.0
    if angle:
        image = ndimage.rotate(image, angle, reshape=False, order=1, mode="nearest")
        coarse = ndimage.rotate(coarse, angle, reshape=False, order=0, mode="constant", cval=0)
        if gt is not None:
            gt = ndimage.rotate(gt, angle, reshape=False, order=0, mode="constant", cval=0)

    changes = dict(
        image=np.clip(image, 0.0, 1.0)[None],
        coarse_mask=np.ascontiguousarray(coarse)[None],
        gt_mask=None if gt is None else np.ascontiguousarray(gt)[None],
    )
    if labels != sample.attr_labels:
        changes.update(
            attr_labels=labels,
            raw_text=render_description(labels, taxonomy),
            attr_description=to_attribute_description(labels, taxonomy),
        )
    return sample.replace(**changes)
