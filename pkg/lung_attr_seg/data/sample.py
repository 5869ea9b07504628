"""
ImageTextSample: one training record.

Arrays are stored channel-first, ``(1, H, W)``.  Images are float32 in
[0, 1]; masks are uint8 in {0, 1}.  Arrays are made read-only on
construction so a sample cannot change once built.  ``gt_mask`` is kept
for evaluation only and never reaches a loss.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Optional

import numpy as np

from lung_attr_seg.attributes.parser import AttributeDescription, AttributeLabels
from lung_attr_seg.errors import ShapeMismatch


@dataclass(frozen=True)
class ImageTextSample:
    """Image, clinical text, attribute targets and coarse supervision.

    Parameters
    ----------
    sample_id : str
    image : ndarray, float32 (1, H, W) in [0, 1]
    raw_text : str
        Clinical description T.
    attr_description : AttributeDescription
        Compact attribute sentence A built from ``attr_labels``.
    attr_labels : AttributeLabels
        Category targets {C_m}.
    coarse_mask : ndarray, uint8 (1, H, W) in {0, 1}
        Thresholded saliency, the only segmentation supervision.
    gt_mask : ndarray, optional
        Ground truth, evaluation only.
    """

    sample_id: str
    image: np.ndarray
    raw_text: str
    attr_description: AttributeDescription
    attr_labels: AttributeLabels
    coarse_mask: np.ndarray
    gt_mask: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        image = np.asarray(self.image, dtype=np.float32)
        if image.ndim != 3 or image.shape[0] != 1:
            raise ShapeMismatch("image", (1, "H", "W"), image.shape)
        if image.size and (image.min() < 0.0 or image.max() > 1.0):
            raise ValueError(f"sample {self.sample_id}: image values outside [0, 1]")
        object.__setattr__(self, "image", _frozen(image))
        object.__setattr__(self, "coarse_mask", _frozen(_binary(self.coarse_mask, image.shape, "coarse_mask")))
        if self.gt_mask is not None:
            object.__setattr__(self, "gt_mask", _frozen(_binary(self.gt_mask, image.shape, "gt_mask")))

    @property
    def height(self) -> int:
        return self.image.shape[1]

    @property
    def width(self) -> int:
        return self.image.shape[2]

    def replace(self, **changes) -> "ImageTextSample":
        return dataclasses.replace(self, **changes)


def _binary(mask: np.ndarray, shape, name: str) -> np.ndarray:
    mask = np.asarray(mask)
    if mask.shape != shape:
        raise ShapeMismatch(name, shape, mask.shape)
    if not np.isin(mask, (0, 1)).all():
        raise ValueError(f"{name} must be binary")
    return mask.astype(np.uint8)


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, copy=True)
    arr.setflags(write=False)
    return arr
