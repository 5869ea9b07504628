"""Overlap metrics on binary masks.

Both metrics define the empty-vs-empty case as 1, and satisfy
``J = D / (2 - D)`` for every pair.
"""

from __future__ import annotations

from typing import Tuple

import numpy as np

from lung_attr_seg.errors import ShapeMismatch


def _counts(pred, gt) -> Tuple[int, int, int]:
    a = np.asarray(pred)
    b = np.asarray(gt)
    if a.shape != b.shape:
        raise ShapeMismatch("mask pair", a.shape, b.shape)
    for name, arr in (("pred", a), ("gt", b)):
        if arr.dtype != bool and np.any((arr != 0) & (arr != 1)):
            raise ValueError(f"{name} mask is not binary")
    a = a.astype(bool)
    b = b.astype(bool)
    return int(np.count_nonzero(a & b)), int(np.count_nonzero(a)), int(np.count_nonzero(b))


def dice_metric(pred, gt) -> float:
    """``2 |A & B| / (|A| + |B|)``; 1.0 when both masks are empty."""
    inter, na, nb = _counts(pred, gt)
    if na + nb == 0:
        return 1.0
    return 2.0 * inter / (na + nb)


def jaccard_metric(pred, gt) -> float:
    """``|A & B| / |A | B|``; 1.0 when both masks are empty."""
    inter, na, nb = _counts(pred, gt)
    union = na + nb - inter
    if union == 0:
        return 1.0
    return inter / union


def dice_jaccard(pred, gt) -> Tuple[float, float]:
    """Both metrics from a single pass over the masks."""
    inter, na, nb = _counts(pred, gt)
    if na + nb == 0:
        return 1.0, 1.0
    return 2.0 * inter / (na + nb), inter / (na + nb - inter)
