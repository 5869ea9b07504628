"""
Synthetic image-text-mask generator with known ground truth.

Scene model
===========

  - A dark thorax field with a faint vertical gradient.
  - Two bright lung fields (super-ellipses).  Radiological convention:
    the patient's LEFT lung is drawn on the image's RIGHT half.
  - Each lung's bounding box is split into three equal-height bands,
    upper / middle / lower.  A position category names a contiguous band
    range: "upper middle" is bands 1-2, "middle lower" bands 2-3 and
    "all" bands 1-3.
  - Faint rib stripes inside the lungs and Gaussian noise act as
    distractors for the saliency backend.
  - 1-6 elliptical infected blobs.  A lung with position range spanning
    ``span`` bands and ``k`` blobs lays them on a grid of
    ``rows x cols`` slots covering exactly that range (one column when
    ``k < span``), filling the first column top to bottom first, so every
    band of the range holds blob pixels and no band outside does.  Slots
    leave at least two pixels between blobs, hence the blob count equals
    the number of connected components of the ground truth.

The clinical text is rendered from the true labels with the attribute
grammar, so text and mask agree on side, count and zone by construction.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import ndimage

from lung_attr_seg.attributes.parser import (
    NO_POSITION,
    AttributeLabels,
    render_description,
    to_attribute_description,
)
from lung_attr_seg.attributes.taxonomy import (
    AREA_COUNT,
    LEFT_POSITION,
    RIGHT_POSITION,
    SIDE_COUNT,
    AttributeTaxonomy,
)
from lung_attr_seg.data.sample import ImageTextSample
from lung_attr_seg.data.saliency import BaselineLungSaliency, SaliencyBackend, check_threshold, coarse_mask
from lung_attr_seg.errors import ConfigError

logger = logging.getLogger(__name__)

MAX_BLOBS = 6
MIN_SIZE = 64

#: Band range (first, last), 0-based, for each position category.
POSITION_BANDS: Dict[str, Tuple[int, int]] = {
    "upper": (0, 0),
    "middle": (1, 1),
    "lower": (2, 2),
    "upper middle": (0, 1),
    "middle lower": (1, 2),
    "all": (0, 2),
}


@dataclass(frozen=True)
class GeneratorConfig:
    """Settings of the synthetic generator.

    Parameters
    ----------
    height, width : int
        Image size, at least 64 pixels each.
    max_blobs : int
        Largest infected-area count drawn; at most 6.
    blob_fill : (float, float)
        Range of the fraction of a slot a blob spans along each axis.
    bilateral_prob : float
        Probability of a bilateral case when labels are drawn.
    background, lung_intensity, blob_intensity, rib_intensity : float
        Intensity levels; blob and rib values are added on top of the lung.
    noise_std : float
        Additive Gaussian noise.
    edge_softness : float
        Gaussian sigma of blob edges in pixels at 224 px, scaled with height.
    tau : float
        Coarse-mask threshold applied to the saliency backend.
    seed : int
        Default seed used by the CLI.
    """

    height: int = 224
    width: int = 224
    max_blobs: int = MAX_BLOBS
    blob_fill: Tuple[float, float] = (0.6, 0.9)
    bilateral_prob: float = 0.5
    background: float = 0.08
    lung_intensity: float = 0.35
    blob_intensity: float = 0.4
    rib_intensity: float = 0.1
    noise_std: float = 0.03
    edge_softness: float = 1.5
    tau: float = 0.5
    seed: int = 0

    def __post_init__(self) -> None:
        if self.height < MIN_SIZE or self.width < MIN_SIZE:
            raise ConfigError(f"synthetic images need at least {MIN_SIZE}x{MIN_SIZE} pixels")
        if not 1 <= self.max_blobs <= MAX_BLOBS:
            raise ConfigError(f"max_blobs must be in 1..{MAX_BLOBS}, got {self.max_blobs}")
        lo, hi = self.blob_fill
        if not 0.0 < lo <= hi <= 1.0:
            raise ConfigError(f"blob_fill must satisfy 0 < lo <= hi <= 1, got {self.blob_fill}")
        if not 0.0 <= self.bilateral_prob <= 1.0:
            raise ConfigError(f"bilateral_prob must be in [0, 1], got {self.bilateral_prob}")
        check_threshold("tau", self.tau)


@dataclass(frozen=True)
class LungGeometry:
    """Axis-aligned lung field: centre and semi-axes in pixels."""

    cy: float
    cx: float
    ry: float
    rx: float

    def band_edges(self) -> np.ndarray:
        return np.linspace(self.cy - self.ry, self.cy + self.ry, 4)

    def mask(self, yy: np.ndarray, xx: np.ndarray) -> np.ndarray:
        return (np.abs((yy - self.cy) / self.ry) ** 4 + np.abs((xx - self.cx) / self.rx) ** 4) <= 1.0


def lung_geometry(height: int, width: int) -> Dict[int, LungGeometry]:
    """Lung fields keyed by position attribute id (left lung on the image right)."""
    cy, ry, rx = 0.5 * height, 0.36 * height, 0.17 * width
    return {
        LEFT_POSITION: LungGeometry(cy=cy, cx=0.72 * width, ry=ry, rx=rx),
        RIGHT_POSITION: LungGeometry(cy=cy, cx=0.28 * width, ry=ry, rx=rx),
    }


def check_labels(labels: AttributeLabels, taxonomy: AttributeTaxonomy, max_blobs: int = MAX_BLOBS) -> None:
    """Reject label combinations no image can realise."""
    side, count, left, right = labels.values(taxonomy)
    n = taxonomy.attribute(AREA_COUNT).values.index(count) + 1
    positioned = [p for p in (left, right) if p != NO_POSITION]
    if n > max_blobs:
        raise ConfigError(f"requested {n} infected areas, at most {max_blobs} supported")
    if not positioned:
        raise ConfigError("at least one lung must hold an infected area")
    expected_side = "bilateral" if len(positioned) == 2 else "unilateral"
    if side != expected_side:
        raise ConfigError(f"{side} infection inconsistent with positions ({left}, {right})")
    if n < len(positioned):
        raise ConfigError(f"{n} infected area(s) cannot cover {len(positioned)} lungs")


def draw_labels(rng: np.random.Generator, config: GeneratorConfig, taxonomy: AttributeTaxonomy) -> AttributeLabels:
    positions = [p for p in taxonomy.attribute(LEFT_POSITION).values if p != NO_POSITION]
    bilateral = config.max_blobs >= 2 and rng.random() < config.bilateral_prob
    if bilateral:
        n = int(rng.integers(2, config.max_blobs + 1))
        left, right = rng.choice(positions), rng.choice(positions)
    else:
        n = int(rng.integers(1, config.max_blobs + 1))
        pos = rng.choice(positions)
        left, right = (pos, NO_POSITION) if rng.random() < 0.5 else (NO_POSITION, pos)
    count = taxonomy.attribute(AREA_COUNT).values[n - 1]
    side = "bilateral" if bilateral else "unilateral"
    return AttributeLabels.from_values((side, count, str(left), str(right)), taxonomy)


def _split_count(rng: np.random.Generator, n: int, lungs: Sequence[int]) -> Dict[int, int]:
    if len(lungs) == 1:
        return {lungs[0]: n}
    first = int(rng.integers(1, n))
    return {lungs[0]: first, lungs[1]: n - first}


def _blob_slots(geom: LungGeometry, bands: Tuple[int, int], k: int) -> List[Tuple[float, float, float, float]]:
    """Slot boxes ``(y0, y1, x0, x1)`` for ``k`` blobs over a band range."""
    edges = geom.band_edges()
    y0, y1 = edges[bands[0]], edges[bands[1] + 1]
    span = bands[1] - bands[0] + 1
    rows = k if k < span else max(span, math.ceil(k / 2))
    cols = math.ceil(k / rows)
    x0, x1 = geom.cx - 0.8 * geom.rx, geom.cx + 0.8 * geom.rx
    row_h, col_w = (y1 - y0) / rows, (x1 - x0) / cols

    slots = []
    for i in range(k):
        col, row = divmod(i, rows)
        # A lone blob in a row stays centred on the lung axis.
        n_in_row = sum(1 for j in range(k) if j % rows == row)
        if n_in_row == 1:
            sx0, sx1 = x0, x1
        else:
            sx0, sx1 = x0 + col * col_w, x0 + (col + 1) * col_w
        slots.append((y0 + row * row_h, y0 + (row + 1) * row_h, sx0, sx1))
    return slots


def _blob_mask(
    rng: np.random.Generator,
    slot: Tuple[float, float, float, float],
    fill: Tuple[float, float],
    yy: np.ndarray,
    xx: np.ndarray,
) -> np.ndarray:
    y0, y1, x0, x1 = slot
    cy, cx = 0.5 * (y0 + y1), 0.5 * (x0 + x1)
    # Semi-axes leave at least one empty pixel row/column to the slot edge.
    ry = min(0.5 * (y1 - y0) * rng.uniform(*fill), 0.5 * (y1 - y0) - 1.0)
    rx = min(0.5 * (x1 - x0) * rng.uniform(*fill), 0.5 * (x1 - x0) - 1.0)
    ry, rx = max(ry, 1.0), max(rx, 1.0)
    return ((yy - cy) / ry) ** 2 + ((xx - cx) / rx) ** 2 <= 1.0


def render_scene(
    rng: np.random.Generator,
    labels: AttributeLabels,
    config: GeneratorConfig,
    taxonomy: AttributeTaxonomy,
) -> Tuple[np.ndarray, np.ndarray]:
    """Draw ``(image, gt_mask)`` for the given labels."""
    check_labels(labels, taxonomy, config.max_blobs)
    H, W = config.height, config.width
    yy, xx = np.mgrid[0:H, 0:W].astype(np.float64)
    geoms = lung_geometry(H, W)

    image = config.background + 0.04 * yy / H
    lungs = np.zeros((H, W), dtype=bool)
    for geom in geoms.values():
        m = geom.mask(yy, xx)
        lungs |= m
        image[m] = config.lung_intensity + 0.05 * (yy[m] - geom.cy) / geom.ry

    period = H / rng.uniform(5.0, 7.0)
    phase = rng.uniform(0, 2 * np.pi)
    ribs = (np.sin(2 * np.pi * yy / period + phase + 0.15 * np.abs(xx - 0.5 * W) / W * 2 * np.pi) > 0.75)
    image += config.rib_intensity * ndimage.gaussian_filter((ribs & lungs).astype(float), 0.01 * H)

    values = labels.values(taxonomy)
    n = labels.categories[AREA_COUNT - 1] + 1
    positioned = [a for a in (LEFT_POSITION, RIGHT_POSITION) if values[a - 1] != NO_POSITION]
    counts = _split_count(rng, n, positioned)

    gt = np.zeros((H, W), dtype=bool)
    for attr_id in positioned:
        geom = geoms[attr_id]
        lung = geom.mask(yy, xx)
        for slot in _blob_slots(geom, POSITION_BANDS[values[attr_id - 1]], counts[attr_id]):
            gt |= _blob_mask(rng, slot, config.blob_fill, yy, xx) & lung

    softness = config.edge_softness * H / 224.0
    image += config.blob_intensity * ndimage.gaussian_filter(gt.astype(float), softness)
    image += rng.normal(0.0, config.noise_std, size=image.shape)
    image = np.clip(image, 0.0, 1.0).astype(np.float32)
    return image[None], gt.astype(np.uint8)[None]


def synth_generate(
    seed: int,
    n: int,
    config: Optional[GeneratorConfig] = None,
    forced_labels: Optional[AttributeLabels] = None,
    backend: Optional[SaliencyBackend] = None,
    taxonomy: Optional[AttributeTaxonomy] = None,
) -> List[ImageTextSample]:
    """Generate ``n`` samples; identical arguments give bit-identical samples.

    Raises
    ------
    ConfigError
        ``n < 1``, or forced labels that ask for more than ``max_blobs``
        areas or contradict themselves.
    """
    if n < 1:
        raise ConfigError(f"n must be >= 1, got {n}")
    config = config or GeneratorConfig()
    taxonomy = taxonomy or AttributeTaxonomy.default()
    backend = backend or BaselineLungSaliency()
    if forced_labels is not None:
        check_labels(forced_labels, taxonomy, config.max_blobs)

    samples = []
    for i in range(n):
        rng = np.random.default_rng([seed, i])
        labels = forced_labels or draw_labels(rng, config, taxonomy)
        image, gt = render_scene(rng, labels, config, taxonomy)
        samples.append(
            ImageTextSample(
                sample_id=f"synth_{seed}_{i:05d}",
                image=image,
                raw_text=render_description(labels, taxonomy),
                attr_description=to_attribute_description(labels, taxonomy),
                attr_labels=labels,
                coarse_mask=coarse_mask(image, backend, config.tau),
                gt_mask=gt,
            )
        )
    logger.debug("generated %d synthetic samples (seed=%d)", n, seed)
    return samples
