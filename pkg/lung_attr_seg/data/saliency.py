"""
Coarse-mask generation from an unsupervised saliency backend.

    Y_hat = 1[ sigmoid(N_sal(I)) > tau ]

``N_sal`` is anything with ``score(image) -> logits`` of the image's
shape.  The baseline here is training free:

  1. Percentile-normalise the intensities.
  2. Lung template: smooth, threshold, keep the two largest connected
     components and fill their holes.
  3. Inside the template, score opacity against the median lung
     intensity, so logits are positive where the lung is brighter than
     the typical aerated tissue.  Outside the template the logit is a
     constant negative value.

Backend logits are passed to the sigmoid unscaled.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, runtime_checkable

import numpy as np
from scipy import ndimage
from scipy.special import expit

from lung_attr_seg.errors import ConfigError, ShapeMismatch


@runtime_checkable
class SaliencyBackend(Protocol):
    """Source of unbounded saliency logits, one per pixel."""

    def score(self, image: np.ndarray) -> np.ndarray:  # pragma: no cover - protocol
        ...


def check_threshold(name: str, value: float) -> float:
    if not 0.0 < value < 1.0:
        raise ConfigError(f"{name} must lie strictly inside (0, 1), got {value}")
    return float(value)


def coarse_mask(image: np.ndarray, backend: SaliencyBackend, tau: float = 0.5) -> np.ndarray:
    """Binary coarse mask ``1[sigmoid(backend.score(image)) > tau]`` as uint8."""
    tau = check_threshold("tau", tau)
    image = np.asarray(image, dtype=np.float32)
    scores = np.asarray(backend.score(image))
    if scores.shape != image.shape:
        raise ShapeMismatch("saliency scores", image.shape, scores.shape)
    return (expit(scores.astype(np.float64)) > tau).astype(np.uint8)


@dataclass(frozen=True)
class BaselineLungSaliency:
    """Heuristic lung-opacity saliency.

    Parameters
    ----------
    lung_threshold : float
        Normalised intensity separating lung fields from the thorax background.
    smoothing : float
        Gaussian sigma (pixels) for the template and the opacity map,
        scaled by image height / 224.
    gain : float
        Logit per unit of normalised opacity contrast.
    outside_logit : float
        Logit assigned outside the lung template.
    """

    lung_threshold: float = 0.2
    smoothing: float = 2.0
    gain: float = 12.0
    outside_logit: float = -10.0

    def lung_template(self, image: np.ndarray) -> np.ndarray:
        norm = _normalise(image[0])
        sigma = self.smoothing * image.shape[1] / 224.0
        fg = ndimage.gaussian_filter(norm, sigma=max(sigma, 0.5)) > self.lung_threshold
        labels, n = ndimage.label(fg)
        if n == 0:
            return np.zeros_like(fg)
        sizes = ndimage.sum(fg, labels, index=np.arange(1, n + 1))
        keep = np.argsort(sizes)[::-1][:2] + 1
        return ndimage.binary_fill_holes(np.isin(labels, keep))

    def score(self, image: np.ndarray) -> np.ndarray:
        image = np.asarray(image, dtype=np.float32)
        lungs = self.lung_template(image)
        out = np.full(image.shape, self.outside_logit, dtype=np.float32)
        if not lungs.any():
            return out

        norm = _normalise(image[0])
        sigma = 0.5 * self.smoothing * image.shape[1] / 224.0
        opacity = ndimage.gaussian_filter(norm, sigma=max(sigma, 0.25))
        inside = opacity[lungs]
        base = float(np.median(inside))
        peak = float(np.percentile(inside, 99.5))
        contrast = max(peak - base, 1e-3)
        midpoint = base + 0.5 * contrast
        logits = self.gain * (opacity - midpoint) / contrast
        out[0][lungs] = logits[lungs]
        return out


@dataclass(frozen=True)
class ConstantSaliency:
    """Backend returning one fixed logit everywhere."""

    value: float = 0.0

    def score(self, image: np.ndarray) -> np.ndarray:
        return np.full(np.shape(image), self.value, dtype=np.float32)


def _normalise(img: np.ndarray) -> np.ndarray:
    lo, hi = np.percentile(img, [1.0, 99.0])
    if hi - lo < 1e-6:
        return np.zeros_like(img, dtype=np.float32)
    return np.clip((img - lo) / (hi - lo), 0.0, 1.0).astype(np.float32)
