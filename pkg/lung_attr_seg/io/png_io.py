"""8-bit grayscale PNG images and {0,255} PNG masks."""

from __future__ import annotations

from pathlib import Path
from typing import Optional, Tuple

import numpy as np
from PIL import Image


def read_image(filepath: str | Path, size: Optional[Tuple[int, int]] = None) -> np.ndarray:
    """Load a grayscale image as float32 ``(1, H, W)`` in [0, 1].

    ``size`` is ``(H, W)``; resizing is bilinear.
    """
    with Image.open(filepath) as im:
        im = im.convert("L")
        if size is not None and im.size != (size[1], size[0]):
            im = im.resize((size[1], size[0]), Image.BILINEAR)
        arr = np.asarray(im, dtype=np.float32) / 255.0
    return arr[None]


def read_mask(filepath: str | Path, size: Optional[Tuple[int, int]] = None) -> np.ndarray:
    """Load a mask as uint8 ``(1, H, W)`` in {0, 1}; nearest-neighbour resize."""
    with Image.open(filepath) as im:
        im = im.convert("L")
        if size is not None and im.size != (size[1], size[0]):
            im = im.resize((size[1], size[0]), Image.NEAREST)
        arr = np.asarray(im)
    return (arr > 127).astype(np.uint8)[None]


def write_image(filepath: str | Path, image: np.ndarray) -> None:
    arr = np.clip(np.rint(np.asarray(image).squeeze(0) * 255.0), 0, 255).astype(np.uint8)
    Image.fromarray(arr).save(filepath, format="PNG")


def write_mask(filepath: str | Path, mask: np.ndarray) -> None:
    arr = (np.asarray(mask).squeeze(0) > 0).astype(np.uint8) * 255
    Image.fromarray(arr).save(filepath, format="PNG")
