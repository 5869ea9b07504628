"""
Ingestion of QaTa-style image-text datasets.

Directory layout
================

    <data_dir>/images/<sample_id>.png   8-bit grayscale images
    <data_dir>/texts.tsv                sample_id<TAB>raw_text
    <data_dir>/masks/<sample_id>.png    optional {0,255} ground truth (evaluation)

The same layout is written by the synthetic generator (``gen-data``).
Images are resized to the configured size, attributes are parsed from the
text and coarse masks computed with the saliency backend.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from lung_attr_seg.attributes.batch import read_text_table, write_text_table
from lung_attr_seg.attributes.parser import parse_description, to_attribute_description
from lung_attr_seg.attributes.taxonomy import AttributeTaxonomy
from lung_attr_seg.data.sample import ImageTextSample
from lung_attr_seg.data.saliency import BaselineLungSaliency, SaliencyBackend, coarse_mask
from lung_attr_seg.errors import LungSegError, MissingFile, SampleParseError
from lung_attr_seg.io.png_io import read_image, read_mask, write_image, write_mask

logger = logging.getLogger(__name__)

IMAGE_DIR, MASK_DIR, TEXT_TABLE = "images", "masks", "texts.tsv"
IMAGE_SUFFIXES = (".png", ".PNG")


def _resolve(directory: Path, sample_id: str) -> Path:
    candidate = directory / sample_id
    if candidate.suffix and candidate.exists():
        return candidate
    for suffix in IMAGE_SUFFIXES:
        p = directory / f"{sample_id}{suffix}"
        if p.exists():
            return p
    return directory / f"{sample_id}.png"


def ingest_qata(
    image_dir: str | Path,
    text_tsv: str | Path,
    mask_dir: Optional[str | Path] = None,
    backend: Optional[SaliencyBackend] = None,
    tau: float = 0.5,
    size: Tuple[int, int] = (224, 224),
    taxonomy: Optional[AttributeTaxonomy] = None,
    workers: int = 1,
) -> List[ImageTextSample]:
    """Load every row of ``text_tsv`` with its image.

    An image directory without PNG files yields an empty list.

    Raises
    ------
    MissingFile
        A row's image (or mask, when ``mask_dir`` is given) is absent.
    SampleParseError
        A row's text fails to parse; names the sample id and clause.
    """
    image_dir = Path(image_dir)
    if not image_dir.is_dir() or not any(p.suffix in IMAGE_SUFFIXES for p in image_dir.iterdir()):
        logger.warning("no images found in %s", image_dir)
        return []
    taxonomy = taxonomy or AttributeTaxonomy.default()
    backend = backend or BaselineLungSaliency()
    mask_root = Path(mask_dir) if mask_dir is not None else None

    def load(row: Tuple[str, str]) -> ImageTextSample:
        sample_id, raw_text = row
        try:
            labels = parse_description(raw_text, taxonomy)
        except LungSegError as exc:
            raise SampleParseError(sample_id, exc) from exc
        image_path = _resolve(image_dir, sample_id)
        if not image_path.exists():
            raise MissingFile(sample_id, image_path)
        image = read_image(image_path, size)
        gt = None
        if mask_root is not None:
            mask_path = _resolve(mask_root, sample_id)
            if not mask_path.exists():
                raise MissingFile(sample_id, mask_path)
            gt = read_mask(mask_path, size)
        return ImageTextSample(
            sample_id=sample_id,
            image=image,
            raw_text=raw_text,
            attr_description=to_attribute_description(labels, taxonomy),
            attr_labels=labels,
            coarse_mask=coarse_mask(image, backend, tau),
            gt_mask=gt,
        )

    rows = read_text_table(text_tsv)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            samples = list(pool.map(load, rows))
    else:
        samples = [load(r) for r in rows]
    logger.info("ingested %d samples from %s", len(samples), image_dir)
    return samples


def load_dataset(
    data_dir: str | Path,
    with_masks: bool = True,
    **kwargs,
) -> List[ImageTextSample]:
    """Ingest a dataset stored in the standard directory layout."""
    data_dir = Path(data_dir)
    if not data_dir.is_dir():
        raise FileNotFoundError(f"dataset directory not found: {data_dir}")
    mask_dir = data_dir / MASK_DIR
    return ingest_qata(
        data_dir / IMAGE_DIR,
        data_dir / TEXT_TABLE,
        mask_dir=mask_dir if with_masks and mask_dir.is_dir() else None,
        **kwargs,
    )


def write_dataset(samples: Sequence[ImageTextSample], data_dir: str | Path) -> Path:
    """Write samples in the standard layout (masks only for samples that have one)."""
    data_dir = Path(data_dir)
    (data_dir / IMAGE_DIR).mkdir(parents=True, exist_ok=True)
    if any(s.gt_mask is not None for s in samples):
        (data_dir / MASK_DIR).mkdir(exist_ok=True)
    for s in samples:
        write_image(data_dir / IMAGE_DIR / f"{s.sample_id}.png", s.image)
        if s.gt_mask is not None:
            write_mask(data_dir / MASK_DIR / f"{s.sample_id}.png", s.gt_mask)
    write_text_table([(s.sample_id, s.raw_text) for s in samples], data_dir / TEXT_TABLE)
    logger.info("wrote %d samples to %s", len(samples), data_dir)
    return data_dir
