"""Training samples: synthetic generation, QaTa ingestion, coarse masks, batching."""

from lung_attr_seg.data.sample import ImageTextSample
from lung_attr_seg.data.saliency import (
    BaselineLungSaliency,
    ConstantSaliency,
    SaliencyBackend,
    coarse_mask,
)
from lung_attr_seg.data.synthetic import GeneratorConfig, synth_generate
from lung_attr_seg.data.augment import AugmentConfig, augment_sample
from lung_attr_seg.data.qata import ingest_qata, load_dataset, write_dataset
from lung_attr_seg.data.loader import Batch, SampleDataset, collate_samples

__all__ = [
    "ImageTextSample",
    "BaselineLungSaliency",
    "ConstantSaliency",
    "SaliencyBackend",
    "coarse_mask",
    "GeneratorConfig",
    "synth_generate",
    "AugmentConfig",
    "augment_sample",
    "ingest_qata",
    "load_dataset",
    "write_dataset",
    "Batch",
    "SampleDataset",
    "collate_samples",
]
