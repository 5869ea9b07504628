"""Learnable computation: UNet, frozen attribute encoder, AICA fusion, attribute heads."""

from lung_attr_seg.model.config import ModelConfig
from lung_attr_seg.model.unet import UNetDecoder, UNetEncoder
from lung_attr_seg.model.text_encoder import FrozenTextEncoder, LookupTextEncoder, build_vocabulary
from lung_attr_seg.model.aica import (
    AICAFusion,
    AttributeProjection,
    aica_fuse,
    attention_map,
    project_attributes,
)
from lung_attr_seg.model.heads import AttributeClassifier, AttributeHeads, masked_features
from lung_attr_seg.model.network import PredictionBundle, SegModel
from lung_attr_seg.model.checkpoint import Checkpoint, load_checkpoint, save_checkpoint

__all__ = [
    "ModelConfig",
    "UNetDecoder",
    "UNetEncoder",
    "FrozenTextEncoder",
    "LookupTextEncoder",
    "build_vocabulary",
    "AICAFusion",
    "AttributeProjection",
    "aica_fuse",
    "attention_map",
    "project_attributes",
    "AttributeClassifier",
    "AttributeHeads",
    "masked_features",
    "PredictionBundle",
    "SegModel",
    "Checkpoint",
    "load_checkpoint",
    "save_checkpoint",
]
