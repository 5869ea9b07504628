"""
The full segmentation network.

Forward pass for a batch of images I and texts (A, or T when
``text_input="raw"``):

    x_I, skips = f_I(I)
    x_A        = f_A(text)                       frozen
    x_proA     = Reshape(f_proj(x_A) @ gamma)
    S, x_AI    = AICA(x_I, x_proA)               x_AI = x_I when AICA is off
    P          = g_I(x_AI, skips)                logits
    x_MI       = x_I * 1[sigmoid(P) > alpha]     x_I when not mask guided
    logits_m   = e_m(x_MI),  m = 1..M
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Sequence

import torch
import torch.nn as nn

from lung_attr_seg.attributes.taxonomy import AttributeTaxonomy
from lung_attr_seg.errors import ShapeMismatch
from lung_attr_seg.model.aica import AICAFusion, AttributeProjection
from lung_attr_seg.model.config import ModelConfig
from lung_attr_seg.model.heads import AttributeHeads, masked_features
from lung_attr_seg.model.text_encoder import LookupTextEncoder, build_vocabulary
from lung_attr_seg.model.unet import UNetDecoder, UNetEncoder


@dataclass
class PredictionBundle:
    """Every intermediate of one forward pass (batched, leading dim B).

    ``x_A``, ``x_proA`` and ``S`` are None when AICA is disabled.
    """

    x_I: torch.Tensor
    x_A: Optional[torch.Tensor]
    x_proA: Optional[torch.Tensor]
    S: Optional[torch.Tensor]
    x_AI: torch.Tensor
    P: torch.Tensor
    attr_logits: List[torch.Tensor]
    x_MI: torch.Tensor


class SegModel(nn.Module):
    """Image encoder/decoder, frozen attribute encoder, AICA and attribute heads."""

    def __init__(self, config: Optional[ModelConfig] = None, taxonomy: Optional[AttributeTaxonomy] = None) -> None:
        super().__init__()
        self.config = config or ModelConfig()
        self.taxonomy = taxonomy or AttributeTaxonomy.default()
        cfg = self.config
        h, w = cfg.feature_size

        self.encoder = UNetEncoder(1, cfg.base_width, cfg.depth, cfg.channels)
        self.decoder = UNetDecoder(
            cfg.channels, cfg.base_width, cfg.depth, 1, logit_scale=cfg.logit_scale, prior=cfg.mask_prior
        )
        self.text_encoder = LookupTextEncoder(
            build_vocabulary(self.taxonomy), cfg.embed_dim, cfg.max_tokens, seed=cfg.embed_seed
        )
        if cfg.use_aica:
            self.projection: Optional[AttributeProjection] = AttributeProjection(
                cfg.embed_dim, cfg.channels, cfg.max_tokens, h, w, cfg.gamma_std
            )
            self.fusion: Optional[AICAFusion] = AICAFusion(cfg.channels)
        else:
            self.projection = None
            self.fusion = None
        self.heads = AttributeHeads(cfg.channels, cfg.hidden, self.taxonomy.sizes)

    # ------------------------------------------------------------------
    # Stages
    # ------------------------------------------------------------------
    def encode_image(self, images: torch.Tensor):
        cfg = self.config
        if images.dim() != 4 or tuple(images.shape[1:]) != (1, cfg.height, cfg.width):
            raise ShapeMismatch("image batch", ("B", 1, cfg.height, cfg.width), tuple(images.shape))
        return self.encoder(images)

    def encode_attributes(self, texts: Sequence[str]) -> torch.Tensor:
        return self.text_encoder(texts)

    def project_attributes(self, x_A: torch.Tensor, gamma: Optional[torch.Tensor] = None) -> torch.Tensor:
        if self.projection is None:
            raise RuntimeError("attribute projection is disabled (use_aica=False)")
        return self.projection(x_A, gamma)

    def aica_fuse(self, x_I: torch.Tensor, x_proA: torch.Tensor, beta: Optional[torch.Tensor] = None):
        if self.fusion is None:
            raise RuntimeError("AICA fusion is disabled (use_aica=False)")
        return self.fusion(x_I, x_proA, beta)

    def decode_mask(self, x_AI: torch.Tensor, skips: Optional[Sequence[torch.Tensor]] = None) -> torch.Tensor:
        h, w = self.config.feature_size
        if x_AI.dim() != 4 or tuple(x_AI.shape[1:]) != (self.config.channels, h, w):
            raise ShapeMismatch("x_AI", ("B", self.config.channels, h, w), tuple(x_AI.shape))
        return self.decoder(x_AI, skips)

    def classify_attributes(self, x_MI: torch.Tensor) -> List[torch.Tensor]:
        return self.heads(x_MI)

    def forward(self, images: torch.Tensor, texts: Sequence[str], alpha: float = 0.5) -> PredictionBundle:
        x_I, skips = self.encode_image(images)
        x_A = x_proA = S = None
        if self.fusion is not None:
            x_A = self.encode_attributes(texts).to(x_I.device)
            x_proA = self.project_attributes(x_A)
            S, x_AI = self.aica_fuse(x_I, x_proA)
        else:
            x_AI = x_I
        P = self.decode_mask(x_AI, skips)
        x_MI = masked_features(x_I, P, alpha) if self.config.mask_guided else x_I
        return PredictionBundle(
            x_I=x_I, x_A=x_A, x_proA=x_proA, S=S, x_AI=x_AI, P=P,
            attr_logits=self.classify_attributes(x_MI), x_MI=x_MI,
        )

    # ------------------------------------------------------------------
    # Parameter bookkeeping
    # ------------------------------------------------------------------
    def frozen_parameter_names(self) -> List[str]:
        return [f"text_encoder.{n}" for n, _ in self.text_encoder.named_parameters()]

    def trainable_parameters(self) -> Iterator[nn.Parameter]:
        for p in self.parameters():
            if p.requires_grad:
                yield p

    def parameter_counts(self) -> Dict[str, int]:
        total = sum(p.numel() for p in self.parameters())
        trainable = sum(p.numel() for p in self.trainable_parameters())
        return {"total": total, "trainable": trainable, "frozen": total - trainable}
