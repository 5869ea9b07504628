"""Model hyperparameters."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from lung_attr_seg.errors import ConfigError

TEXT_INPUTS = ("attributes", "raw")


@dataclass(frozen=True)
class ModelConfig:
    """Architecture of the segmentation network.

    Parameters
    ----------
    height, width : int
        Input size H x W; both must be divisible by ``2**depth``.
    depth : int
        Number of UNet down-sampling blocks; h = H / 2**depth.
    base_width : int
        Channels of the first UNet block, doubled at every level.
    channels : int
        Channel count c of the image embedding x_I.
    embed_dim : int
        Attribute-embedding dimension d.
    max_tokens : int
        Token length L; texts are padded or truncated to it.
    classifier_hidden : int, optional
        Hidden width of the attribute heads; defaults to ``channels``.
    use_aica : bool
        Fuse attribute and image features; when off x_AI = x_I.
    text_input : str
        "attributes" encodes the attribute description A, "raw" the
        clinical sentence T.
    mask_guided : bool
        Attribute heads read x_MI (True) or x_I (False).
    gamma_std : float
        Standard deviation of the Gaussian initialisation of gamma.
    embed_seed : int
        Seed of the frozen token-embedding table.
    logit_scale : float
        Fixed multiplier on the mask head output.
    mask_prior : float
        Foreground probability of the untrained mask head.
    """

    height: int = 224
    width: int = 224
    depth: int = 4
    base_width: int = 16
    channels: int = 64
    embed_dim: int = 32
    max_tokens: int = 24
    classifier_hidden: Optional[int] = None
    use_aica: bool = True
    text_input: str = "attributes"
    mask_guided: bool = True
    gamma_std: float = 0.02
    embed_seed: int = 0
    logit_scale: float = 100.0
    mask_prior: float = 0.01

    def __post_init__(self) -> None:
        factor = 2 ** self.depth
        if self.depth < 1:
            raise ConfigError(f"depth must be >= 1, got {self.depth}")
        if self.height % factor or self.width % factor:
            raise ConfigError(
                f"image size {self.height}x{self.width} is not divisible by 2**depth = {factor}"
            )
        for name in ("base_width", "channels", "embed_dim", "max_tokens"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.logit_scale <= 0:
            raise ConfigError(f"logit_scale must be > 0, got {self.logit_scale}")
        if not 0.0 < self.mask_prior < 1.0:
            raise ConfigError(f"mask_prior must lie strictly inside (0, 1), got {self.mask_prior}")
        if self.text_input not in TEXT_INPUTS:
            raise ConfigError(f"text_input must be one of {TEXT_INPUTS}, got {self.text_input!r}")

    @property
    def feature_size(self) -> tuple:
        """(h, w) of the image embedding."""
        factor = 2 ** self.depth
        return self.height // factor, self.width // factor

    @property
    def hidden(self) -> int:
        return self.classifier_hidden or self.channels
