"""
UNet image encoder f_I and decoder g_I.

The encoder is a contracting path of ``depth`` pool+conv blocks ending in
a ``channels``-wide embedding at 1 / 2**depth resolution.  The decoder
mirrors it with transposed convolutions.  Skip connections are additive,
so the decoder also runs on an embedding alone (no skips).

Normalisation is GroupNorm, which behaves the same in train and eval mode.

The 1x1 output head is scaled: logits are ``logit_scale * head(x)``, with
the head weights divided by the scale at initialisation so the initial
function does not depend on it.  The head bias starts at
``logit(prior)``, a uniform low foreground probability.
"""

from __future__ import annotations

import math
from typing import List, Optional, Sequence, Tuple

import torch
import torch.nn as nn


def _groups(channels: int) -> int:
    for g in (8, 4, 2, 1):
        if channels % g == 0:
            return g
    return 1


def conv_block(in_channels: int, out_channels: int) -> nn.Sequential:
    return nn.Sequential(
        nn.Conv2d(in_channels, out_channels, 3, padding=1),
        nn.GroupNorm(_groups(out_channels), out_channels),
        nn.ReLU(inplace=True),
        nn.Conv2d(out_channels, out_channels, 3, padding=1),
        nn.GroupNorm(_groups(out_channels), out_channels),
        nn.ReLU(inplace=True),
    )


def level_widths(base_width: int, depth: int) -> List[int]:
    return [base_width * 2 ** i for i in range(depth)]


class UNetEncoder(nn.Module):
    """``(B, 1, H, W) -> x_I (B, c, H/2**depth, W/2**depth)`` plus skip features."""

    def __init__(self, in_channels: int = 1, base_width: int = 16, depth: int = 4, out_channels: int = 64) -> None:
        super().__init__()
        widths = level_widths(base_width, depth)
        self.stem = conv_block(in_channels, widths[0])
        self.downs = nn.ModuleList(
            conv_block(widths[i - 1], widths[i]) for i in range(1, depth)
        )
        self.bottleneck = conv_block(widths[-1], out_channels)
        self.pool = nn.MaxPool2d(2)

    def forward(self, x: torch.Tensor) -> Tuple[torch.Tensor, List[torch.Tensor]]:
        skips = [self.stem(x)]
        for block in self.downs:
            skips.append(block(self.pool(skips[-1])))
        return self.bottleneck(self.pool(skips[-1])), skips


class UNetDecoder(nn.Module):
    """``x (B, c, h, w) -> logits (B, 1, h*2**depth, w*2**depth)``."""

    def __init__(
        self,
        in_channels: int = 64,
        base_width: int = 16,
        depth: int = 4,
        out_channels: int = 1,
        logit_scale: float = 1.0,
        prior: Optional[float] = None,
    ) -> None:
        super().__init__()
        widths = level_widths(base_width, depth)
        ups, blocks = [], []
        prev = in_channels
        for w in reversed(widths):
            ups.append(nn.ConvTranspose2d(prev, w, 2, stride=2))
            blocks.append(conv_block(w, w))
            prev = w
        self.in_channels = in_channels
        self.ups = nn.ModuleList(ups)
        self.blocks = nn.ModuleList(blocks)
        self.head = nn.Conv2d(widths[0], out_channels, 1)
        self.logit_scale = float(logit_scale)
        with torch.no_grad():
            self.head.weight.div_(self.logit_scale)
            if prior is None:
                self.head.bias.div_(self.logit_scale)
            else:
                self.head.bias.fill_(math.log(prior / (1.0 - prior)) / self.logit_scale)

    def forward(self, x: torch.Tensor, skips: Optional[Sequence[torch.Tensor]] = None) -> torch.Tensor:
        for i, (up, block) in enumerate(zip(self.ups, self.blocks)):
            x = up(x)
            if skips is not None:
                x = x + skips[-1 - i]
            x = block(x)
        return self.logit_scale * self.head(x)
