"""
Attribute-image cross-attention (AICA).

Projection
----------
    x_proA = Reshape( f_proj(x_A) @ gamma )

f_proj is a 1-D convolution (kernel 3) from d to c channels over the L
token positions; gamma (L x h*w) spreads the L projected tokens over the
image grid.

Fusion
------
    S    = softmax_rows( phi(x_I)^T theta(x_proA) )        (hw x hw)
    x_AI = beta * (varphi(x_I) S^T) + x_I

Row i of S is the attention of image position i over the projected
attribute positions, so every row sums to one.  phi, theta and varphi are
1x1 convolutions c -> c; varphi takes x_I as in the fusion equation.
beta starts at 0, which makes the module an identity at initialisation.
"""

from __future__ import annotations

from typing import Callable, Optional, Tuple

import torch
import torch.nn as nn

from lung_attr_seg.errors import ShapeMismatch


def project_attributes(projected: torch.Tensor, gamma: torch.Tensor, h: int, w: int) -> torch.Tensor:
    """``(B, c, L) @ gamma (L, h*w) -> (B, c, h, w)``."""
    B, c, L = projected.shape
    if tuple(gamma.shape) != (L, h * w):
        raise ShapeMismatch("gamma", (L, h * w), tuple(gamma.shape))
    return torch.matmul(projected, gamma).view(B, c, h, w)


def attention_map(query: torch.Tensor, key: torch.Tensor) -> torch.Tensor:
    """Row-softmax of ``query^T key`` for ``(B, c, h, w)`` inputs -> ``(B, hw, hw)``."""
    if query.shape != key.shape:
        raise ShapeMismatch("attention key", tuple(query.shape), tuple(key.shape))
    B, c, h, w = query.shape
    q = query.reshape(B, c, h * w).permute(0, 2, 1)
    k = key.reshape(B, c, h * w)
    return torch.softmax(torch.bmm(q, k), dim=-1)


def fuse(x_I: torch.Tensor, value: torch.Tensor, S: torch.Tensor, beta: torch.Tensor) -> torch.Tensor:
    """``beta * (value S^T) + x_I`` with ``value`` reshaped to ``(B, c, hw)``."""
    B, c, h, w = x_I.shape
    mixed = torch.bmm(value.reshape(B, c, h * w), S.permute(0, 2, 1)).view(B, c, h, w)
    return beta * mixed + x_I


def aica_fuse(
    x_I: torch.Tensor,
    x_proA: torch.Tensor,
    beta: torch.Tensor,
    phi: Callable[[torch.Tensor], torch.Tensor],
    theta: Callable[[torch.Tensor], torch.Tensor],
    varphi: Callable[[torch.Tensor], torch.Tensor],
) -> Tuple[torch.Tensor, torch.Tensor]:
    """Functional fusion; returns ``(S, x_AI)``."""
    if x_I.shape != x_proA.shape:
        raise ShapeMismatch("x_proA", tuple(x_I.shape), tuple(x_proA.shape))
    S = attention_map(phi(x_I), theta(x_proA))
    return S, fuse(x_I, varphi(x_I), S, beta)


class AttributeProjection(nn.Module):
    """f_proj and gamma: ``x_A (B, d, L) -> x_proA (B, c, h, w)``."""

    def __init__(self, embed_dim: int, channels: int, max_tokens: int, h: int, w: int, gamma_std: float = 0.02) -> None:
        super().__init__()
        self.h, self.w = h, w
        self.f_proj = nn.Conv1d(embed_dim, channels, kernel_size=3, padding=1)
        self.gamma = nn.Parameter(torch.randn(max_tokens, h * w) * gamma_std)

    def forward(self, x_A: torch.Tensor, gamma: Optional[torch.Tensor] = None) -> torch.Tensor:
        if x_A.dim() != 3 or x_A.shape[1] != self.f_proj.in_channels:
            raise ShapeMismatch("x_A", ("B", self.f_proj.in_channels, "L"), tuple(x_A.shape))
        return project_attributes(self.f_proj(x_A), self.gamma if gamma is None else gamma, self.h, self.w)


class AICAFusion(nn.Module):
    """Cross-attention from image positions to projected attribute positions."""

    def __init__(self, channels: int, beta_init: float = 0.0) -> None:
        super().__init__()
        self.phi = nn.Conv2d(channels, channels, 1)
        self.theta = nn.Conv2d(channels, channels, 1)
        self.varphi = nn.Conv2d(channels, channels, 1)
        self.beta = nn.Parameter(torch.tensor(float(beta_init)))

    def forward(self, x_I: torch.Tensor, x_proA: torch.Tensor, beta: Optional[torch.Tensor] = None) -> Tuple[torch.Tensor, torch.Tensor]:
        return aica_fuse(
            x_I, x_proA, self.beta if beta is None else beta, self.phi, self.theta, self.varphi
        )
