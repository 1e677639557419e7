"""Latent refinement: maps the latent of a noisy image toward a clean one.

A residual block whose residual branch interleaves two spatial feature
transforms with two 3x3 convolutions. The final convolution is
zero-initialized, so a freshly built refiner is exactly the identity. The
light variant swaps the 3x3 convolutions for 16-group convolutions.
"""

from __future__ import annotations

import torch.nn as nn
from torch import Tensor

from ..config import GROUPS
from ..errors import ConfigError


class SFT(nn.Module):
    """Spatially adaptive affine transform: (alpha(F) * F) + beta(F).

    alpha and beta are small conv nets (1x1 then 3x3) conditioned on the
    feature map itself.
    """

    def __init__(self, channels: int, hidden: int, groups: int = 1):
        super().__init__()
        if groups > 1 and (channels % groups or hidden % groups):
            raise ConfigError(
                f"SFT channels ({channels}, {hidden}) not divisible by {groups} groups"
            )
        def head():
            return nn.Sequential(
                nn.Conv2d(channels, hidden, 1),
                nn.GELU(),
                nn.Conv2d(hidden, channels, 3, padding=1, groups=groups),
            )
        self.alpha = head()
        self.beta = head()

    def forward(self, x: Tensor) -> Tensor:
        return self.alpha(x) * x + self.beta(x)


class LatentRefiner(nn.Module):
    def __init__(self, channels: int, hidden: int, variant: str = "normal"):
        super().__init__()
        if variant not in ("normal", "light"):
            raise ConfigError(f"unknown refiner variant {variant!r}")
        groups = GROUPS if variant == "light" else 1
        if channels % groups:
            raise ConfigError(
                f"light refiner needs channels divisible by {groups}, got {channels}"
            )
        self.variant = variant
        self.sft1 = SFT(channels, hidden, groups)
        self.conv1 = nn.Conv2d(channels, channels, 3, padding=1, groups=groups)
        self.sft2 = SFT(channels, hidden, groups)
        self.conv2 = nn.Conv2d(channels, channels, 3, padding=1, groups=groups)
        nn.init.zeros_(self.conv2.weight)
        nn.init.zeros_(self.conv2.bias)

    def forward(self, y: Tensor) -> Tensor:
        return y + self.conv2(self.sft2(self.conv1(self.sft1(y))))
