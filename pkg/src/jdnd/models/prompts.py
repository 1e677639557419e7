"""Instance-specific prompt generation from the refined latent.

A trunk of 16-group 3x3 convolutions with GELUs and learned (transposed-conv)
upsampling produces one prompt map per target decoder block, each at half the
spatial resolution of that block's feature map. The heavy variant uses full
convolutions and serves every decoder block instead of the last two.
"""

from __future__ import annotations

import torch.nn as nn
from torch import Tensor

from ..config import GROUPS, ModelConfig
from ..errors import ConfigError

#: heads start near zero so prompts barely perturb a fresh decoder
HEAD_INIT_STD = 1e-3


def _gconv(cin: int, cout: int, groups: int, stride: int = 1) -> nn.Conv2d:
    if cin % groups or cout % groups:
        raise ConfigError(
            f"prompt conv channels ({cin} -> {cout}) not divisible by {groups} groups"
        )
    return nn.Conv2d(cin, cout, 3, stride=stride, padding=1, groups=groups)


def _gup(cin: int, cout: int, groups: int) -> nn.ConvTranspose2d:
    if cin % groups or cout % groups:
        raise ConfigError(
            f"prompt upsample channels ({cin} -> {cout}) not divisible by {groups} groups"
        )
    return nn.ConvTranspose2d(cin, cout, 2, stride=2, groups=groups)


class PromptGenerator(nn.Module):
    """g_p: refined latent -> {decoder block index: prompt map}."""

    def __init__(self, cfg: ModelConfig):
        super().__init__()
        if cfg.num_stages != 4:
            raise ConfigError("prompt generation is implemented for 4-stage codecs")
        groups = GROUPS if cfg.prompt_convs == "grouped16" else 1
        g0, g1, g2 = cfg.gp_channels
        d0, d1, d2 = cfg.gp_depths
        if d0 < 1:
            raise ConfigError("gp_depths[0] must be >= 1")
        m = cfg.latent_channels
        dims = list(reversed(cfg.stage_channels))  # decoder block dims
        self.targets = cfg.prompt_stb_indices

        def level(cin, width, extra):
            layers = [_gconv(cin, width, groups), nn.GELU()]
            for _ in range(extra):
                layers += [_gconv(width, width, groups), nn.GELU()]
            return nn.Sequential(*layers)

        self.level0 = level(m, g0, d0 - 1)
        self.up1 = nn.Sequential(_gup(g0, g1, groups), nn.GELU())
        self.level1 = level(g1, g1, d1 - 1) if d1 > 0 else nn.Identity()
        self.up2 = nn.Sequential(_gup(g1, g2, groups), nn.GELU())
        self.level2 = level(g2, g2, d2 - 1) if d2 > 0 else nn.Identity()

        heads = {}
        heads["3"] = _gconv(g2, dims[3], groups)
        heads["2"] = _gconv(g1, dims[2], groups)
        if 1 in self.targets:
            heads["1"] = _gconv(g0, dims[1], groups)
        if 0 in self.targets:
            self.down0 = nn.Sequential(_gconv(g0, g0, groups, stride=2), nn.GELU())
            heads["0"] = _gconv(g0, dims[0], groups)
        self.heads = nn.ModuleDict(heads)
        for head in self.heads.values():
            nn.init.normal_(head.weight, std=HEAD_INIT_STD)
            nn.init.zeros_(head.bias)

    def forward(self, y_refined: Tensor) -> dict[int, Tensor]:
        t0 = self.level0(y_refined)
        out = {}
        if "0" in self.heads:
            out[0] = self.heads["0"](self.down0(t0))
        if "1" in self.heads:
            out[1] = self.heads["1"](t0)
        t1 = self.level1(self.up1(t0))
        out[2] = self.heads["2"](t1)
        t2 = self.level2(self.up2(t1))
        out[3] = self.heads["3"](t2)
        return out
