"""Main and hyper autoencoders.

The analysis transform stacks stride-2 convolutions, each followed by a
windowed-attention block; the synthesis transform mirrors it with transposed
convolutions. The hyper pair adds/removes two more stride-2 stages and maps
the hyper latent to the per-element Gaussian parameters of the main latent.
"""

from __future__ import annotations

import torch
import torch.nn as nn
import torch.nn.functional as F
from torch import Tensor

from ..config import ModelConfig
from ..entropy.gaussian import GaussianParams
from ..errors import AdapterError
from .swin import SwinBlock


def conv_down(cin: int, cout: int) -> nn.Conv2d:
    return nn.Conv2d(cin, cout, kernel_size=3, stride=2, padding=1)


def conv_up(cin: int, cout: int) -> nn.ConvTranspose2d:
    return nn.ConvTranspose2d(cin, cout, kernel_size=3, stride=2, padding=1, output_padding=1)


class AnalysisTransform(nn.Module):
    """g_a: image (B, 3, H, W) -> latent (B, M, H/ds, W/ds)."""

    def __init__(self, cfg: ModelConfig):
        super().__init__()
        downs = []
        blocks = []
        prev = 3
        for c, depth, heads in zip(cfg.stage_channels, cfg.stage_depths, cfg.stage_heads):
            downs.append(conv_down(prev, c))
            blocks.append(SwinBlock(c, depth, heads, cfg.window, cfg.mlp_ratio))
            prev = c
        self.downs = nn.ModuleList(downs)
        self.blocks = nn.ModuleList(blocks)

    def forward(self, x: Tensor) -> Tensor:
        for down, block in zip(self.downs, self.blocks):
            x = block(down(x))
        return x


class SynthesisTransform(nn.Module):
    """g_s: latent -> image, with an optional prompt port per block.

    Blocks run from the deepest resolution outward; block index i matches the
    keys of the ``prompts`` dict. With ``prompts=None`` (or ``{}``) the path
    is exactly the standard-reconstruction decoder.
    """

    def __init__(self, cfg: ModelConfig, prompt_bias: bool = False):
        super().__init__()
        dims = list(reversed(cfg.stage_channels))
        depths = list(reversed(cfg.stage_depths))
        heads = list(reversed(cfg.stage_heads))
        self.blocks = nn.ModuleList(
            SwinBlock(
                d,
                dep,
                h,
                cfg.window,
                cfg.mlp_ratio,
                prompt_bias=prompt_bias and i in cfg.prompt_stb_indices,
            )
            for i, (d, dep, h) in enumerate(zip(dims, depths, heads))
        )
        self.ups = nn.ModuleList(
            conv_up(dims[i], dims[i + 1] if i + 1 < len(dims) else 3)
            for i in range(len(dims))
        )

    def forward(self, y: Tensor, prompts: dict[int, Tensor] | None = None) -> Tensor:
        if prompts:
            bad = [i for i in prompts if not 0 <= i < len(self.blocks)]
            if bad:
                raise AdapterError(f"no decoder block with index {bad}")
        x = y
        for i, (block, up) in enumerate(zip(self.blocks, self.ups)):
            p = prompts.get(i) if prompts else None
            x = up(block(x, p))
        return x


class HyperAnalysis(nn.Module):
    """h_a: latent -> hyper latent at 1/4 of the latent resolution."""

    def __init__(self, cfg: ModelConfig):
        super().__init__()
        m, mh = cfg.latent_channels, cfg.hyper_channels
        self.net = nn.Sequential(
            nn.Conv2d(m, mh, 3, padding=1),
            nn.GELU(),
            conv_down(mh, mh),
            nn.GELU(),
            conv_down(mh, mh),
        )

    def forward(self, y: Tensor) -> Tensor:
        return self.net(y)


class HyperSynthesis(nn.Module):
    """h_s: hyper latent -> (mu, sigma) for the conditional entropy model.

    Positivity of sigma comes from a softplus; the entropy model additionally
    clamps it from below.
    """

    def __init__(self, cfg: ModelConfig):
        super().__init__()
        m, mh = cfg.latent_channels, cfg.hyper_channels
        self.net = nn.Sequential(
            conv_up(mh, mh),
            nn.GELU(),
            conv_up(mh, mh),
            nn.GELU(),
            nn.Conv2d(mh, 2 * m, 3, padding=1),
        )

    def forward(self, z: Tensor) -> GaussianParams:
        mu, raw = self.net(z).chunk(2, dim=1)
        return GaussianParams(mu=mu, sigma=F.softplus(raw))


def pad_image(x: Tensor, multiple: int) -> Tensor:
    """Reflect-pad (B, C, H, W) on the bottom/right to a size multiple."""
    h, w = x.shape[-2:]
    ph = (multiple - h % multiple) % multiple
    pw = (multiple - w % multiple) % multiple
    if ph == 0 and pw == 0:
        return x
    # reflect padding cannot exceed dim-1 per side; fall back to replicate
    mode = "reflect" if ph < h and pw < w else "replicate"
    return F.pad(x, (0, pw, 0, ph), mode=mode)


def crop_image(x: Tensor, height: int, width: int) -> Tensor:
    return x[..., :height, :width]
