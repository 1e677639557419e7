"""Quantization and the Gaussian probability models for both latents.

The main latent uses a conditional Gaussian with per-element (mu, sigma)
predicted from the hyper latent; the hyper latent itself uses a zero-mean
Gaussian with one learnable scale per channel. Both discretize the density
to integer bins via CDF differences.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import torch
import torch.nn as nn
from torch import Tensor

#: lower clamp applied to every Gaussian scale
SIGMA_MIN = 0.04
#: probability floor inside the bit estimate (matches the 16-bit coder CDFs)
P_FLOOR = 2.0 ** -16
#: symbols outside [-QMAX, QMAX] are escape-coded with raw bits
QMAX = 255


def quantize(v: Tensor, mode: str, generator: torch.Generator | None = None) -> Tensor:
    """Quantize a tensor of latent values.

    ``infer`` rounds half away from zero to integers; ``train`` adds uniform
    noise in [-0.5, 0.5) from the given generator as the differentiable
    surrogate.
    """
    if mode == "infer":
        return torch.sign(v) * torch.floor(torch.abs(v) + 0.5)
    if mode == "train":
        u = torch.rand(v.shape, dtype=v.dtype, device=v.device, generator=generator) - 0.5
        return v + u
    raise ValueError(f"unknown quantize mode {mode!r}")


@dataclass
class GaussianParams:
    """Per-element (mu, sigma) of the conditional entropy model.

    sigma is clamped to at least ``sigma_min`` on construction, so the
    invariant sigma >= sigma_min > 0 holds everywhere downstream.
    """

    mu: Tensor
    sigma: Tensor
    sigma_min: float = SIGMA_MIN

    def __post_init__(self):
        self.sigma = torch.clamp(self.sigma, min=self.sigma_min)


def gaussian_prob(v: Tensor, mu: Tensor | float, sigma: Tensor | float) -> Tensor:
    """P(round(value) == v) under N(mu, sigma^2): CDF difference over v +- 0.5."""
    if not torch.is_tensor(sigma):
        sigma = torch.as_tensor(sigma, dtype=v.dtype)
    sigma = torch.clamp(sigma, min=SIGMA_MIN)
    upper = torch.special.ndtr((v + 0.5 - mu) / sigma)
    lower = torch.special.ndtr((v - 0.5 - mu) / sigma)
    return upper - lower


def gaussian_bits(v: Tensor, mu: Tensor | float, sigma: Tensor | float) -> Tensor:
    """Per-element code length (bits) of integer symbols under the model."""
    p = torch.clamp(gaussian_prob(v, mu, sigma), min=P_FLOOR)
    return -torch.log2(p)


class FactorizedGaussian(nn.Module):
    """Zero-mean Gaussian prior with a learnable scale per channel."""

    def __init__(self, channels: int):
        super().__init__()
        self.log_scale = nn.Parameter(torch.zeros(channels))

    def sigma(self) -> Tensor:
        return torch.clamp(torch.exp(self.log_scale), min=SIGMA_MIN)

    def bits(self, v: Tensor) -> Tensor:
        """Per-element bits for (B, C, H, W) symbols."""
        sigma = self.sigma().view(1, -1, 1, 1)
        return gaussian_bits(v, 0.0, sigma)
