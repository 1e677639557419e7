"""Full codec assembly, checkpoints, and the frozen-base parameter hash."""

from __future__ import annotations

import hashlib
from pathlib import Path

import torch
import torch.nn as nn
from torch import Tensor

from ..config import ModelConfig
from ..entropy.gaussian import FactorizedGaussian, GaussianParams, quantize
from ..errors import ConfigError
from .lrm import LatentRefiner
from .prompts import PromptGenerator
from .transforms import AnalysisTransform, HyperAnalysis, HyperSynthesis, SynthesisTransform

CHECKPOINT_VERSION = 1

#: parameters with these substrings in their name belong to the adapter side
#: even when they live inside base modules (e.g. bias on prompt key columns)
ADAPTER_NAME_TAGS = ("prompt_key_bias",)


class Codec(nn.Module):
    """Base autoencoders plus the decoder-side add-on modules.

    The base half (g_a, g_s, h_a, h_s, hyper prior) is what stage-1 training
    produces and what both decode modes share; the refiner and prompter are
    the stage-2 add-ons.
    """

    def __init__(self, cfg: ModelConfig):
        super().__init__()
        self.cfg = cfg
        self.g_a = AnalysisTransform(cfg)
        self.g_s = SynthesisTransform(cfg, prompt_bias=cfg.prompt_bias)
        self.h_a = HyperAnalysis(cfg)
        self.h_s = HyperSynthesis(cfg)
        self.z_prior = FactorizedGaussian(cfg.hyper_channels)
        self.refiner = LatentRefiner(cfg.latent_channels, cfg.sft_hidden, cfg.lrm)
        self.prompter = PromptGenerator(cfg)

    # -- parameter partitions ------------------------------------------------

    def base_named_parameters(self):
        for name, p in self.named_parameters():
            if name.startswith(("refiner.", "prompter.")):
                continue
            if any(tag in name for tag in ADAPTER_NAME_TAGS):
                continue
            yield name, p

    def addon_named_parameters(self):
        base = {name for name, _ in self.base_named_parameters()}
        for name, p in self.named_parameters():
            if name not in base:
                yield name, p

    def base_hash(self) -> str:
        """SHA-256 over the frozen-base parameters (sorted by name)."""
        h = hashlib.sha256()
        for name, p in sorted(self.base_named_parameters()):
            h.update(name.encode())
            h.update(p.detach().cpu().contiguous().numpy().tobytes())
        return h.hexdigest()

    def freeze_base(self) -> None:
        for _, p in self.base_named_parameters():
            p.requires_grad_(False)

    # -- latent paths ----------------------------------------------------

    def analyze(self, x: Tensor) -> Tensor:
        return self.g_a(x)

    def synthesize(self, y: Tensor, prompts: dict[int, Tensor] | None = None) -> Tensor:
        return self.g_s(y, prompts)

    def hyper_analyze(self, y: Tensor) -> Tensor:
        return self.h_a(y)

    def hyper_synthesize(self, z: Tensor) -> GaussianParams:
        return self.h_s(z)

    def refine(self, y_hat: Tensor) -> Tensor:
        return self.refiner(y_hat)

    def generate_prompts(self, y_refined: Tensor) -> dict[int, Tensor]:
        prompts = self.prompter(y_refined)
        return {i: prompts[i] for i in self.cfg.prompt_stb_indices}

    # -- training-time forward passes (noise surrogate quantization) -------

    def forward_rate_distortion(self, x: Tensor, generator: torch.Generator | None = None):
        """Stage-1 pass: returns (x_hat, bpp_y, bpp_z) per batch."""
        npix = x.shape[-1] * x.shape[-2] * x.shape[0]
        y = self.g_a(x)
        z = self.h_a(y)
        z_t = quantize(z, "train", generator)
        gp = self.h_s(z_t)
        y_t = quantize(y, "train", generator)
        from ..entropy.gaussian import gaussian_bits  # local to avoid cycle at import

        bpp_y = gaussian_bits(y_t, gp.mu, gp.sigma).sum() / npix
        bpp_z = self.z_prior.bits(z_t).sum() / npix
        x_hat = self.g_s(y_t)
        return x_hat, bpp_y, bpp_z

    def forward_denoise(self, x_noisy: Tensor, generator: torch.Generator | None = None) -> Tensor:
        """Stage-2 pass: denoised reconstruction through the full decode path.

        Assumes the base codec is frozen (the latent is produced without a
        graph); gradients flow from the output through the decoder into the
        refiner and prompt generator only.
        """
        with torch.no_grad():
            y = self.g_a(x_noisy)
        y_t = quantize(y, "train", generator)
        y_ref = self.refiner(y_t)
        prompts = self.generate_prompts(y_ref)
        return self.g_s(y_ref, prompts)


def save_checkpoint(model: Codec, path: str | Path, stage: int = 1, step: int = 0) -> None:
    payload = {
        "format_version": CHECKPOINT_VERSION,
        "config": model.cfg.to_dict(),
        "config_hash": model.cfg.hash64(),
        "stage": stage,
        "step": step,
        "state_dict": model.state_dict(),
    }
    torch.save(payload, str(path))


def load_checkpoint(path: str | Path, map_location: str = "cpu") -> tuple[Codec, dict]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"checkpoint not found: {path}")
    payload = torch.load(str(path), map_location=map_location, weights_only=False)
    if payload.get("format_version") != CHECKPOINT_VERSION:
        raise ConfigError(f"unsupported checkpoint version in {path}")
    cfg = ModelConfig.from_dict(payload["config"])
    if cfg.hash64() != payload["config_hash"]:
        raise ConfigError(f"checkpoint config hash mismatch in {path}")
    model = Codec(cfg)
    model.load_state_dict(payload["state_dict"])
    model.eval()
    return model, payload
