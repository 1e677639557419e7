"""Bitstream container and the image-level encode/decode operations.

One bitstream carries both decode modes: header, range-coded hyper-latent
payload, then the main-latent payload conditioned on the decoded hyper
latent. Layout (little-endian):

    magic "JDND" (4s) | version u8 | config-hash u64 | lambda-index u8 |
    flags u8 (bit0: padding used) | H u32 | W u32 | z_len u32 | y_len u32 |
    z payload | y payload
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from ..errors import BitstreamError, HashMismatchError
from .cdf import bins_to_values, gaussian_cdf_table, values_to_bins
from .gaussian import gaussian_bits, quantize
from .rangecoder import RangeDecoder, RangeEncoder

MAGIC = b"JDND"
VERSION = 1
FLAG_PADDED = 0x01

_HEADER = struct.Struct("<4sBQBBIIII")
HEADER_BYTES = _HEADER.size


@dataclass
class Bitstream:
    config_hash: int
    lambda_index: int
    padded: bool
    height: int
    width: int
    z_payload: bytes
    y_payload: bytes

    @property
    def num_bytes(self) -> int:
        return HEADER_BYTES + len(self.z_payload) + len(self.y_payload)

    def to_bytes(self) -> bytes:
        header = _HEADER.pack(
            MAGIC,
            VERSION,
            self.config_hash,
            self.lambda_index,
            FLAG_PADDED if self.padded else 0,
            self.height,
            self.width,
            len(self.z_payload),
            len(self.y_payload),
        )
        return header + self.z_payload + self.y_payload

    @classmethod
    def from_bytes(cls, data: bytes) -> "Bitstream":
        if len(data) < HEADER_BYTES:
            raise BitstreamError(f"stream too short for header: {len(data)} bytes")
        magic, version, chash, lam, flags, h, w, z_len, y_len = _HEADER.unpack_from(data)
        if magic != MAGIC:
            raise BitstreamError(f"bad magic {magic!r}")
        if version != VERSION:
            raise BitstreamError(f"unsupported bitstream version {version}")
        if len(data) != HEADER_BYTES + z_len + y_len:
            raise BitstreamError(
                f"truncated payload: header announces {z_len + y_len} payload "
                f"bytes, stream carries {len(data) - HEADER_BYTES}"
            )
        return cls(
            config_hash=chash,
            lambda_index=lam,
            padded=bool(flags & FLAG_PADDED),
            height=h,
            width=w,
            z_payload=data[HEADER_BYTES : HEADER_BYTES + z_len],
            y_payload=data[HEADER_BYTES + z_len :],
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_bytes(self.to_bytes())

    @classmethod
    def load(cls, path: str | Path) -> "Bitstream":
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"bitstream not found: {path}")
        return cls.from_bytes(path.read_bytes())


@dataclass
class EncodeStats:
    """Rate bookkeeping reported alongside a fresh bitstream."""

    model_bits_y: float
    model_bits_z: float
    bytes_y: int
    bytes_z: int
    bpp: float


def _tensor_to_symbols(t: torch.Tensor) -> np.ndarray:
    return t.detach().cpu().numpy().astype(np.int64).reshape(-1)


def encode_image(x: torch.Tensor, model) -> tuple[Bitstream, EncodeStats]:
    """Encode an image tensor (3, H, W) in [0, 1] into a bitstream."""
    from ..models.transforms import pad_image  # deferred: models import entropy

    if x.dim() != 3 or x.shape[0] != 3:
        raise ValueError(f"expected a (3, H, W) image, got {tuple(x.shape)}")
    cfg = model.cfg
    height, width = int(x.shape[1]), int(x.shape[2])
    model.eval()
    with torch.no_grad():
        xp = pad_image(x.unsqueeze(0), cfg.pad_multiple)
        padded = xp.shape[-2:] != x.shape[-2:]
        y = model.g_a(xp)
        y_hat = quantize(y, "infer")
        z = model.h_a(y)
        z_hat = quantize(z, "infer")

        # hyper payload: one CDF row per channel
        z_sigma = model.z_prior.sigma().cpu().numpy()
        z_mu = np.zeros_like(z_sigma)
        z_table = gaussian_cdf_table(z_mu, z_sigma)
        z_sym = _tensor_to_symbols(z_hat)
        _, ch, zh, zw = z_hat.shape
        z_idx = np.repeat(np.arange(ch, dtype=np.int64), zh * zw)
        z_bins, z_raw = values_to_bins(z_sym)
        enc = RangeEncoder()
        enc.encode_bins(z_bins, z_table, z_idx, escape_bin=z_table.shape[1] - 2, raw=z_raw)
        z_payload = enc.finish()

        # main payload: per-element CDFs from the decoded hyper latent
        gp = model.h_s(z_hat)
        y_table = gaussian_cdf_table(
            gp.mu.cpu().numpy().reshape(-1), gp.sigma.cpu().numpy().reshape(-1)
        )
        y_bins, y_raw = values_to_bins(_tensor_to_symbols(y_hat))
        enc = RangeEncoder()
        enc.encode_bins(y_bins, y_table, None, escape_bin=y_table.shape[1] - 2, raw=y_raw)
        y_payload = enc.finish()

        model_bits_y = float(gaussian_bits(y_hat, gp.mu, gp.sigma).sum())
        model_bits_z = float(model.z_prior.bits(z_hat).sum())

    bs = Bitstream(
        config_hash=cfg.hash64(),
        lambda_index=cfg.lambda_index,
        padded=padded,
        height=height,
        width=width,
        z_payload=z_payload,
        y_payload=y_payload,
    )
    stats = EncodeStats(
        model_bits_y=model_bits_y,
        model_bits_z=model_bits_z,
        bytes_y=len(y_payload),
        bytes_z=len(z_payload),
        bpp=8.0 * bs.num_bytes / (height * width),
    )
    return bs, stats


def check_hash(bs: Bitstream, model) -> None:
    expected = model.cfg.hash64()
    if bs.config_hash != expected:
        raise HashMismatchError(
            f"bitstream was made under config hash {bs.config_hash:#018x}, "
            f"model has {expected:#018x}"
        )


def decode_latents(bs: Bitstream, model) -> torch.Tensor:
    """Recover the quantized main latent shared by both decode modes."""
    check_hash(bs, model)
    cfg = model.cfg
    model.eval()
    with torch.no_grad():
        ch, zh, zw = cfg.hyper_shape(bs.height, bs.width)
        z_sigma = model.z_prior.sigma().cpu().numpy()
        z_table = gaussian_cdf_table(np.zeros_like(z_sigma), z_sigma)
        z_idx = np.repeat(np.arange(ch, dtype=np.int64), zh * zw)
        dec = RangeDecoder(bs.z_payload)
        z_bins, z_raw = dec.decode_bins(ch * zh * zw, z_table, z_idx,
                                        escape_bin=z_table.shape[1] - 2)
        z_vals = bins_to_values(z_bins, z_raw)
        z_hat = torch.from_numpy(z_vals.astype(np.float32)).view(1, ch, zh, zw)

        gp = model.h_s(z_hat)
        y_table = gaussian_cdf_table(
            gp.mu.cpu().numpy().reshape(-1), gp.sigma.cpu().numpy().reshape(-1)
        )
        mc, yh, yw = cfg.latent_shape(bs.height, bs.width)
        dec = RangeDecoder(bs.y_payload)
        y_bins, y_raw = dec.decode_bins(mc * yh * yw, y_table, None,
                                        escape_bin=y_table.shape[1] - 2)
        y_vals = bins_to_values(y_bins, y_raw)
        return torch.from_numpy(y_vals.astype(np.float32)).view(1, mc, yh, yw)


def decode_image(bs: Bitstream, model, mode: str = "standard") -> torch.Tensor:
    """Decode to an image tensor (3, H, W) in [0, 1].

    ``standard`` reconstructs the coded image; ``denoise`` routes the same
    latent through the refiner and prompt-adapted decoder blocks.
    """
    from ..models.transforms import crop_image

    if mode not in ("standard", "denoise"):
        raise ValueError(f"unknown decode mode {mode!r}")
    y_hat = decode_latents(bs, model)
    with torch.no_grad():
        if mode == "standard":
            x = model.g_s(y_hat)
        else:
            y_ref = model.refiner(y_hat)
            prompts = model.generate_prompts(y_ref)
            x = model.g_s(y_ref, prompts)
        x = crop_image(x, bs.height, bs.width)
        return x.squeeze(0).clamp(0.0, 1.0)
