"""Heteroscedastic noise synthesis for clean/noisy training pairs.

Noise variance grows linearly with intensity: var(x) = a*x + b, sampled as
z = clip(x + sqrt(a*x + b) * n, 0, 1) with standard-normal n from a seeded
generator. A pair dataset is described by a manifest (source image, crop
offsets, per-pair seed, parameters) from which it regenerates bit-exactly.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, replace
from pathlib import Path

import torch

from .errors import JdndError, NoiseParamError
from .image_io import list_images, load_image

logger = logging.getLogger(__name__)

MANIFEST_VERSION = 1


@dataclass(frozen=True)
class NoiseParams:
    """Signal-dependent slope ``a``, constant floor ``b`` (intensity in [0,1])."""

    a: float = 0.01
    b: float = 0.0005
    seed: int = 0

    def __post_init__(self):
        if self.a < 0 or self.b < 0:
            raise NoiseParamError(f"variance terms must be >= 0, got a={self.a}, b={self.b}")


#: stand-in parameter profiles; override freely
PROFILES = {
    "default": NoiseParams(a=0.01, b=0.0005),
    "strong": NoiseParams(a=0.02, b=0.004),
}


def add_noise(x: torch.Tensor, params: NoiseParams, clip: bool = True) -> torch.Tensor:
    """Apply variance a*x+b noise to an image tensor in [0, 1].

    Deterministic per (x, params, seed). ``clip=False`` skips the [0, 1]
    saturation (the statistics tests work pre-clip).
    """
    gen = torch.Generator().manual_seed(params.seed)
    n = torch.randn(x.shape, generator=gen, dtype=x.dtype)
    std = torch.sqrt(torch.clamp(params.a * x + params.b, min=0.0))
    z = x + std * n
    return z.clamp(0.0, 1.0) if clip else z


def make_pairs(
    clean_dir: str | Path,
    params: NoiseParams,
    patch: int,
    count: int,
    manifest_path: str | Path | None = None,
) -> dict:
    """Draw seeded random crops and describe (clean, noisy) pairs.

    Returns the manifest dict; writes it to ``manifest_path`` when given.
    Unreadable images are skipped with a warning; no usable image is an
    error. Use :func:`load_pairs` to materialize the tensors.
    """
    clean_dir = Path(clean_dir)
    sources = []
    for p in list_images(clean_dir):
        try:
            img = load_image(p)
        except Exception as e:  # unreadable file: skip, keep going
            logger.warning("skipping unreadable image %s: %s", p, e)
            continue
        if img.shape[1] >= patch and img.shape[2] >= patch:
            sources.append((p.name, img.shape[1], img.shape[2]))
        else:
            logger.warning("skipping %s: smaller than patch size %d", p, patch)
    if not sources:
        raise JdndError(f"no usable images in {clean_dir}")

    gen = torch.Generator().manual_seed(params.seed)
    records = []
    for k in range(count):
        name, h, w = sources[int(torch.randint(len(sources), (1,), generator=gen))]
        y0 = int(torch.randint(h - patch + 1, (1,), generator=gen))
        x0 = int(torch.randint(w - patch + 1, (1,), generator=gen))
        pair_seed = int(torch.randint(2 ** 31 - 1, (1,), generator=gen))
        records.append({"source": name, "y0": y0, "x0": x0, "seed": pair_seed})

    manifest = {
        "version": MANIFEST_VERSION,
        "root": str(clean_dir),
        "patch": patch,
        "a": params.a,
        "b": params.b,
        "seed": params.seed,
        "pairs": records,
    }
    if manifest_path is not None:
        Path(manifest_path).write_text(json.dumps(manifest, indent=2) + "\n")
    return manifest


def load_manifest(path: str | Path) -> dict:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"manifest not found: {path}")
    manifest = json.loads(path.read_text())
    if manifest.get("version") != MANIFEST_VERSION:
        raise JdndError(f"unsupported manifest version in {path}")
    return manifest


def load_pairs(manifest: dict | str | Path) -> list[tuple[torch.Tensor, torch.Tensor]]:
    """Regenerate (clean, noisy) tensor pairs exactly as described."""
    if not isinstance(manifest, dict):
        manifest = load_manifest(manifest)
    root = Path(manifest["root"])
    patch = manifest["patch"]
    params = NoiseParams(a=manifest["a"], b=manifest["b"], seed=manifest["seed"])
    cache: dict[str, torch.Tensor] = {}
    pairs = []
    for rec in manifest["pairs"]:
        if rec["source"] not in cache:
            cache[rec["source"]] = load_image(root / rec["source"])
        img = cache[rec["source"]]
        clean = img[:, rec["y0"] : rec["y0"] + patch, rec["x0"] : rec["x0"] + patch].clone()
        noisy = add_noise(clean, replace(params, seed=rec["seed"]))
        pairs.append((clean, noisy))
    return pairs
