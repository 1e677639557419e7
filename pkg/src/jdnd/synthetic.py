"""Deterministic synthetic clean images for desk-scale runs and demos.

Each image mixes a smooth two-point gradient, a few soft-edged shapes, and a
touch of blurred texture, all drawn from a seeded generator.
"""

from __future__ import annotations

from pathlib import Path

import torch

from .image_io import save_image


def _soft_disc(h: int, w: int, cy: float, cx: float, r: float, sharp: float) -> torch.Tensor:
    ys = torch.arange(h).view(-1, 1).float()
    xs = torch.arange(w).view(1, -1).float()
    d = torch.sqrt((ys - cy) ** 2 + (xs - cx) ** 2)
    return torch.sigmoid((r - d) * sharp)


def _blur(x: torch.Tensor, passes: int = 2) -> torch.Tensor:
    k = torch.tensor([[[[1.0, 2, 1], [2, 4, 2], [1, 2, 1]]]]) / 16.0
    k = k.expand(x.shape[0], 1, 3, 3)
    y = x.unsqueeze(0)
    for _ in range(passes):
        y = torch.nn.functional.conv2d(y, k, padding=1, groups=x.shape[0])
    return y.squeeze(0)


def generate_image(size: int, generator: torch.Generator) -> torch.Tensor:
    """One (3, size, size) image in [0, 1]."""
    g = generator

    def u(lo, hi):
        return lo + (hi - lo) * torch.rand(1, generator=g).item()

    def color():
        return torch.rand(3, 1, 1, generator=g) * 0.8 + 0.1

    ys = torch.linspace(0, 1, size).view(-1, 1).expand(size, size)
    xs = torch.linspace(0, 1, size).view(1, -1).expand(size, size)
    a, b = u(-1, 1), u(-1, 1)
    ramp = (a * ys + b * xs - min(a + b, 0)) / (abs(a) + abs(b) + 1e-6)
    img = color() * (0.4 + 0.6 * ramp)

    for _ in range(int(u(2, 6))):
        mask = _soft_disc(size, size, u(0, size), u(0, size), u(size / 12, size / 3), u(0.5, 3))
        img = img * (1 - mask) + color() * mask

    texture = _blur(torch.rand(3, size, size, generator=g) - 0.5, passes=3)
    img = img + u(0.02, 0.1) * texture
    return img.clamp(0.0, 1.0)


def generate_images(count: int, size: int, seed: int = 0) -> list[torch.Tensor]:
    g = torch.Generator().manual_seed(seed)
    return [generate_image(size, g) for _ in range(count)]


def write_images(directory: str | Path, count: int, size: int, seed: int = 0) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for i, img in enumerate(generate_images(count, size, seed)):
        p = directory / f"synth_{i:03d}.png"
        save_image(img, p)
        paths.append(p)
    return paths
