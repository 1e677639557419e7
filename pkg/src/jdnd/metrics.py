"""Quality/rate metrics and rate-distortion curve export."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import torch

from .entropy.bitstream import Bitstream
from .errors import JdndError

PSNR_CAP_DB = 100.0


def psnr(x_ref: torch.Tensor, x_hat: torch.Tensor) -> float:
    """PSNR-RGB in dB for [0, 1]-scaled images; capped at 100 dB."""
    if x_ref.shape != x_hat.shape:
        raise ValueError(f"shape mismatch: {tuple(x_ref.shape)} vs {tuple(x_hat.shape)}")
    mse = float(torch.mean((x_ref - x_hat) ** 2))
    if mse <= 1e-10:
        return PSNR_CAP_DB
    return min(PSNR_CAP_DB, 10.0 * math.log10(1.0 / mse))


def bpp(bs: Bitstream) -> float:
    """Bits per pixel of the full stream (header included)."""
    return 8.0 * bs.num_bytes / (bs.height * bs.width)


@dataclass
class RDPoint:
    bpp: float
    psnr_db: float
    mode: str  # standard | denoise
    lambda_index: int
    image_id: str


CSV_COLUMNS = ("image", "mode", "lambda", "bpp", "psnr")


def export_rd(points: list[RDPoint], csv_path: str | Path, plot_path: str | Path | None = None):
    """Write RD points (sorted by bpp) to CSV and a vector plot.

    The plot lands next to the CSV with an .svg suffix unless given.
    Returns (csv_path, plot_path).
    """
    if not points:
        raise JdndError("no rate-distortion points to export")
    csv_path = Path(csv_path)
    plot_path = Path(plot_path) if plot_path else csv_path.with_suffix(".svg")
    ordered = sorted(points, key=lambda p: p.bpp)

    with csv_path.open("w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(CSV_COLUMNS)
        for p in ordered:
            writer.writerow([p.image_id, p.mode, p.lambda_index, repr(p.bpp), repr(p.psnr_db)])

    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5, 4))
    for mode in sorted({p.mode for p in ordered}):
        pts = [p for p in ordered if p.mode == mode]
        ax.plot([p.bpp for p in pts], [p.psnr_db for p in pts], marker="o", label=mode)
    ax.set_xlabel("bpp")
    ax.set_ylabel("PSNR-RGB (dB)")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(plot_path)
    plt.close(fig)
    return csv_path, plot_path


def read_rd(csv_path: str | Path) -> list[RDPoint]:
    """Inverse of :func:`export_rd`'s CSV (values round-trip exactly)."""
    points = []
    with Path(csv_path).open(newline="") as f:
        reader = csv.DictReader(f)
        for row in reader:
            points.append(
                RDPoint(
                    bpp=float(row["bpp"]),
                    psnr_db=float(row["psnr"]),
                    mode=row["mode"],
                    lambda_index=int(row["lambda"]),
                    image_id=row["image"],
                )
            )
    return points
