"""Two-stage optimization.

Stage 1 trains the base autoencoders and the hyper prior on clean images
with the rate-distortion objective (one checkpoint per rate point). Stage 2
freezes the base and fits only the refiner and prompt generator on
clean/noisy pairs with an l1 objective through the full decode path, using
the additive-noise quantization surrogate end to end.

Distortion convention: the rate-point multipliers assume MSE measured on the
255 scale, i.e. D = MSE(255*x, 255*x_hat); inputs stay in [0, 1].
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import torch
from torch import Tensor

from .config import LAMBDA_VALUES, ModelConfig
from .errors import TrainingError
from .models.codec import Codec, save_checkpoint

logger = logging.getLogger(__name__)


def rd_loss(x: Tensor, x_hat: Tensor, bpp_y: Tensor, bpp_z: Tensor, lam: float) -> Tensor:
    """bpp_z + bpp_y + lambda * MSE on the 255 scale."""
    if lam <= 0:
        raise TrainingError(f"lambda must be positive, got {lam}")
    mse = torch.mean((255.0 * x - 255.0 * x_hat) ** 2)
    return bpp_z + bpp_y + lam * mse


def l1_loss(x: Tensor, x_hat: Tensor) -> Tensor:
    """Mean absolute error over all pixels and channels."""
    if x.shape != x_hat.shape:
        raise TrainingError(f"shape mismatch: {tuple(x.shape)} vs {tuple(x_hat.shape)}")
    return torch.mean(torch.abs(x - x_hat))


@dataclass
class TrainConfig:
    steps: int = 500
    batch_size: int = 4
    lr: float = 1e-4
    seed: int = 0
    patch: int = 0  # random-crop size during training; 0 = full images
    lambda_indices: tuple[int, ...] = (0, 1, 2, 3)
    warm_start: bool = True  # chain rate points from the previous checkpoint
    log_every: int = 10

    @classmethod
    def load(cls, path: str | Path) -> "TrainConfig":
        d = json.loads(Path(path).read_text())
        if "lambda_indices" in d:
            d["lambda_indices"] = tuple(d["lambda_indices"])
        return cls(**d)


def _crop(img: Tensor, patch: int, generator: torch.Generator) -> Tensor:
    if not patch or (img.shape[1] == patch and img.shape[2] == patch):
        return img
    if img.shape[1] < patch or img.shape[2] < patch:
        raise TrainingError(f"image {tuple(img.shape)} smaller than patch {patch}")
    y0 = int(torch.randint(img.shape[1] - patch + 1, (1,), generator=generator))
    x0 = int(torch.randint(img.shape[2] - patch + 1, (1,), generator=generator))
    return img[:, y0 : y0 + patch, x0 : x0 + patch]


def _batches(items: list[Tensor], cfg: TrainConfig, generator: torch.Generator):
    n = len(items)
    for _ in range(cfg.steps):
        idx = torch.randint(n, (min(cfg.batch_size, n),), generator=generator)
        yield torch.stack([_crop(items[i], cfg.patch, generator) for i in idx])


def _write_log(path: Path | None, records: list[dict]) -> None:
    if path is None:
        return
    with path.open("w") as f:
        for rec in records:
            f.write(json.dumps(rec) + "\n")


def fit_stage1(
    model: Codec,
    images: list[Tensor],
    lam: float,
    train_cfg: TrainConfig,
    log_path: Path | None = None,
) -> list[dict]:
    """Optimize the base codec on clean images at one rate point."""
    if not images:
        raise TrainingError("stage-1 training needs at least one image")
    torch.manual_seed(train_cfg.seed)
    gen = torch.Generator().manual_seed(train_cfg.seed + 1)
    sampler = torch.Generator().manual_seed(train_cfg.seed + 2)
    model.train()
    opt = torch.optim.Adam(
        [p for _, p in model.base_named_parameters()], lr=train_cfg.lr
    )
    records = []
    for step, batch in enumerate(_batches(images, train_cfg, sampler)):
        opt.zero_grad()
        x_hat, bpp_y, bpp_z = model.forward_rate_distortion(batch, gen)
        loss = rd_loss(batch, x_hat, bpp_y, bpp_z, lam)
        loss_val = float(loss.detach())
        if not math.isfinite(loss_val):
            raise TrainingError(
                f"stage-1 loss diverged at step {step}: loss={loss_val}, "
                f"bpp_y={float(bpp_y.detach()):.4f}, bpp_z={float(bpp_z.detach()):.4f}"
            )
        loss.backward()
        opt.step()
        rec = {
            "step": step,
            "loss": loss_val,
            "bpp_y": float(bpp_y.detach()),
            "bpp_z": float(bpp_z.detach()),
        }
        records.append(rec)
        if train_cfg.log_every and step % train_cfg.log_every == 0:
            logger.info("stage1 step %d loss %.4f", step, rec["loss"])
    model.eval()
    _write_log(log_path, records)
    return records


def train_stage1(
    cfg: ModelConfig,
    images: list[Tensor],
    train_cfg: TrainConfig,
    out_dir: str | Path,
) -> list[Path]:
    """Train one checkpoint per requested rate point; returns their paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    state = None
    for li in train_cfg.lambda_indices:
        mcfg = ModelConfig.from_dict({**cfg.to_dict(), "lambda_index": li})
        torch.manual_seed(train_cfg.seed)
        model = Codec(mcfg)
        if state is not None and train_cfg.warm_start:
            model.load_state_dict(state)
        fit_stage1(
            model,
            images,
            LAMBDA_VALUES[li],
            train_cfg,
            log_path=out_dir / f"stage1_lambda{li}.log",
        )
        path = out_dir / f"stage1_lambda{li}.pt"
        save_checkpoint(model, path, stage=1, step=train_cfg.steps)
        paths.append(path)
        state = model.state_dict()
    return paths


def fit_stage2(
    model: Codec,
    pairs: list[tuple[Tensor, Tensor]],
    train_cfg: TrainConfig,
    log_path: Path | None = None,
) -> list[dict]:
    """Freeze the base codec and fit refiner + prompt generator with l1."""
    if not pairs:
        raise TrainingError("stage-2 training needs at least one pair")
    base_hash = model.base_hash()
    model.freeze_base()
    torch.manual_seed(train_cfg.seed)
    gen = torch.Generator().manual_seed(train_cfg.seed + 1)
    sampler = torch.Generator().manual_seed(train_cfg.seed + 2)
    model.train()
    opt = torch.optim.Adam(
        [p for _, p in model.addon_named_parameters()], lr=train_cfg.lr
    )
    records = []
    n = len(pairs)
    for step in range(train_cfg.steps):
        idx = torch.randint(n, (min(train_cfg.batch_size, n),), generator=sampler)
        cs, ns = [], []
        for i in idx:
            clean_i, noisy_i = pairs[i]
            if train_cfg.patch and clean_i.shape[1:] != (train_cfg.patch, train_cfg.patch):
                joint = _crop(torch.cat([clean_i, noisy_i]), train_cfg.patch, sampler)
                clean_i, noisy_i = joint[:3], joint[3:]
            cs.append(clean_i)
            ns.append(noisy_i)
        clean = torch.stack(cs)
        noisy = torch.stack(ns)
        opt.zero_grad()
        x_hat = model.forward_denoise(noisy, gen)
        loss = l1_loss(clean, x_hat)
        loss_val = float(loss.detach())
        if not math.isfinite(loss_val):
            raise TrainingError(f"stage-2 loss diverged at step {step}: {loss_val}")
        loss.backward()
        opt.step()
        records.append({"step": step, "loss": loss_val})
        if train_cfg.log_every and step % train_cfg.log_every == 0:
            logger.info("stage2 step %d loss %.4f", step, records[-1]["loss"])
    model.eval()
    if model.base_hash() != base_hash:
        raise TrainingError("frozen-base contract violated: base parameters changed")
    _write_log(log_path, records)
    return records


def train_stage2(
    base_ckpt: str | Path,
    pairs: list[tuple[Tensor, Tensor]],
    train_cfg: TrainConfig,
    out_dir: str | Path,
) -> Path:
    """Stage 2 on top of one stage-1 checkpoint; returns the new checkpoint."""
    from .models.codec import load_checkpoint

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    model, payload = load_checkpoint(base_ckpt)
    li = model.cfg.lambda_index
    fit_stage2(model, pairs, train_cfg, log_path=out_dir / f"stage2_lambda{li}.log")
    path = out_dir / f"stage2_lambda{li}.pt"
    save_checkpoint(model, path, stage=2, step=train_cfg.steps)
    return path


def smoothed_losses(records: list[dict], chunks: int = 3) -> list[float]:
    """Mean loss over consecutive thirds (or ``chunks``-ths) of a run."""
    losses = [r["loss"] for r in records]
    k = len(losses) // chunks
    if k == 0:
        raise TrainingError("run too short to smooth")
    return [sum(losses[i * k : (i + 1) * k]) / k for i in range(chunks)]
