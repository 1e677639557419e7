"""Command-line entry points: train, encode, decode, eval, complexity.

Exit codes: 0 success, 2 usage error (argparse), 3 missing file,
4 config-hash mismatch, 1 any other module error. ``JDND_MODEL_DIR``
provides the directory against which relative ``--model`` paths resolve.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .errors import HashMismatchError, JdndError

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_MISSING_FILE = 3
EXIT_HASH_MISMATCH = 4


def _model_path(spec: str) -> Path:
    p = Path(spec)
    base = os.environ.get("JDND_MODEL_DIR")
    if not p.is_absolute() and base and not p.exists():
        candidate = Path(base) / p
        if candidate.exists():
            return candidate
    return p


def _load_model(spec: str):
    from .models.codec import load_checkpoint

    model, _ = load_checkpoint(_model_path(spec))
    return model


def cmd_train(args) -> int:
    import torch

    from .config import resolve_config
    from .image_io import list_images, load_image
    from .noise import load_pairs
    from .training import TrainConfig, train_stage1, train_stage2

    cfg = resolve_config(args.config)
    tc = TrainConfig(
        steps=args.steps,
        batch_size=args.batch,
        lr=args.lr,
        seed=args.seed,
        lambda_indices=tuple(int(i) for i in args.lambdas.split(",")),
    )
    out = Path(args.out)
    if args.stage == 1:
        if not args.data:
            raise JdndError("stage 1 needs --data with clean images")
        images = [load_image(p) for p in list_images(args.data)]
        if args.patch:
            images = [img[:, : args.patch, : args.patch] for img in images]
        paths = train_stage1(cfg, images, tc, out)
    else:
        if not args.base or not args.pairs:
            raise JdndError("stage 2 needs --base checkpoint and --pairs manifest")
        pairs = load_pairs(args.pairs)
        paths = [train_stage2(_model_path(args.base), pairs, tc, out)]
    for p in paths:
        print(p)
    return EXIT_OK


def cmd_encode(args) -> int:
    from .entropy.bitstream import encode_image
    from .image_io import load_image

    model = _load_model(args.model)
    x = load_image(args.input)
    bs, stats = encode_image(x, model)
    bs.save(args.out)
    info = {
        "out": str(args.out),
        "bytes": bs.num_bytes,
        "bpp": stats.bpp,
        "model_bits_y": stats.model_bits_y,
        "model_bits_z": stats.model_bits_z,
    }
    print(json.dumps(info) if args.json else f"{args.out}: {bs.num_bytes} bytes, {stats.bpp:.4f} bpp")
    return EXIT_OK


def cmd_decode(args) -> int:
    from .entropy.bitstream import Bitstream, decode_image
    from .image_io import save_image

    model = _load_model(args.model)
    bs = Bitstream.load(args.input)
    x = decode_image(bs, model, mode=args.mode)
    save_image(x, args.out)
    print(f"{args.out}: {x.shape[2]}x{x.shape[1]} ({args.mode})")
    return EXIT_OK


def cmd_eval(args) -> int:
    from .entropy.bitstream import encode_image, decode_image
    from .metrics import RDPoint, bpp, export_rd, psnr
    from .noise import load_pairs

    model = _load_model(args.model)
    pairs = load_pairs(args.pairs)
    points = []
    for i, (clean, noisy) in enumerate(pairs):
        bs, _ = encode_image(noisy, model)
        for mode in ("standard", "denoise"):
            x = decode_image(bs, model, mode=mode)
            points.append(
                RDPoint(
                    bpp=bpp(bs),
                    psnr_db=psnr(clean, x),
                    mode=mode,
                    lambda_index=model.cfg.lambda_index,
                    image_id=f"pair{i:03d}",
                )
            )
    csv_path, plot_path = export_rd(points, args.out)
    if args.json:
        means = {}
        for mode in ("standard", "denoise"):
            sel = [p for p in points if p.mode == mode]
            means[mode] = {
                "bpp": sum(p.bpp for p in sel) / len(sel),
                "psnr": sum(p.psnr_db for p in sel) / len(sel),
            }
        print(json.dumps({"csv": str(csv_path), "plot": str(plot_path), "mean": means}))
    else:
        print(f"{csv_path} ({len(points)} points), plot: {plot_path}")
    return EXIT_OK


def cmd_complexity(args) -> int:
    from .complexity import count_complexity
    from .config import resolve_config

    cfg = resolve_config(args.config)
    try:
        h, w = (int(v) for v in args.size.lower().split("x"))
    except ValueError:
        raise JdndError(f"--size expects HxW, got {args.size!r}")
    report = count_complexity(cfg, h, w, variant=args.variant)
    print(report.to_json() if args.json else report.text())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="jdnd", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="run stage-1 or stage-2 training")
    p.add_argument("--stage", type=int, choices=(1, 2), required=True)
    p.add_argument("--config", required=True, help="preset name or config JSON path")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--data", help="directory of clean images (stage 1)")
    p.add_argument("--pairs", help="pair manifest JSON (stage 2)")
    p.add_argument("--base", help="stage-1 checkpoint (stage 2)")
    p.add_argument("--steps", type=int, default=500)
    p.add_argument("--batch", type=int, default=4)
    p.add_argument("--lr", type=float, default=1e-4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--patch", type=int, default=0, help="crop training images to this size")
    p.add_argument("--lambdas", default="0,1,2,3", help="comma-separated rate-point indices")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("encode", help="encode an image to a bitstream")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="decode a bitstream to an image")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--mode", choices=("standard", "denoise"), default="standard")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("eval", help="rate/quality metrics over a pair manifest")
    p.add_argument("--model", required=True)
    p.add_argument("--pairs", required=True)
    p.add_argument("--out", required=True, help="CSV output path")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("complexity", help="analytic params/MACs report")
    p.add_argument("--config", required=True)
    p.add_argument("--size", default="256x256")
    p.add_argument("--variant", default="full")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_complexity)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except HashMismatchError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_HASH_MISMATCH
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_MISSING_FILE
    except (JdndError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
