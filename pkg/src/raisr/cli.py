"""Command-line interface: train, upscale, sharpen, evaluate, dump-filters.

Exit codes: 0 success, 1 usage error, 2 I/O error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import image_io, pipeline, sharpener, upscaler
from .filterbank import BankFormatError, load_bank, save_bank
from .hashkeys import Quantizer
from .image_ops import rgb_to_ycbcr
from .pipeline import TrainSettings

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_NUMERIC = 3

# Pipeline presets; individual flags override any preset value.
MODES = {
    "sisr": dict(initial="bicubic", blend="randomness", backprojection=10,
                 sharpen_targets="detail", compress_lr=None),
    "enhance": dict(initial="bilinear", blend="hamming", backprojection=0,
                    sharpen_targets="contrast", compress_lr=85),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _float_list(text: str):
    return tuple(float(v) for v in text.split(",") if v.strip())


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="raisr", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    tr = sub.add_parser("train", help="learn a filter bank from a corpus")
    tr.add_argument("--corpus", required=True, help="directory of HR images")
    tr.add_argument("--output", required=True, help="filter bank output path")
    tr.add_argument("--mode", choices=sorted(MODES), default=None)
    tr.add_argument("--scale", type=int, default=2)
    tr.add_argument("--filter-size", type=int, default=11)
    tr.add_argument("--angle-bins", type=int, default=24)
    tr.add_argument("--strength-bins", type=int, default=3)
    tr.add_argument("--coherence-bins", type=int, default=3)
    tr.add_argument("--strength-thresholds", type=_float_list, default=(8.0, 32.0))
    tr.add_argument("--coherence-thresholds", type=_float_list, default=(0.25, 0.5))
    tr.add_argument("--stride", type=int, default=1)
    tr.add_argument("--ridge", type=float, default=1e-4)
    tr.add_argument("--symmetry", dest="symmetry", action="store_true", default=True)
    tr.add_argument("--no-symmetry", dest="symmetry", action="store_false")
    tr.add_argument("--sharpen-targets", choices=["none", "detail", "contrast"],
                    default=None)
    tr.add_argument("--compress-lr", type=int, default=None,
                    help="JPEG quality for LR training images")
    tr.add_argument("--initial", choices=["bilinear", "bicubic"], default=None)
    tr.add_argument("--threads", type=int, default=1)
    tr.add_argument("--report", default=None, help="write JSON training report")

    up = sub.add_parser("upscale", help="super-resolve one image")
    up.add_argument("input")
    up.add_argument("output")
    up.add_argument("--bank", required=True)
    up.add_argument("--scale", type=int, default=None,
                    help="expected scale; must match the bank")
    up.add_argument("--mode", choices=sorted(MODES), default=None)
    up.add_argument("--initial", choices=["bilinear", "bicubic"], default=None)
    up.add_argument("--blend", choices=["none", "randomness", "hamming"], default=None)
    up.add_argument("--ct-threshold", type=float, default=4.0)
    up.add_argument("--backprojection", type=int, default=None,
                    help="back-projection iterations (0 disables)")
    up.add_argument("--bp-step", type=float, default=1.0)
    up.add_argument("--initial-only", action="store_true",
                    help="skip filtering; output the initial interpolation")

    sh = sub.add_parser("sharpen", help="DoG-sharpen one image")
    sh.add_argument("input")
    sh.add_argument("output")
    sh.add_argument("--preset", choices=sorted(sharpener.PRESETS), default=None)
    sh.add_argument("--layers", default=None,
                    help='explicit "sigma:rho:mode,..." layer list')
    sh.add_argument("--ct-threshold", type=float, default=4.0)

    ev = sub.add_parser("evaluate", help="score a bank against HR test images")
    ev.add_argument("--test-dir", required=True)
    ev.add_argument("--bank", required=True)
    ev.add_argument("--mode", choices=sorted(MODES), default=None)
    ev.add_argument("--initial", choices=["bilinear", "bicubic"], default=None)
    ev.add_argument("--blend", choices=["none", "randomness", "hamming"], default=None)
    ev.add_argument("--backprojection", type=int, default=None)
    ev.add_argument("--json", dest="json_out", default=None)

    dump = sub.add_parser("dump-filters", help="render the bank as an image grid")
    dump.add_argument("output")
    dump.add_argument("--bank", required=True)
    return parser


def _mode_value(args, key, mode_key, fallback):
    explicit = getattr(args, key)
    if explicit is not None:
        return explicit
    if args.mode is not None:
        return MODES[args.mode][mode_key]
    return fallback


def _list_images(directory):
    try:
        names = sorted(os.listdir(directory))
    except OSError as e:
        raise FileNotFoundError(f"cannot read directory {directory}: {e}") from e
    paths = [os.path.join(directory, n) for n in names
             if os.path.splitext(n)[1].lower() in image_io.SUPPORTED_EXTS]
    if not paths:
        raise FileNotFoundError(f"no images found in {directory}")
    return paths


def _upscale_options(args) -> upscaler.UpscaleOptions:
    return upscaler.UpscaleOptions(
        initial_kernel=_mode_value(args, "initial", "initial", "bicubic"),
        blend_mode=_mode_value(args, "blend", "blend", "none"),
        bp_iterations=_mode_value(args, "backprojection", "backprojection", 0),
        bp_step=getattr(args, "bp_step", 1.0),
        ct_threshold=getattr(args, "ct_threshold", 4.0),
    )


def cmd_train(args) -> int:
    quantizer = Quantizer(args.angle_bins, args.strength_bins, args.coherence_bins,
                          args.strength_thresholds, args.coherence_thresholds)
    sharpen_targets = _mode_value(args, "sharpen_targets", "sharpen_targets", "none")
    settings = TrainSettings(
        scale=args.scale, filter_dim=args.filter_size, quantizer=quantizer,
        stride=args.stride, ridge=args.ridge, symmetry=args.symmetry,
        initial_kernel=_mode_value(args, "initial", "initial", "bicubic"),
        sharpen_preset=None if sharpen_targets in (None, "none") else sharpen_targets,
        compress_quality=_mode_value(args, "compress_lr", "compress_lr", None),
        threads=args.threads,
    )
    paths = _list_images(args.corpus)
    result = pipeline.train_bank(paths, settings)
    save_bank(result.bank, args.output)
    for path, reason in result.skipped:
        print(f"warning: skipped {path} ({reason})", file=sys.stderr)
    flagged = sum(1 for r in result.reports if r.flagged)
    print(f"trained {args.output}: {result.image_count} images, "
          f"{result.sample_count} samples, {len(result.reports)} populated buckets, "
          f"{flagged} flagged, {result.elapsed_s:.1f}s")
    if args.report:
        report = {
            "images": result.image_count,
            "samples": result.sample_count,
            "skipped": [{"path": p, "reason": r} for p, r in result.skipped],
            "buckets": [
                {"angle": r.key[0], "strength": r.key[1], "coherence": r.key[2],
                 "pixel_type": r.key[3], "count": r.count,
                 "residual": r.residual, "ridge": r.ridge, "flagged": r.flagged}
                for r in result.reports
            ],
        }
        with open(args.report, "w") as f:
            json.dump(report, f, indent=1)
    return EXIT_OK


def cmd_upscale(args) -> int:
    fb = load_bank(args.bank)
    if args.scale is not None and args.scale != fb.scale:
        raise ValueError(f"--scale {args.scale} does not match bank scale {fb.scale}")
    opt = _upscale_options(args)
    img = image_io.read_image(args.input)
    in_pixels = img.shape[0] * img.shape[1]
    t0 = time.time()
    if args.initial_only:
        from .image_ops import resample
        if img.ndim == 2:
            out = resample(img, img.shape[1] * fb.scale, img.shape[0] * fb.scale,
                           opt.initial_kernel)
        else:
            from .filterbank import FilterBank
            delta = FilterBank.delta(fb.scale, fb.filter_dim, fb.quantizer)
            out = pipeline.upscale_image(
                img, delta, upscaler.UpscaleOptions(
                    initial_kernel=opt.initial_kernel, blend_mode="none"))
    else:
        out = pipeline.upscale_image(img, fb, opt)
    elapsed = time.time() - t0
    image_io.write_image(args.output, out)
    out_pixels = in_pixels * fb.scale ** 2
    print(f"{args.output}: {out.shape[1] if out.ndim == 2 else out.shape[1]}x"
          f"{out.shape[0]} in {elapsed:.3f}s "
          f"({out_pixels / max(elapsed, 1e-9) / 1e6:.2f} Mpix/s)")
    return EXIT_OK


def _parse_layers(text: str, ct_threshold: float) -> sharpener.DogConfig:
    layers = []
    for part in text.split(","):
        sigma, rho, mode = part.split(":")
        layers.append(sharpener.DogLayer(rho=float(rho), sigma=float(sigma),
                                         blend_mode=mode))
    return sharpener.DogConfig(layers=tuple(layers), ct_threshold=ct_threshold)


def cmd_sharpen(args) -> int:
    if (args.preset is None) == (args.layers is None):
        raise ValueError("give exactly one of --preset or --layers")
    if args.preset:
        cfg = sharpener.PRESETS[args.preset]()
    else:
        cfg = _parse_layers(args.layers, args.ct_threshold)
    img = image_io.read_image(args.input)
    if img.ndim == 2:
        out = sharpener.sharpen(img, cfg)
    else:
        from .image_ops import ycbcr_to_rgb
        y, cb, cr = rgb_to_ycbcr(img)
        out = np.clip(ycbcr_to_rgb(sharpener.sharpen(y, cfg), cb, cr), 0, 255)
    image_io.write_image(args.output, out)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    fb = load_bank(args.bank)
    opt = _upscale_options(args)
    rows = pipeline.evaluate_corpus(_list_images(args.test_dir), fb, opt)
    summary = pipeline.eval_summary(rows)
    header = (f"{'image':<24}{'PSNR bil':>10}{'PSNR bic':>10}{'PSNR raisr':>12}"
              f"{'SSIM bil':>10}{'SSIM bic':>10}{'SSIM raisr':>12}{'sec':>8}")
    print(header)
    for r in rows:
        print(f"{r.name:<24}{r.psnr_bilinear:>10.4f}{r.psnr_bicubic:>10.4f}"
              f"{r.psnr_raisr:>12.4f}{r.ssim_bilinear:>10.5f}"
              f"{r.ssim_bicubic:>10.5f}{r.ssim_raisr:>12.5f}{r.raisr_seconds:>8.3f}")
    m = summary["mean"]
    print(f"{'mean':<24}{m['psnr_bilinear']:>10.4f}{m['psnr_bicubic']:>10.4f}"
          f"{m['psnr_raisr']:>12.4f}{m['ssim_bilinear']:>10.5f}"
          f"{m['ssim_bicubic']:>10.5f}{m['ssim_raisr']:>12.5f}"
          f"{m['raisr_seconds']:>8.3f}")
    if args.json_out:
        with open(args.json_out, "w") as f:
            json.dump(summary, f, indent=1)
    return EXIT_OK


def cmd_dump_filters(args) -> int:
    fb = load_bank(args.bank)
    image_io.write_image(args.output, pipeline.filter_grid_image(fb))
    return EXIT_OK


_COMMANDS = {
    "train": cmd_train,
    "upscale": cmd_upscale,
    "sharpen": cmd_sharpen,
    "evaluate": cmd_evaluate,
    "dump-filters": cmd_dump_filters,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (FileNotFoundError, PermissionError, IsADirectoryError,
            BankFormatError, OSError) as e:
        print(f"raisr: I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, KeyError) as e:
        print(f"raisr: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (FloatingPointError, np.linalg.LinAlgError) as e:
        print(f"raisr: numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
