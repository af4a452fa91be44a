"""Training and evaluation orchestration on image corpora.

Each corpus image yields an independent partial accumulation (a sparse
bucket -> (Q, V, count) map). Partials are computed in parallel but always
merged in ascending image order, so the resulting filter bank is
byte-identical regardless of worker count.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import image_io, sharpener, upscaler
from .filterbank import FilterBank
from .hashkeys import Quantizer
from .image_ops import (DegradationSpec, crop_to_multiple, degrade, psnr,
                        resample, rgb_to_ycbcr, ssim, ycbcr_to_rgb)
from .learner import AccumulatorBank, accumulate_image, augment_symmetry, solve_filters


@dataclass
class TrainSettings:
    scale: int = 2
    filter_dim: int = 11
    quantizer: Quantizer = field(default_factory=Quantizer)
    stride: int = 1
    ridge: float = 1e-4
    symmetry: bool = True
    initial_kernel: str = "bicubic"
    sharpen_preset: str | None = None   # None | "detail" | "contrast"
    compress_quality: int | None = None
    window: int = 9
    threads: int = 1


@dataclass
class TrainResult:
    bank: FilterBank
    reports: list
    image_count: int
    sample_count: int
    skipped: list  # (path, reason)
    elapsed_s: float


def _load_luma(path) -> np.ndarray:
    img = image_io.read_image(path)
    if img.ndim == 3:
        img, _, _ = rgb_to_ycbcr(img)
    return img


def _image_partial(path, settings: TrainSettings):
    """Accumulate one training image into a fresh bank; returns the bank or
    an error string."""
    s = settings.scale
    try:
        hr = _load_luma(path)
    except Exception as e:  # unreadable file: skip with a warning
        return None, f"unreadable: {e}"
    hr = crop_to_multiple(hr, s)
    min_side = settings.filter_dim + 2 * s
    if hr.shape[0] < min_side or hr.shape[1] < min_side:
        return None, f"too small after cropping: {hr.shape}"
    target = hr
    if settings.sharpen_preset:
        target = sharpener.sharpen(hr, sharpener.PRESETS[settings.sharpen_preset]())
    spec = DegradationSpec(s, "bicubic", settings.compress_quality)
    lr = degrade(hr, spec)
    y = resample(lr, hr.shape[1], hr.shape[0], settings.initial_kernel)
    bank = AccumulatorBank(s, settings.filter_dim, settings.quantizer)
    accumulate_image(bank, y, target, stride=settings.stride, window=settings.window)
    return bank, None


def train_bank(image_paths, settings: TrainSettings) -> TrainResult:
    """Learn a filter bank from a corpus of HR images.

    Deterministic for fixed inputs and settings, independent of thread
    count: per-image partial banks are merged in image order.
    """
    paths = sorted(str(p) for p in image_paths)
    if not paths:
        raise ValueError("training corpus is empty")
    t0 = time.time()
    bank = AccumulatorBank(settings.scale, settings.filter_dim, settings.quantizer)
    skipped = []

    def job(path):
        return _image_partial(path, settings)

    if settings.threads <= 1:
        results = map(job, paths)
        for path, (partial, err) in zip(paths, results):
            if partial is None:
                skipped.append((path, err))
            else:
                bank.Q += partial.Q
                bank.V += partial.V
                bank.counts += partial.counts
    else:
        with ThreadPoolExecutor(max_workers=settings.threads) as pool:
            for path, (partial, err) in zip(paths, pool.map(job, paths)):
                if partial is None:
                    skipped.append((path, err))
                else:
                    bank.Q += partial.Q
                    bank.V += partial.V
                    bank.counts += partial.counts

    if int(bank.counts.sum()) == 0:
        raise ValueError("no usable training images in corpus")
    if settings.symmetry:
        bank = augment_symmetry(bank)
    fb, reports = solve_filters(bank, ridge=settings.ridge)
    return TrainResult(fb, reports, len(paths) - len(skipped),
                       int(bank.counts.sum()), skipped, time.time() - t0)


# ---------------------------------------------------------------------------
# Inference on color images and evaluation

def upscale_image(img: np.ndarray, fb: FilterBank,
                  opt: upscaler.UpscaleOptions, window: int = 9) -> np.ndarray:
    """Upscale a grayscale or RGB image: learned filters on luma, bicubic on
    the chroma channels."""
    if img.ndim == 2:
        return upscaler.upscale(img, fb, opt, window)
    s = fb.scale
    y, cb, cr = rgb_to_ycbcr(img)
    y_up = upscaler.upscale(y, fb, opt, window)
    out_w, out_h = img.shape[1] * s, img.shape[0] * s
    cb_up = resample(cb, out_w, out_h, "bicubic")
    cr_up = resample(cr, out_w, out_h, "bicubic")
    return np.clip(ycbcr_to_rgb(y_up, cb_up, cr_up), 0.0, 255.0)


@dataclass
class EvalRow:
    name: str
    psnr_bilinear: float
    psnr_bicubic: float
    psnr_raisr: float
    ssim_bilinear: float
    ssim_bicubic: float
    ssim_raisr: float
    raisr_seconds: float


def evaluate_corpus(image_paths, fb: FilterBank, opt: upscaler.UpscaleOptions,
                    window: int = 9) -> list:
    """Degrade each HR image bicubically by the bank's scale, upscale with
    bilinear / bicubic / the learned filters, score PSNR and SSIM on luma."""
    s = fb.scale
    rows = []
    for path in sorted(str(p) for p in image_paths):
        hr = crop_to_multiple(_load_luma(path), s)
        lr = degrade(hr, DegradationSpec(s, "bicubic"))
        w, h = hr.shape[1], hr.shape[0]
        bil = np.clip(resample(lr, w, h, "bilinear"), 0, 255)
        bic = np.clip(resample(lr, w, h, "bicubic"), 0, 255)
        t0 = time.time()
        sr = upscaler.upscale(lr, fb, opt, window)
        dt = time.time() - t0
        rows.append(EvalRow(
            os.path.basename(path),
            psnr(bil, hr), psnr(bic, hr), psnr(sr, hr),
            ssim(bil, hr), ssim(bic, hr), ssim(sr, hr), dt))
    return rows


def eval_summary(rows) -> dict:
    """Per-image and mean metrics as a JSON-ready dict."""
    means = {
        f"{metric}_{method}": float(np.mean([getattr(r, f"{metric}_{method}") for r in rows]))
        for metric in ("psnr", "ssim") for method in ("bilinear", "bicubic", "raisr")
    }
    means["raisr_seconds"] = float(np.mean([r.raisr_seconds for r in rows]))
    return {
        "images": [vars(r) for r in rows],
        "mean": means,
    }


def filter_grid_image(fb: FilterBank) -> np.ndarray:
    """Tile every filter as a min-max normalized d x d patch.

    Angle varies along columns; (strength, coherence) pairs along rows;
    pixel-type grids are stacked vertically.
    """
    q = fb.quantizer
    d = fb.filter_dim
    t_count = fb.scale ** 2
    rows_per_grid = q.strength_bins * q.coherence_bins
    out = np.zeros((t_count * rows_per_grid * d, q.angle_bins * d))
    for t in range(t_count):
        for sb in range(q.strength_bins):
            for cb in range(q.coherence_bins):
                row = t * rows_per_grid + sb * q.coherence_bins + cb
                for a in range(q.angle_bins):
                    taps = fb.filters[a, sb, cb, t].reshape(d, d)
                    lo, hi = taps.min(), taps.max()
                    tile = (taps - lo) / (hi - lo) if hi > lo else np.zeros_like(taps)
                    out[row * d:(row + 1) * d, a * d:(a + 1) * d] = 255.0 * tile
    return out
