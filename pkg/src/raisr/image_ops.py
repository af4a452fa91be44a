"""Core single-channel image operations: color conversion, resampling,
training degradation and quality metrics.

All planes are 2-D float arrays (row-major, nominal range [0, 255]).
Resampling uses a top-left-aligned grid (source position = dest * in/out),
so that at integer upscale factors the source samples coincide with the
phase-(0,0) pixels of the output grid. Borders are edge-replicated
everywhere.
"""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate1d

PSNR_CAP_DB = 99.0


def as_plane(data) -> np.ndarray:
    """Validate and return a 2-D float64 plane."""
    p = np.asarray(data, dtype=np.float64)
    if p.ndim != 2 or p.shape[0] < 1 or p.shape[1] < 1:
        raise ValueError(f"plane must be 2-D and non-empty, got shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise ValueError("plane contains NaN or Inf")
    return p


def to_uint8(p: np.ndarray) -> np.ndarray:
    """Clamp to [0,255] and round to 8-bit."""
    return np.clip(np.rint(p), 0, 255).astype(np.uint8)


# ---------------------------------------------------------------------------
# Color conversion (ITU-R BT.601, full range)

def rgb_to_ycbcr(img: np.ndarray):
    """Split an (H, W, 3) RGB image into full-range BT.601 luma/Cb/Cr planes."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"expected (H, W, 3) RGB image, got shape {img.shape}")
    r, g, b = img[..., 0], img[..., 1], img[..., 2]
    y = 0.299 * r + 0.587 * g + 0.114 * b
    cb = 128.0 + (b - y) * (0.5 / (1.0 - 0.114))
    cr = 128.0 + (r - y) * (0.5 / (1.0 - 0.299))
    return y, cb, cr


def ycbcr_to_rgb(y: np.ndarray, cb: np.ndarray, cr: np.ndarray) -> np.ndarray:
    """Inverse of :func:`rgb_to_ycbcr`; returns an (H, W, 3) float image."""
    y = np.asarray(y, dtype=np.float64)
    b = y + (np.asarray(cb, dtype=np.float64) - 128.0) * ((1.0 - 0.114) / 0.5)
    r = y + (np.asarray(cr, dtype=np.float64) - 128.0) * ((1.0 - 0.299) / 0.5)
    g = (y - 0.299 * r - 0.114 * b) / 0.587
    return np.stack([r, g, b], axis=-1)


# ---------------------------------------------------------------------------
# Resampling

def _cubic_kernel(x: np.ndarray, a: float = -0.5) -> np.ndarray:
    """Keys cubic (Catmull-Rom family, a = -0.5), support 2."""
    x = np.abs(x)
    out = np.zeros_like(x)
    m1 = x <= 1.0
    m2 = (x > 1.0) & (x < 2.0)
    out[m1] = (a + 2.0) * x[m1] ** 3 - (a + 3.0) * x[m1] ** 2 + 1.0
    out[m2] = a * x[m2] ** 3 - 5.0 * a * x[m2] ** 2 + 8.0 * a * x[m2] - 4.0 * a
    return out


def _linear_kernel(x: np.ndarray) -> np.ndarray:
    return np.maximum(0.0, 1.0 - np.abs(x))


_KERNELS = {
    "bilinear": (_linear_kernel, 1.0),
    "bicubic": (_cubic_kernel, 2.0),
}


def _axis_weights(n_in: int, n_out: int, kernel: str):
    """Tap indices and normalized weights for one resampling axis.

    Top-left alignment: source position of output j is j * n_in / n_out.
    When downscaling, the kernel is stretched by the scale factor
    (anti-aliasing), as is standard for high-quality decimation.
    """
    scale = n_in / n_out
    pos = np.arange(n_out, dtype=np.float64) * scale
    if kernel == "nearest":
        idx = np.clip(np.floor(pos + 0.5).astype(np.int64), 0, n_in - 1)
        return idx[:, None], np.ones((n_out, 1))
    kfunc, base_support = _KERNELS[kernel]
    kscale = max(scale, 1.0)
    support = base_support * kscale
    left = np.ceil(pos - support).astype(np.int64)
    ntaps = int(np.floor(2.0 * support)) + 2
    idx = left[:, None] + np.arange(ntaps)[None, :]
    w = kfunc((idx - pos[:, None]) / kscale)
    w /= w.sum(axis=1, keepdims=True)
    idx = np.clip(idx, 0, n_in - 1)  # edge replication
    return idx, w


def _resample_axis(p: np.ndarray, n_out: int, kernel: str, axis: int) -> np.ndarray:
    idx, w = _axis_weights(p.shape[axis], n_out, kernel)
    taken = np.take(p, idx, axis=axis)  # (..., n_out, ntaps, ...)
    if axis == 0:
        return np.einsum("ot,otc->oc", w, taken)
    return np.einsum("ot,rot->ro", w, taken)


def resample(p: np.ndarray, out_w: int, out_h: int, kernel: str = "bicubic") -> np.ndarray:
    """Resample a plane to (out_h, out_w) with the given kernel."""
    p = as_plane(p)
    if out_w < 1 or out_h < 1:
        raise ValueError("output dimensions must be >= 1")
    if kernel not in ("nearest", "bilinear", "bicubic"):
        raise ValueError(f"unknown kernel {kernel!r}")
    out = _resample_axis(p, out_h, kernel, axis=0)
    out = _resample_axis(out, out_w, kernel, axis=1)
    return out


# ---------------------------------------------------------------------------
# Training degradation

@dataclass(frozen=True)
class DegradationSpec:
    """How an HR training image is turned into its LR counterpart."""
    scale: int = 2
    downscale_kernel: str = "bicubic"
    codec_quality: int | None = None

    def __post_init__(self):
        if self.scale < 1:
            raise ValueError("scale must be >= 1")
        if self.downscale_kernel not in ("bilinear", "bicubic"):
            raise ValueError(f"unknown downscale kernel {self.downscale_kernel!r}")
        if self.codec_quality is not None and not (0 <= self.codec_quality <= 100):
            raise ValueError("codec_quality must be in [0, 100]")


def crop_to_multiple(p: np.ndarray, s: int) -> np.ndarray:
    """Crop to the largest region whose dimensions are divisible by s."""
    h, w = p.shape
    return p[: h - h % s, : w - w % s]


def degrade(hr: np.ndarray, spec: DegradationSpec, workdir: str | None = None) -> np.ndarray:
    """Produce the LR training plane: downscale by spec.scale, then an
    optional on-disk JPEG round trip at spec.codec_quality."""
    hr = crop_to_multiple(as_plane(hr), spec.scale)
    if spec.scale == 1:
        lr = hr.copy()
    else:
        lr = resample(hr, hr.shape[1] // spec.scale, hr.shape[0] // spec.scale,
                      spec.downscale_kernel)
    if spec.codec_quality is not None:
        lr = _jpeg_roundtrip(lr, spec.codec_quality, workdir)
    return lr


def _jpeg_roundtrip(p: np.ndarray, quality: int, workdir: str | None) -> np.ndarray:
    from PIL import Image

    fd, path = tempfile.mkstemp(suffix=".jpg", dir=workdir)
    os.close(fd)
    try:
        try:
            Image.fromarray(to_uint8(p), mode="L").save(path, quality=int(quality))
            with Image.open(path) as im:
                return np.asarray(im.convert("L"), dtype=np.float64)
        except OSError as e:
            raise RuntimeError(f"JPEG codec round-trip failed: {e}") from e
    finally:
        os.unlink(path)


# ---------------------------------------------------------------------------
# Quality metrics

def psnr(a: np.ndarray, b: np.ndarray) -> float:
    """Peak signal-to-noise ratio in dB, peak 255, capped at 99.0 dB."""
    a, b = as_plane(a), as_plane(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    mse = np.mean((a - b) ** 2)
    if mse == 0.0:
        return PSNR_CAP_DB
    return min(PSNR_CAP_DB, 10.0 * np.log10(255.0 ** 2 / mse))


def _gauss_taps(n: int, sigma: float) -> np.ndarray:
    x = np.arange(n, dtype=np.float64) - (n - 1) / 2.0
    w = np.exp(-(x ** 2) / (2.0 * sigma ** 2))
    return w / w.sum()


def _win_mean(p: np.ndarray, taps: np.ndarray) -> np.ndarray:
    out = correlate1d(p, taps, axis=0, mode="nearest")
    return correlate1d(out, taps, axis=1, mode="nearest")


def ssim(a: np.ndarray, b: np.ndarray, window: int = 11, sigma: float = 1.5) -> float:
    """Mean structural similarity with an 11x11 Gaussian window (sigma 1.5),
    stabilizers C1 = (0.01*255)^2 and C2 = (0.03*255)^2."""
    a, b = as_plane(a), as_plane(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    if a.shape[0] < window or a.shape[1] < window:
        raise ValueError(f"image smaller than the {window}x{window} SSIM window")
    c1 = (0.01 * 255.0) ** 2
    c2 = (0.03 * 255.0) ** 2
    taps = _gauss_taps(window, sigma)
    mu_a = _win_mean(a, taps)
    mu_b = _win_mean(b, taps)
    var_a = _win_mean(a * a, taps) - mu_a ** 2
    var_b = _win_mean(b * b, taps) - mu_b ** 2
    cov = _win_mean(a * b, taps) - mu_a * mu_b
    num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)
    den = (mu_a ** 2 + mu_b ** 2 + c1) * (var_a + var_b + c2)
    return float(np.mean(num / den))
