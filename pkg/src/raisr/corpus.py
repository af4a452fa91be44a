"""Deterministic synthetic training corpus.

Scenes of random oriented shapes, stripes and gratings are rendered at 4x
resolution and bicubic-downscaled, giving clean anti-aliased edges similar
in character to graphic/banner imagery. Useful as a permissively shareable
desk-scale stand-in for a photographic corpus.
"""

from __future__ import annotations

import os

import numpy as np
from scipy.ndimage import gaussian_filter

from . import image_io
from .image_ops import resample


def _coords(n: int, rng: np.random.Generator):
    """Rotated, centered coordinate frames for one random shape."""
    yy, xx = np.meshgrid(np.arange(n, dtype=np.float64),
                         np.arange(n, dtype=np.float64), indexing="ij")
    cy, cx = rng.uniform(0, n, 2)
    ang = rng.uniform(0, np.pi)
    u = (xx - cx) * np.cos(ang) + (yy - cy) * np.sin(ang)
    v = -(xx - cx) * np.sin(ang) + (yy - cy) * np.cos(ang)
    return u, v


def render_scene(rng: np.random.Generator, size: int = 160,
                 supersample: int = 4) -> np.ndarray:
    """One synthetic grayscale scene in [0, 255]."""
    n = size * supersample
    yy, xx = np.meshgrid(np.linspace(0, 1, n), np.linspace(0, 1, n), indexing="ij")
    ga, gb = rng.uniform(-1, 1, 2)
    img = 128.0 + 80.0 * (ga * xx + gb * yy)

    for _ in range(rng.integers(10, 22)):
        u, v = _coords(n, rng)
        value = rng.uniform(0, 255)
        kind = rng.integers(0, 5)
        if kind == 0:  # rectangle
            a, b = rng.uniform(0.03, 0.35, 2) * n
            mask = (np.abs(u) < a) & (np.abs(v) < b)
            img[mask] = value
        elif kind == 1:  # ellipse
            a, b = rng.uniform(0.03, 0.3, 2) * n
            mask = (u / a) ** 2 + (v / b) ** 2 < 1.0
            img[mask] = value
        elif kind == 2:  # bar / line
            width = rng.uniform(0.004, 0.05) * n
            mask = np.abs(u) < width
            img[mask] = value
        elif kind == 3:  # sinusoidal grating patch
            a, b = rng.uniform(0.1, 0.4, 2) * n
            freq = rng.uniform(0.5, 4.0) * supersample
            patch = (np.abs(u) < a) & (np.abs(v) < b)
            img[patch] += rng.uniform(20, 90) * np.sin(2 * np.pi * u / freq)[patch]
        else:  # stripe bundle (text-like high-frequency detail)
            width = rng.uniform(0.01, 0.04) * n
            period = width * rng.uniform(2.0, 4.0)
            extent = rng.uniform(0.1, 0.35) * n
            mask = (np.abs(v) < extent) & (np.abs(u) < extent) \
                & (np.mod(u, period) < width)
            img[mask] = value

    img = resample(np.clip(img, 0, 255), size, size, "bicubic")
    # Fine stochastic texture, as photographic detail the degradation must
    # destroy; without it every scene is too predictable to exercise the
    # high-frequency behavior of a learned upscaler.
    texture = gaussian_filter(rng.normal(0.0, 1.0, img.shape), 0.8)
    img += texture * (rng.uniform(6.0, 14.0) / texture.std())
    return np.clip(img, 0.0, 255.0)


def generate_corpus(outdir, count: int = 100, size: int = 160,
                    seed: int = 0) -> list:
    """Write `count` deterministic scenes as PNGs; returns the file paths."""
    os.makedirs(outdir, exist_ok=True)
    paths = []
    for i in range(count):
        rng = np.random.default_rng(seed * 1_000_003 + i)
        path = os.path.join(str(outdir), f"scene_{i:04d}.png")
        image_io.write_image(path, render_scene(rng, size))
        paths.append(path)
    return paths
