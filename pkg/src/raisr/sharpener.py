"""Cascaded difference-of-Gaussians sharpener with census-blended layers.

Each layer blurs the previous level's smoothed image, amplifies the band
between the two blur levels, and adds the result back into the input
weighted by a census-transform blend map. A layer's rho is a percent-style
amount: the band signal is scaled by rho/100, so rho = 55 adds roughly
half of the band's amplitude. The cascade reuses each level's blur as the
next level's input, so successive layers cover progressively lower bands.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate1d

from . import blending

BINOMIAL_TAPS = (0.25, 0.5, 0.25)  # separable approximation of sigma ~ 0.85


def gaussian_taps(sigma: float, length: int | None = None) -> np.ndarray:
    """Sampled, renormalized 1-D Gaussian; default length covers +-3 sigma."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if length is None:
        length = 2 * int(np.ceil(3.0 * sigma)) + 1
    if length % 2 != 1:
        raise ValueError("tap length must be odd")
    x = np.arange(length, dtype=np.float64) - (length - 1) / 2.0
    w = np.exp(-(x ** 2) / (2.0 * sigma ** 2))
    return w / w.sum()


@dataclass(frozen=True)
class DogLayer:
    """One cascade level: blur taps (or sigma), percent amplification of the
    band between the input and its blur, and the blend mode."""
    rho: float
    sigma: float | None = None
    taps: tuple | None = None
    blend_mode: str = "none"  # none | randomness | hamming

    def __post_init__(self):
        if self.rho < 0:
            raise ValueError("rho must be >= 0")
        if (self.sigma is None) == (self.taps is None):
            raise ValueError("give exactly one of sigma or taps")
        if self.blend_mode not in ("none", "randomness", "hamming"):
            raise ValueError(f"unknown blend mode {self.blend_mode!r}")
        if self.taps is not None:
            taps = tuple(float(t) for t in self.taps)
            if len(taps) % 2 != 1:
                raise ValueError("tap list must have odd length")
            if abs(sum(taps) - 1.0) > 1e-9:
                raise ValueError("taps must be normalized to sum 1")
            object.__setattr__(self, "taps", taps)

    def tap_array(self) -> np.ndarray:
        if self.taps is not None:
            return np.asarray(self.taps, dtype=np.float64)
        return gaussian_taps(self.sigma)


@dataclass(frozen=True)
class DogConfig:
    layers: tuple
    ct_threshold: float = 4.0

    def __post_init__(self):
        if len(self.layers) < 1:
            raise ValueError("need at least one layer")
        object.__setattr__(self, "layers", tuple(self.layers))


def detail_preset(rho: float = 55.0) -> DogConfig:
    """Three randomness-blended layers whose cumulative blur sigmas chain
    geometrically by sqrt(2) (roughly 0.85, 1.2, 1.7): amplifies high
    frequencies along structure only. Used to sharpen training targets."""
    return DogConfig(layers=(
        DogLayer(rho=rho, taps=BINOMIAL_TAPS, blend_mode="randomness"),
        DogLayer(rho=rho, taps=BINOMIAL_TAPS, blend_mode="randomness"),
        DogLayer(rho=rho, sigma=0.85 * np.sqrt(2.0), blend_mode="randomness"),
    ))


def contrast_preset(rho: float = 55.0) -> DogConfig:
    """Binomial layer plus a wide sigma-8.5 layer (65 taps) with Hamming
    blending: amplifies a wide frequency range for contrast enhancement."""
    return DogConfig(layers=(
        DogLayer(rho=rho, taps=BINOMIAL_TAPS, blend_mode="hamming"),
        DogLayer(rho=rho, taps=tuple(gaussian_taps(8.5, 65)), blend_mode="hamming"),
    ))


PRESETS = {"detail": detail_preset, "contrast": contrast_preset}


def separable_gaussian(p: np.ndarray, sigma: float | None = None,
                       taps=None) -> np.ndarray:
    """Blur by a normalized 1-D kernel applied along both axes, with
    edge-replicated borders."""
    if taps is None:
        taps = gaussian_taps(sigma)
    taps = np.asarray(taps, dtype=np.float64)
    out = correlate1d(np.asarray(p, dtype=np.float64), taps, axis=0, mode="nearest")
    return correlate1d(out, taps, axis=1, mode="nearest")


def dog_enhance(blur_fine: np.ndarray, blur_coarse: np.ndarray, rho: float) -> np.ndarray:
    """Band amplification between two blur levels: (1+rho)*fine - rho*coarse."""
    if blur_fine.shape != blur_coarse.shape:
        raise ValueError("dimension mismatch")
    return (1.0 + rho) * blur_fine - rho * blur_coarse


def sharpen(p: np.ndarray, cfg: DogConfig) -> np.ndarray:
    """Apply the blended DoG cascade; output clamped to [0, 255]."""
    p = np.asarray(p, dtype=np.float64)
    ct_input = None
    prev = p
    detail = np.zeros_like(p)
    for layer in cfg.layers:
        blurred = separable_gaussian(prev, taps=layer.tap_array())
        candidate = dog_enhance(prev, blurred, layer.rho / 100.0)
        if layer.blend_mode == "none":
            detail += candidate - prev
        else:
            if ct_input is None:
                ct_input = blending.census_transform(p, cfg.ct_threshold)
            if layer.blend_mode == "randomness":
                w = blending.randomness_map(ct_input)
            else:
                ct_cand = blending.census_transform(candidate, cfg.ct_threshold)
                w = blending.hamming_map(ct_input, ct_cand)
            detail += w * (candidate - prev)
        prev = blurred
    return np.clip(p + detail, 0.0, 255.0)
