"""Per-pixel gradient statistics and their quantization into hash keys.

The local geometry of a pixel is summarized by the 2x2 gradient structure
tensor, accumulated over a Gaussian-weighted window. Its closed-form
eigen-decomposition yields an orientation angle in [0, 180) degrees, a
strength (sqrt of the dominant eigenvalue) and a coherence in [0, 1];
quantizing the triple gives the filter-bank bucket of the pixel.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.ndimage import correlate1d

from .image_ops import _gauss_taps


class StructureTensor(NamedTuple):
    """Entries of the symmetric 2x2 tensor [[a, b], [b, c]]."""
    a: float
    b: float
    c: float


class EigenPair(NamedTuple):
    lam1: float  # largest eigenvalue
    lam2: float  # smallest eigenvalue
    theta: float  # dominant orientation, degrees in [0, 180)


class GradientKey(NamedTuple):
    angle_bin: int
    strength_bin: int
    coherence_bin: int


@dataclass(frozen=True)
class Quantizer:
    """Bin layout for (angle, strength, coherence) hashing.

    Strength thresholds apply to sqrt(lam1) in intensity units on the
    [0, 255] scale; coherence thresholds apply to the [0, 1] coherence.
    angle_bins must be divisible by 4 so the bucket boundaries are closed
    under the 8 dihedral patch transforms.
    """
    angle_bins: int = 24
    strength_bins: int = 3
    coherence_bins: int = 3
    strength_thresholds: tuple = (8.0, 32.0)
    coherence_thresholds: tuple = (0.25, 0.5)

    def __post_init__(self):
        # angle_bins == 1 is the degenerate "global filter" mode; otherwise
        # divisibility by 4 keeps bucket boundaries closed under the dihedral
        # transforms used by symmetry augmentation.
        if self.angle_bins != 1 and self.angle_bins % 4 != 0:
            raise ValueError("angle_bins must be 1 or divisible by 4")
        for name, th, bins in (
            ("strength", self.strength_thresholds, self.strength_bins),
            ("coherence", self.coherence_thresholds, self.coherence_bins),
        ):
            th = tuple(float(v) for v in th)
            object.__setattr__(self, f"{name}_thresholds", th)
            if len(th) != bins - 1:
                raise ValueError(f"need {bins - 1} {name} thresholds, got {len(th)}")
            if any(th[i] >= th[i + 1] for i in range(len(th) - 1)):
                raise ValueError(f"{name} thresholds must be strictly ascending")

    @property
    def n_keys(self) -> int:
        return self.angle_bins * self.strength_bins * self.coherence_bins


def compute_gradients(p: np.ndarray):
    """Central-difference gradients (gx along columns, gy along rows) with
    edge-replicated borders."""
    p = np.asarray(p)
    if p.ndim != 2 or p.shape[0] < 3 or p.shape[1] < 3:
        raise ValueError(f"plane must be at least 3x3, got shape {p.shape}")
    padded = np.pad(p, 1, mode="edge")
    gx = (padded[1:-1, 2:] - padded[1:-1, :-2]) * 0.5
    gy = (padded[2:, 1:-1] - padded[:-2, 1:-1]) * 0.5
    return gx, gy


def window_sigma(window: int) -> float:
    """Default Gaussian sigma placing +-2 sigma at the window edge."""
    return (window - 1) / 4.0


def structure_tensor_field(gx: np.ndarray, gy: np.ndarray, window: int = 9,
                           sigma: float | None = None):
    """Gaussian-weighted second-moment sums at every pixel.

    Returns (a, b, c) planes with a = sum w*gx^2, b = sum w*gx*gy,
    c = sum w*gy^2 over the window around each pixel (edge replication).
    """
    if window % 2 != 1:
        raise ValueError("window must be odd")
    taps = _gauss_taps(window, window_sigma(window) if sigma is None else sigma)
    taps = taps.astype(gx.dtype, copy=False)

    def smooth(q):
        return correlate1d(correlate1d(q, taps, axis=0, mode="nearest"),
                           taps, axis=1, mode="nearest")

    return smooth(gx * gx), smooth(gx * gy), smooth(gy * gy)


def structure_tensor(gx: np.ndarray, gy: np.ndarray, k, window: int = 9,
                     sigma: float | None = None) -> StructureTensor:
    """Structure tensor at a single pixel k = (row, col)."""
    if window % 2 != 1:
        raise ValueError("window must be odd")
    half = window // 2
    r, c = k
    pgx = np.pad(gx, half, mode="edge")[r:r + window, c:c + window]
    pgy = np.pad(gy, half, mode="edge")[r:r + window, c:c + window]
    taps = _gauss_taps(window, window_sigma(window) if sigma is None else sigma)
    w = np.outer(taps, taps)
    return StructureTensor(float(np.sum(w * pgx * pgx)),
                           float(np.sum(w * pgx * pgy)),
                           float(np.sum(w * pgy * pgy)))


def eigen2x2(a, b, c) -> EigenPair:
    """Closed-form eigen-decomposition of [[a, b], [b, c]].

    Accepts scalars or arrays. Tiny negative eigenvalues from round-off are
    clamped to 0; the isotropic case maps to theta = 0.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    c = np.asarray(c)
    half_tr = (a + c) * 0.5
    disc = np.sqrt(((a - c) * 0.5) ** 2 + b * b)
    lam1 = np.maximum(half_tr + disc, 0.0)
    lam2 = np.maximum(half_tr - disc, 0.0)
    theta = np.degrees(0.5 * np.arctan2(2.0 * b, a - c)) % 180.0
    # the modulo of a tiny negative angle can round up to exactly 180.0
    theta = np.where(theta >= 180.0, 0.0, theta)
    if lam1.ndim == 0:
        return EigenPair(float(lam1), float(lam2), float(theta))
    return EigenPair(lam1, lam2, theta)


def coherence(lam1, lam2):
    """(sqrt(lam1) - sqrt(lam2)) / (sqrt(lam1) + sqrt(lam2)); 0 when both
    eigenvalues vanish."""
    s1 = np.sqrt(np.asarray(lam1))
    s2 = np.sqrt(np.asarray(lam2))
    den = s1 + s2
    mu = np.divide(s1 - s2, den, out=np.zeros_like(den), where=den > 0)
    return float(mu) if mu.ndim == 0 else mu


def quantize(theta, strength, mu, q: Quantizer):
    """Map (angle degrees, sqrt-eigenvalue strength, coherence) to bins."""
    theta = np.asarray(theta)
    bin_width = 180.0 / q.angle_bins
    angle = np.clip(np.floor(theta / bin_width).astype(np.int64), 0, q.angle_bins - 1)
    sbin = np.searchsorted(np.asarray(q.strength_thresholds),
                           np.asarray(strength, dtype=np.float64), side="left")
    cbin = np.searchsorted(np.asarray(q.coherence_thresholds),
                           np.asarray(mu, dtype=np.float64), side="left")
    return angle, sbin, cbin


def hash_key(e: EigenPair, q: Quantizer) -> GradientKey:
    """Quantize a single pixel's eigen statistics into its bucket key."""
    angle, sbin, cbin = quantize(e.theta, np.sqrt(e.lam1), coherence(e.lam1, e.lam2), q)
    return GradientKey(int(angle), int(sbin), int(cbin))


def key_maps(p: np.ndarray, q: Quantizer, window: int = 9,
             sigma: float | None = None):
    """Bucket maps for a whole plane: (angle, strength, coherence) int arrays
    with the plane's shape."""
    gx, gy = compute_gradients(p)
    a, b, c = structure_tensor_field(gx, gy, window, sigma)
    lam1, lam2, theta = eigen2x2(a, b, c)
    mu = coherence(lam1, lam2)
    angle, sbin, cbin = quantize(theta, np.sqrt(lam1), mu, q)
    return angle, sbin.reshape(p.shape), cbin.reshape(p.shape)
