"""Census-transform descriptors and the blend maps built from them.

Each pixel gets an 8-bit descriptor of sign comparisons against its 3x3
neighbors. Two blend-map constructions are provided: a "randomness" map
driven by the size of the least connected component of the descriptor's
circular bit ring (structure detection), and a Hamming map driven by how
many descriptor bits the filtering step changed (structure preservation).
"""

from __future__ import annotations

import numpy as np
from scipy.ndimage import uniform_filter

# Neighbor letters of the 3x3 window, column-major around center e:
#   a d g
#   b e h
#   c f i
# Descriptor bit order is (a, b, c, d, f, g, h, i), a in the MSB.
_BIT_OFFSETS = (
    ("a", -1, -1), ("b", 0, -1), ("c", 1, -1), ("d", -1, 0),
    ("f", 1, 0), ("g", -1, 1), ("h", 0, 1), ("i", 1, 1),
)
# Spatial walk around the center, used for connected-component runs.
_RING_LETTERS = ("a", "d", "g", "h", "i", "f", "c", "b")
_BIT_INDEX = {name: 7 - i for i, (name, _, _) in enumerate(_BIT_OFFSETS)}


def census_transform(p: np.ndarray, threshold: float = 4.0) -> np.ndarray:
    """8-bit census descriptor per pixel: bit set iff the center exceeds the
    neighbor by more than `threshold`. Borders use edge replication."""
    p = np.asarray(p)
    if p.ndim != 2 or p.shape[0] < 3 or p.shape[1] < 3:
        raise ValueError(f"plane must be at least 3x3, got shape {p.shape}")
    padded = np.pad(p, 1, mode="edge")
    h, w = p.shape
    out = np.zeros((h, w), dtype=np.uint8)
    for name, dr, dc in _BIT_OFFSETS:
        neighbor = padded[1 + dr:1 + dr + h, 1 + dc:1 + dc + w]
        out |= (p > neighbor + threshold).astype(np.uint8) << _BIT_INDEX[name]
    return out


def _ring_bits(descriptor: int):
    return [(descriptor >> _BIT_INDEX[name]) & 1 for name in _RING_LETTERS]


def _lcc_of(descriptor: int) -> int:
    bits = _ring_bits(descriptor)
    if len(set(bits)) == 1:
        return 8
    # Rotate so the ring starts at a run boundary, then take the min run.
    start = next(i for i in range(8) if bits[i] != bits[i - 1])
    bits = bits[start:] + bits[:start]
    runs, run = [], 1
    for i in range(1, 8):
        if bits[i] == bits[i - 1]:
            run += 1
        else:
            runs.append(run)
            run = 1
    runs.append(run)
    return min(runs)


_LCC_TABLE = np.array([_lcc_of(d) for d in range(256)], dtype=np.uint8)


def lcc_size(descriptor: int) -> int:
    """Size of the least connected component of the descriptor's circular
    neighbor ring; 8 for a uniform descriptor."""
    return int(_LCC_TABLE[descriptor])


def randomness_map(ct: np.ndarray, low: float = 1.0, high: float = 7.0) -> np.ndarray:
    """Blend weights from LCC size: 0 at lcc <= low (random texture, keep the
    initial interpolation), 1 at lcc >= high (strong structure, take the
    filtered image), linear in between."""
    lcc = _LCC_TABLE[ct].astype(np.float64)
    return np.clip((lcc - low) / (high - low), 0.0, 1.0)


def hamming_map(ct_initial: np.ndarray, ct_filtered: np.ndarray) -> np.ndarray:
    """Blend weights from descriptor Hamming distance: 1 where filtering left
    the structure untouched, 0 where all 8 bits changed."""
    if ct_initial.shape != ct_filtered.shape:
        raise ValueError(f"dimension mismatch: {ct_initial.shape} vs {ct_filtered.shape}")
    hd = np.bitwise_count(ct_initial ^ ct_filtered).astype(np.float64)
    return 1.0 - hd / 8.0


def smooth_map(w: np.ndarray) -> np.ndarray:
    """Optional 3x3 box smoothing of a blend map."""
    return uniform_filter(w, size=3, mode="nearest")


def blend(initial: np.ndarray, filtered: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Pixel-wise convex combination: w goes to the filtered image."""
    if initial.shape != filtered.shape or initial.shape != w.shape:
        raise ValueError("blend inputs must share dimensions")
    return initial + w * (filtered - initial)
