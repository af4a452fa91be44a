"""Shared oracle implementations, deliberately naive and independent of the
library's vectorized code paths."""

import numpy as np
import pytest


def reference_resample(p, out_w, out_h, kernel):
    """Per-pixel reference resampler: direct kernel sums, top-left aligned
    grid, edge replication, antialiasing on downscale."""

    def cubic(x):
        x = abs(x)
        a = -0.5
        if x <= 1.0:
            return (a + 2) * x ** 3 - (a + 3) * x ** 2 + 1
        if x < 2.0:
            return a * x ** 3 - 5 * a * x ** 2 + 8 * a * x - 4 * a
        return 0.0

    def linear(x):
        return max(0.0, 1.0 - abs(x))

    kernels = {"bilinear": (linear, 1.0), "bicubic": (cubic, 2.0)}

    def axis(values_len, n_out):
        scale = values_len / n_out
        if kernel == "nearest":
            rows = []
            for j in range(n_out):
                i = min(max(int(np.floor(j * scale + 0.5)), 0), values_len - 1)
                rows.append([(i, 1.0)])
            return rows
        kfunc, base = kernels[kernel]
        ks = max(scale, 1.0)
        support = base * ks
        rows = []
        for j in range(n_out):
            pos = j * scale
            left = int(np.ceil(pos - support))
            taps = []
            for i in range(left, left + int(np.floor(2 * support)) + 2):
                w = kfunc((i - pos) / ks)
                taps.append((min(max(i, 0), values_len - 1), w))
            total = sum(w for _, w in taps)
            rows.append([(i, w / total) for i, w in taps])
        return rows

    p = np.asarray(p, dtype=np.float64)
    h_taps = axis(p.shape[0], out_h)
    w_taps = axis(p.shape[1], out_w)
    mid = np.zeros((out_h, p.shape[1]))
    for r in range(out_h):
        for i, w in h_taps[r]:
            mid[r] += w * p[i]
    out = np.zeros((out_h, out_w))
    for c in range(out_w):
        for i, w in w_taps[c]:
            out[:, c] += w * mid[:, i]
    return out


def naive_ssim(a, b, window=11, sigma=1.5):
    """Straight-from-definition SSIM with explicit per-pixel windows."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    x = np.arange(window) - (window - 1) / 2
    taps = np.exp(-(x ** 2) / (2 * sigma ** 2))
    w = np.outer(taps, taps)
    w /= w.sum()
    half = window // 2
    pa = np.pad(a, half, mode="edge")
    pb = np.pad(b, half, mode="edge")
    c1 = (0.01 * 255.0) ** 2
    c2 = (0.03 * 255.0) ** 2
    vals = np.zeros(a.shape)
    for r in range(a.shape[0]):
        for c in range(a.shape[1]):
            wa = pa[r:r + window, c:c + window]
            wb = pb[r:r + window, c:c + window]
            mu_a = np.sum(w * wa)
            mu_b = np.sum(w * wb)
            va = np.sum(w * wa * wa) - mu_a ** 2
            vb = np.sum(w * wb * wb) - mu_b ** 2
            cov = np.sum(w * wa * wb) - mu_a * mu_b
            vals[r, c] = ((2 * mu_a * mu_b + c1) * (2 * cov + c2)
                          / ((mu_a ** 2 + mu_b ** 2 + c1) * (va + vb + c2)))
    return float(vals.mean())


@pytest.fixture
def rng():
    return np.random.default_rng(0)
