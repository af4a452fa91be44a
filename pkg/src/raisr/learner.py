"""Filter learning: sample extraction, normal-equation accumulation,
dihedral symmetry augmentation and the conjugate-gradient solve.

Instead of storing patch matrices, training accumulates per-bucket
sufficient statistics Q = A^T A and V = A^T b, so peak memory depends only
on the bucket layout and filter size, never on the corpus. Banks form a
commutative monoid under merge, which is what makes sharded training
deterministic: each image yields its own partial bank and partials are
merged in image order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .filterbank import FilterBank
from .hashkeys import GradientKey, Quantizer, key_maps

UNDERPOPULATED_FACTOR = 10       # count < 10 * d^2 triggers heavy ridge
UNDERPOPULATED_RIDGE = 1e-2


class TrainingSample(NamedTuple):
    patch: np.ndarray  # d^2 values, row-major around the sample pixel
    target: float      # ground-truth HR pixel value
    key: GradientKey
    ptype: int


def pixel_type(row: int, col: int, s: int) -> int:
    """Phase class of an HR-grid pixel: (row mod s) * s + (col mod s)."""
    return (row % s) * s + (col % s)


@dataclass
class AccumulatorBank:
    """Per-(bucket, pixel-type) normal equations Q, V and sample counts."""
    scale: int
    filter_dim: int
    quantizer: Quantizer
    Q: np.ndarray = None       # (A, S, C, T, d^2, d^2)
    V: np.ndarray = None       # (A, S, C, T, d^2)
    counts: np.ndarray = None  # (A, S, C, T)

    def __post_init__(self):
        q = self.quantizer
        shape = (q.angle_bins, q.strength_bins, q.coherence_bins, self.scale ** 2)
        d2 = self.filter_dim ** 2
        if self.Q is None:
            self.Q = np.zeros(shape + (d2, d2))
            self.V = np.zeros(shape + (d2,))
            self.counts = np.zeros(shape, dtype=np.int64)
        if self.Q.shape != shape + (d2, d2):
            raise ValueError(f"Q shape {self.Q.shape} inconsistent with config")

    def config_matches(self, other: "AccumulatorBank") -> bool:
        return (self.scale == other.scale and self.filter_dim == other.filter_dim
                and self.quantizer == other.quantizer)

    @property
    def footprint_bytes(self) -> int:
        return self.Q.nbytes + self.V.nbytes + self.counts.nbytes


def sample_grid(shape, d: int, stride: int = 1):
    """Interior grid coordinates at distance >= d//2 from every border."""
    margin = d // 2
    h, w = shape
    rows = np.arange(margin, h - margin, stride)
    cols = np.arange(margin, w - margin, stride)
    return rows, cols


def extract_samples(y: np.ndarray, x: np.ndarray, q: Quantizer, d: int, s: int,
                    stride: int = 1, window: int = 9) -> Iterator[TrainingSample]:
    """One training sample per interior grid pixel of the interpolated image
    y, with target taken from the ground-truth plane x."""
    if y.shape != x.shape:
        raise ValueError(f"dimension mismatch: {y.shape} vs {x.shape}")
    abins, sbins, cbins = key_maps(y, q, window)
    rows, cols = sample_grid(y.shape, d, stride)
    half = d // 2
    for r in rows:
        for c in cols:
            patch = y[r - half:r + half + 1, c - half:c + half + 1].reshape(-1)
            key = GradientKey(int(abins[r, c]), int(sbins[r, c]), int(cbins[r, c]))
            yield TrainingSample(patch.copy(), float(x[r, c]), key, pixel_type(r, c, s))


def accumulate(bank: AccumulatorBank, sample: TrainingSample) -> None:
    """Rank-1 update of the sample's bucket."""
    p = np.asarray(sample.patch, dtype=np.float64)
    if p.size != bank.filter_dim ** 2:
        raise ValueError(f"patch size {p.size} != d^2 = {bank.filter_dim ** 2}")
    j = sample.key + (sample.ptype,)
    bank.Q[j] += np.outer(p, p)
    bank.V[j] += p * sample.target
    bank.counts[j] += 1


def accumulate_image(bank: AccumulatorBank, y: np.ndarray, x: np.ndarray,
                     stride: int = 1, window: int = 9,
                     chunk_rows: int = 64) -> None:
    """Vectorized accumulation of every grid sample of one image pair.

    Patches are materialized in row chunks and reduced per bucket with a
    single matrix product each, keeping memory bounded for large images.
    Equivalent to looping accumulate() over extract_samples() output.
    """
    if y.shape != x.shape:
        raise ValueError(f"dimension mismatch: {y.shape} vs {x.shape}")
    d = bank.filter_dim
    s = bank.scale
    q = bank.quantizer
    abins, sbins, cbins = key_maps(y, q, window)
    rows, cols = sample_grid(y.shape, d, stride)
    if rows.size == 0 or cols.size == 0:
        return
    half = d // 2
    view = sliding_window_view(y, (d, d))  # indexed by top-left corner
    tgrid = (np.arange(y.shape[0]) % s)[:, None] * s + (np.arange(y.shape[1]) % s)[None, :]
    sc, cc, tpt = q.strength_bins, q.coherence_bins, s * s
    flat_ids = ((abins * sc + sbins) * cc + cbins) * tpt + tgrid

    d2 = d * d
    qflat = bank.Q.reshape(-1, d2, d2)
    vflat = bank.V.reshape(-1, d2)
    nflat = bank.counts.reshape(-1)
    for start in range(0, rows.size, chunk_rows):
        rblock = rows[start:start + chunk_rows]
        patches = view[np.ix_(rblock - half, cols - half)].reshape(-1, d2)
        ids = flat_ids[np.ix_(rblock, cols)].reshape(-1)
        targets = x[np.ix_(rblock, cols)].reshape(-1)
        order = np.argsort(ids, kind="stable")
        ids_sorted = ids[order]
        bounds = np.flatnonzero(np.diff(ids_sorted)) + 1
        starts = np.concatenate(([0], bounds))
        ends = np.concatenate((bounds, [ids_sorted.size]))
        for b0, b1 in zip(starts, ends):
            sel = order[b0:b1]
            bucket = ids_sorted[b0]
            a = patches[sel]
            qflat[bucket] += a.T @ a
            vflat[bucket] += a.T @ targets[sel]
            nflat[bucket] += b1 - b0


def merge(b1: AccumulatorBank, b2: AccumulatorBank) -> AccumulatorBank:
    """Entrywise sum of two banks with identical configuration."""
    if not b1.config_matches(b2):
        raise ValueError("cannot merge banks with different configurations")
    return AccumulatorBank(b1.scale, b1.filter_dim, b1.quantizer,
                           Q=b1.Q + b2.Q, V=b1.V + b2.V,
                           counts=b1.counts + b2.counts)


def merge_into(bank: AccumulatorBank, delta: "AccumulatorBank") -> None:
    """In-place merge, used when reducing per-image partial banks."""
    if not bank.config_matches(delta):
        raise ValueError("cannot merge banks with different configurations")
    bank.Q += delta.Q
    bank.V += delta.V
    bank.counts += delta.counts


# ---------------------------------------------------------------------------
# Dihedral symmetry augmentation

def _dihedral_ops():
    """The 8 transforms as array ops (transpose, vertical/horizontal flip)."""
    ops = []
    for transpose in (False, True):
        for flip_v in (False, True):
            for flip_h in (False, True):
                def op(arr, t=transpose, fv=flip_v, fh=flip_h):
                    if t:
                        arr = arr.T
                    if fv:
                        arr = arr[::-1]
                    if fh:
                        arr = arr[:, ::-1]
                    return arr
                ops.append(op)
    return ops


def _patch_permutation(op, d: int) -> np.ndarray:
    """perm with op(patch).ravel() == patch.ravel()[perm]."""
    return op(np.arange(d * d).reshape(d, d)).ravel()


def _type_map(op, s: int) -> np.ndarray:
    """tmap[old_type] = type of the pixel's new position under op (valid for
    planes whose dimensions are multiples of s)."""
    moved = op(np.arange(s * s).reshape(s, s)).ravel()
    tmap = np.empty(s * s, dtype=np.int64)
    tmap[moved] = np.arange(s * s)
    return tmap


def _angle_map(op, angle_bins: int) -> np.ndarray:
    """amap[old_bin] = angle bin of the transformed gradient orientation.

    Evaluated numerically at bin centers: embed each orientation as a small
    ramp image, transform it, re-measure the gradient angle. Exact when
    angle_bins is divisible by 4, since bin centers then map to bin centers.
    """
    width = 180.0 / angle_bins
    amap = np.empty(angle_bins, dtype=np.int64)
    rr, cc = np.meshgrid(np.arange(8.0), np.arange(8.0), indexing="ij")
    for i in range(angle_bins):
        theta = np.radians((i + 0.5) * width)
        ramp = np.cos(theta) * cc + np.sin(theta) * rr
        moved = op(ramp)
        gx = (moved[3, 4] - moved[3, 2]) * 0.5
        gy = (moved[4, 3] - moved[2, 3]) * 0.5
        new_theta = np.degrees(np.arctan2(gy, gx)) % 180.0
        amap[i] = min(int(new_theta / width), angle_bins - 1)
    return amap


def augment_symmetry(bank: AccumulatorBank) -> AccumulatorBank:
    """Sum the bank with its images under all 8 dihedral patch transforms.

    Equivalent to having accumulated every sample's 8 flipped/rotated
    variants: patches permute, angle bins and pixel types remap, strength
    and coherence bins are invariant.
    """
    q = bank.quantizer
    if q.angle_bins % 4 != 0:
        raise ValueError("symmetry augmentation needs angle_bins divisible by 4")
    d = bank.filter_dim
    s = bank.scale
    out = AccumulatorBank(s, d, q)
    for op in _dihedral_ops():
        perm = _patch_permutation(op, d)
        amap = _angle_map(op, q.angle_bins)
        tmap = _type_map(op, s)
        qperm = bank.Q[..., perm, :][..., :, perm]
        vperm = bank.V[..., perm]
        for a in range(q.angle_bins):
            for t in range(s * s):
                out.Q[amap[a], :, :, tmap[t]] += qperm[a, :, :, t]
                out.V[amap[a], :, :, tmap[t]] += vperm[a, :, :, t]
                out.counts[amap[a], :, :, tmap[t]] += bank.counts[a, :, :, t]
    return out


# ---------------------------------------------------------------------------
# Solving

class CGResult(NamedTuple):
    x: np.ndarray
    converged: bool
    iterations: int
    residual: float  # relative to ||v||


def cg_solve(Q: np.ndarray, v: np.ndarray, tol: float = 1e-10,
             max_iter: int | None = None) -> CGResult:
    """Conjugate gradients for symmetric PSD Q. Returns the first iterate
    with relative residual <= tol, or the best iterate at max_iter."""
    v = np.asarray(v, dtype=np.float64)
    n = v.size
    if max_iter is None:
        max_iter = 4 * n
    vnorm = np.linalg.norm(v)
    if vnorm == 0.0:
        return CGResult(np.zeros(n), True, 0, 0.0)
    x = np.zeros(n)
    r = v.copy()
    p = r.copy()
    rs = r @ r
    best_x, best_res = x.copy(), np.sqrt(rs) / vnorm
    for it in range(1, max_iter + 1):
        qp = Q @ p
        denom = p @ qp
        if not np.isfinite(denom):
            raise FloatingPointError("CG iterate diverged (non-finite values)")
        if denom <= 0.0:
            break  # numerical loss of positive-definiteness
        alpha = rs / denom
        x = x + alpha * p
        r = r - alpha * qp
        rs_new = r @ r
        if not np.isfinite(rs_new):
            raise FloatingPointError("CG iterate diverged (non-finite values)")
        res = np.sqrt(rs_new) / vnorm
        if res < best_res:
            best_x, best_res = x.copy(), res
        if res <= tol:
            return CGResult(x, True, it, res)
        p = r + (rs_new / rs) * p
        rs = rs_new
    return CGResult(best_x, best_res <= tol, max_iter, best_res)


@dataclass
class BucketReport:
    key: tuple   # (angle_bin, strength_bin, coherence_bin, pixel_type)
    count: int
    residual: float
    ridge: float
    flagged: bool


def solve_filters(bank: AccumulatorBank, ridge: float = 1e-4,
                  tol: float = 1e-10, max_iter: int | None = None):
    """Solve every bucket's normal equations; returns (FilterBank, reports).

    Empty buckets get the passthrough delta filter. The ridge is relative:
    the actual Tikhonov term is ridge * max(diag Q) * I. Under-populated
    buckets (count < 10 d^2) are solved with the ridge raised to 1e-2.
    """
    q = bank.quantizer
    d = bank.filter_dim
    d2 = d * d
    filters = np.zeros(bank.Q.shape[:4] + (d2,))
    reports = []
    delta = np.zeros(d2)
    delta[d2 // 2] = 1.0
    floor = UNDERPOPULATED_FACTOR * d2
    for idx in np.ndindex(*bank.Q.shape[:4]):
        count = int(bank.counts[idx])
        if count == 0:
            filters[idx] = delta
            continue
        eff_ridge = ridge if count >= floor else max(ridge, UNDERPOPULATED_RIDGE)
        Qb = bank.Q[idx]
        Vb = bank.V[idx]
        if eff_ridge > 0.0:
            tau = float(Qb.diagonal().max())
            Qb = Qb + (eff_ridge * tau) * np.eye(d2)
        result = cg_solve(Qb, Vb, tol=tol, max_iter=max_iter)
        filters[idx] = result.x
        reports.append(BucketReport(idx, count, result.residual, eff_ridge,
                                    not result.converged))
    fb = FilterBank(bank.scale, d, q, filters)
    return fb, reports
