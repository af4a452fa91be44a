"""The learned filter bank and its on-disk binary format.

Layout (all little-endian):
  magic "RAISRFLT" (8 bytes), version u32, then scale, filter_dim,
  angle_bins, strength_bins, coherence_bins, pixel_types as single bytes,
  reserved zero padding up to a 24-byte header, the strength and coherence
  thresholds as f64, and the filter taps as f64 (d*d per filter, row-major
  patch order; outer order angle, strength, coherence with pixel type
  fastest). Reload-after-save is bit-identical.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .hashkeys import Quantizer

MAGIC = b"RAISRFLT"
VERSION = 1
_HEADER_LEN = 24


@dataclass
class FilterBank:
    """Hash-indexed filters: one d*d tap vector per (bucket, pixel type)."""
    scale: int
    filter_dim: int
    quantizer: Quantizer
    # shape (angle_bins, strength_bins, coherence_bins, scale^2, d^2)
    filters: np.ndarray

    def __post_init__(self):
        q = self.quantizer
        expect = (q.angle_bins, q.strength_bins, q.coherence_bins,
                  self.scale ** 2, self.filter_dim ** 2)
        self.filters = np.ascontiguousarray(self.filters, dtype=np.float64)
        if self.filters.shape != expect:
            raise ValueError(f"filters shape {self.filters.shape}, expected {expect}")
        if not np.all(np.isfinite(self.filters)):
            raise ValueError("filter taps must be finite")

    @classmethod
    def delta(cls, scale: int, filter_dim: int, quantizer: Quantizer) -> "FilterBank":
        """Bank of passthrough filters (center tap 1, rest 0)."""
        q = quantizer
        filters = np.zeros((q.angle_bins, q.strength_bins, q.coherence_bins,
                            scale ** 2, filter_dim ** 2))
        filters[..., (filter_dim ** 2) // 2] = 1.0
        return cls(scale, filter_dim, quantizer, filters)

    def filter_for(self, angle: int, strength: int, coh: int, ptype: int) -> np.ndarray:
        return self.filters[angle, strength, coh, ptype]


class BankFormatError(ValueError):
    """Raised when a filter-bank file fails validation."""


def save_bank(bank: FilterBank, path) -> None:
    q = bank.quantizer
    header = struct.pack(
        "<8sI6B6x", MAGIC, VERSION, bank.scale, bank.filter_dim,
        q.angle_bins, q.strength_bins, q.coherence_bins, bank.scale ** 2)
    assert len(header) == _HEADER_LEN
    with open(path, "wb") as f:
        f.write(header)
        f.write(np.asarray(q.strength_thresholds, dtype="<f8").tobytes())
        f.write(np.asarray(q.coherence_thresholds, dtype="<f8").tobytes())
        f.write(bank.filters.astype("<f8", copy=False).tobytes())


def load_bank(path) -> FilterBank:
    with open(path, "rb") as f:
        blob = f.read()
    if len(blob) < _HEADER_LEN:
        raise BankFormatError(f"file too short for header: {len(blob)} bytes")
    magic, version, scale, d, abins, sbins, cbins, ptypes = struct.unpack_from(
        "<8sI6B", blob)
    if magic != MAGIC:
        raise BankFormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise BankFormatError(f"unsupported version {version}")
    if scale < 1 or d < 1 or d % 2 != 1:
        raise BankFormatError(f"invalid scale/filter_dim {scale}/{d}")
    if ptypes != scale ** 2:
        raise BankFormatError(f"pixel_types {ptypes} != scale^2 {scale ** 2}")
    if abins < 1 or sbins < 1 or cbins < 1:
        raise BankFormatError("bin counts must be >= 1")
    n_filters = abins * sbins * cbins * ptypes
    expect = _HEADER_LEN + 8 * (sbins - 1 + cbins - 1 + n_filters * d * d)
    if len(blob) != expect:
        raise BankFormatError(
            f"file length {len(blob)} does not match header-implied {expect}")
    off = _HEADER_LEN
    sth = np.frombuffer(blob, dtype="<f8", count=sbins - 1, offset=off)
    off += 8 * (sbins - 1)
    cth = np.frombuffer(blob, dtype="<f8", count=cbins - 1, offset=off)
    off += 8 * (cbins - 1)
    quantizer = Quantizer(abins, sbins, cbins, tuple(sth), tuple(cth))
    filters = np.frombuffer(blob, dtype="<f8", offset=off).reshape(
        abins, sbins, cbins, ptypes, d * d).copy()
    return FilterBank(scale, d, quantizer, filters)
