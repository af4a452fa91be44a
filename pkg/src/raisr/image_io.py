"""Image file I/O: PNG and JPEG via Pillow, binary PPM/PGM (P5/P6) natively.

Images are returned as float64 arrays in [0, 255]: (H, W) for grayscale,
(H, W, 3) for color. Writing clamps and rounds to 8 bits.
"""

from __future__ import annotations

import os

import numpy as np
from PIL import Image

from .image_ops import to_uint8

_PNM_EXTS = {".ppm", ".pgm", ".pnm"}
SUPPORTED_EXTS = {".png", ".jpg", ".jpeg"} | _PNM_EXTS


def read_image(path) -> np.ndarray:
    """Read an image file as float64 in [0, 255]."""
    ext = os.path.splitext(str(path))[1].lower()
    if ext in _PNM_EXTS:
        return read_pnm(path)
    with Image.open(path) as im:
        if im.mode in ("L", "I;16", "I"):
            return np.asarray(im.convert("L"), dtype=np.float64)
        return np.asarray(im.convert("RGB"), dtype=np.float64)


def write_image(path, arr: np.ndarray, quality: int | None = None) -> None:
    """Write an (H, W) or (H, W, 3) array; the format follows the extension."""
    ext = os.path.splitext(str(path))[1].lower()
    if ext not in SUPPORTED_EXTS:
        raise ValueError(f"unsupported image extension {ext!r}")
    data = to_uint8(np.asarray(arr))
    if data.ndim not in (2, 3) or (data.ndim == 3 and data.shape[2] != 3):
        raise ValueError(f"expected (H, W) or (H, W, 3) image, got {data.shape}")
    if ext in _PNM_EXTS:
        write_pnm(path, data)
        return
    im = Image.fromarray(data, mode="L" if data.ndim == 2 else "RGB")
    if ext in (".jpg", ".jpeg") and quality is not None:
        im.save(path, quality=int(quality))
    else:
        im.save(path)


def read_pnm(path) -> np.ndarray:
    """Read a binary PGM (P5) or PPM (P6) file."""
    with open(path, "rb") as f:
        blob = f.read()
    magic = blob[:2]
    if magic not in (b"P5", b"P6"):
        raise ValueError(f"not a binary PGM/PPM file (magic {magic!r})")
    # Header tokens: magic, width, height, maxval; '#' starts a comment.
    tokens = []
    pos = 2
    while len(tokens) < 3:
        while pos < len(blob) and blob[pos:pos + 1].isspace():
            pos += 1
        if blob[pos:pos + 1] == b"#":
            pos = blob.index(b"\n", pos) + 1
            continue
        start = pos
        while pos < len(blob) and not blob[pos:pos + 1].isspace():
            pos += 1
        tokens.append(int(blob[start:pos]))
    pos += 1  # single whitespace after maxval
    width, height, maxval = tokens
    if maxval != 255:
        raise ValueError(f"only 8-bit PNM supported, maxval {maxval}")
    channels = 1 if magic == b"P5" else 3
    count = width * height * channels
    data = np.frombuffer(blob, dtype=np.uint8, count=count, offset=pos)
    arr = data.reshape((height, width) if channels == 1 else (height, width, 3))
    return arr.astype(np.float64)


def write_pnm(path, data: np.ndarray) -> None:
    """Write uint8 data as binary PGM (2-D) or PPM (3-D)."""
    data = np.ascontiguousarray(data, dtype=np.uint8)
    magic = b"P5" if data.ndim == 2 else b"P6"
    h, w = data.shape[:2]
    with open(path, "wb") as f:
        f.write(magic + b"\n%d %d\n255\n" % (w, h))
        f.write(data.tobytes())
