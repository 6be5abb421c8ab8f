"""Minimal binary PGM (P5, maxval 255) reader/writer for inspection images."""

from __future__ import annotations

import os

import numpy as np


def write_pgm(path: str | os.PathLike, img: np.ndarray) -> None:
    """Write a 2-D uint8 array as binary PGM (P5)."""
    img = np.asarray(img)
    if img.ndim != 2:
        raise ValueError("PGM output needs a 2-D array")
    if img.dtype != np.uint8:
        raise ValueError("PGM output needs uint8 data")
    with open(os.fspath(path), "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (img.shape[1], img.shape[0]))
        fh.write(img.tobytes())


def read_pgm(path: str | os.PathLike) -> np.ndarray:
    """Read a binary PGM (P5, maxval <= 255) into a uint8 array."""
    with open(os.fspath(path), "rb") as fh:
        data = fh.read()
    if not data.startswith(b"P5"):
        raise ValueError(f"{path}: not a binary PGM (P5) file")
    # Header: magic, width, height, maxval, separated by whitespace/comments.
    fields: list[bytes] = []
    pos = 2
    while len(fields) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ValueError(f"{path}: truncated PGM header")
        fields.append(data[start:pos])
    pos += 1  # single whitespace after maxval
    width, height, maxval = (int(f) for f in fields)
    if maxval > 255:
        raise ValueError(f"{path}: 16-bit PGM not supported")
    n = width * height
    body = data[pos : pos + n]
    if len(body) != n:
        raise ValueError(f"{path}: expected {n} pixel bytes, found {len(body)}")
    return np.frombuffer(body, dtype=np.uint8).reshape(height, width).copy()


def to_pgm_scaled(arr: np.ndarray) -> np.ndarray:
    """Normalize a float array to uint8 [0, 255] for inspection output."""
    arr = np.asarray(arr, dtype=np.float64)
    lo = float(arr.min()) if arr.size else 0.0
    hi = float(arr.max()) if arr.size else 0.0
    if hi <= lo:
        return np.zeros(arr.shape, dtype=np.uint8)
    return np.round((arr - lo) / (hi - lo) * 255.0).astype(np.uint8)
