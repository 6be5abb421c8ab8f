"""Occupancy-image and cloud-file interop with the estimator package.

Implements the same file formats (PGM P5 occupancy, xyz_csv, kitti_bin) and
the same rasterization math (pixel = floor(x/res) + S/2, content clipped to
the inscribed circle); pixel-exact parity with the `radonyaw bev` output is
covered by tests.
"""

from __future__ import annotations

import os

import numpy as np


def read_pgm(path: str | os.PathLike) -> np.ndarray:
    with open(os.fspath(path), "rb") as fh:
        data = fh.read()
    if not data.startswith(b"P5"):
        raise ValueError(f"{path}: not a binary PGM (P5)")
    fields: list[bytes] = []
    pos = 2
    while len(fields) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        fields.append(data[start:pos])
    pos += 1
    width, height, maxval = (int(f) for f in fields)
    if maxval > 255:
        raise ValueError(f"{path}: 16-bit PGM not supported")
    body = data[pos : pos + width * height]
    if len(body) != width * height:
        raise ValueError(f"{path}: truncated PGM payload")
    return np.frombuffer(body, dtype=np.uint8).reshape(height, width).copy()


def read_bev(path: str | os.PathLike) -> np.ndarray:
    """Binary occupancy from a PGM: any nonzero pixel counts as occupied."""
    raw = read_pgm(path)
    if raw.shape[0] != raw.shape[1]:
        raise ValueError(f"{path}: BEV must be square, got {raw.shape}")
    return (raw > 0).astype(np.float32)


def write_pgm(path: str | os.PathLike, occupancy: np.ndarray) -> None:
    img = (np.asarray(occupancy) > 0).astype(np.uint8) * 255
    with open(os.fspath(path), "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (img.shape[1], img.shape[0]))
        fh.write(img.tobytes())


def load_cloud(path: str | os.PathLike) -> np.ndarray:
    """(N, 3) float32 xyz from xyz_csv or kitti_bin (by extension)."""
    path = os.fspath(path)
    if path.endswith(".bin"):
        raw = np.fromfile(path, dtype="<f4")
        if raw.size % 4 != 0:
            raise ValueError(f"{path}: truncated kitti_bin stream")
        return raw.reshape(-1, 4)[:, :3].copy()
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            try:
                vals = [float(p) for p in parts]
            except ValueError:
                continue  # header
            rows.append(vals[:3])
    return np.asarray(rows, dtype=np.float32).reshape(-1, 3)


def save_cloud_csv(path: str | os.PathLike, xyz: np.ndarray) -> None:
    with open(os.fspath(path), "w", encoding="utf-8") as fh:
        fh.write("x,y,z\n")
        for x, y, z in np.asarray(xyz, dtype=np.float64):
            fh.write(f"{float(x)!r},{float(y)!r},{float(z)!r}\n")


def rasterize(xyz: np.ndarray, size_px: int, meters_per_px: float) -> np.ndarray:
    """Binary occupancy image with the estimator's pixel model."""
    grid = np.zeros((size_px, size_px), dtype=np.float32)
    if len(xyz) == 0:
        return grid
    x = np.asarray(xyz, dtype=np.float64)[:, 0]
    y = np.asarray(xyz, dtype=np.float64)[:, 1]
    radius = 0.5 * size_px * meters_per_px
    keep = x * x + y * y < radius * radius
    ix = np.floor(x[keep] / meters_per_px).astype(np.int64) + size_px // 2
    iy = np.floor(y[keep] / meters_per_px).astype(np.int64) + size_px // 2
    ok = (ix >= 0) & (ix < size_px) & (iy >= 0) & (iy < size_px)
    grid[ix[ok], iy[ok]] = 1.0
    return grid


def rotate_translate(xyz: np.ndarray, yaw_deg: float, t_xy=(0.0, 0.0)) -> np.ndarray:
    """p' = R(yaw) p + t about the gravity axis (matches the estimator)."""
    a = np.deg2rad(yaw_deg)
    c, s = np.cos(a), np.sin(a)
    out = np.array(xyz, dtype=np.float32, copy=True)
    x = xyz[:, 0].astype(np.float64)
    y = xyz[:, 1].astype(np.float64)
    out[:, 0] = c * x - s * y + t_xy[0]
    out[:, 1] = s * x + c * y + t_xy[1]
    return out
