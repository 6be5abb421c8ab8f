"""Binary occupancy bird's-eye-view rasterization and synthetic transforms."""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from . import pgm
from .cloud import PointCloud


@dataclass(frozen=True)
class GridSpec:
    """Square BEV grid: ``size_px`` pixels per side at ``meters_per_px``.

    The metric coordinate ``center`` maps to pixel index (S/2, S/2); pixel
    (ix, iy) then covers the half-open metric square
    [(ix - S/2) * res, (ix - S/2 + 1) * res) x (same for iy), so the grid of
    pixel *centers* is symmetric about ``center`` and the continuous index
    (S-1)/2 coincides with it. Content is clipped to the inscribed circle of
    radius (S/2) * res so every Radon scanning line fully covers the support.
    """

    size_px: int = 400
    meters_per_px: float = 0.5
    center: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.size_px < 16 or self.size_px % 2 != 0:
            raise ValueError(f"size_px must be even and >= 16, got {self.size_px}")
        if not self.meters_per_px > 0:
            raise ValueError(f"meters_per_px must be > 0, got {self.meters_per_px}")

    @property
    def radius_m(self) -> float:
        return 0.5 * self.size_px * self.meters_per_px

    @property
    def center_index(self) -> float:
        """Continuous array index of the metric center (rotation center)."""
        return 0.5 * (self.size_px - 1)


@dataclass
class BevImage:
    """S x S binary occupancy grid; axis 0 indexes x, axis 1 indexes y."""

    grid: np.ndarray
    spec: GridSpec

    def __post_init__(self):
        self.grid = np.ascontiguousarray(self.grid, dtype=np.uint8)
        s = self.spec.size_px
        if self.grid.shape != (s, s):
            raise ValueError(f"grid shape {self.grid.shape} != spec size {(s, s)}")
        if self.grid.max(initial=0) > 1:
            raise ValueError("BEV grid must be strictly binary")

    @property
    def occupancy(self) -> int:
        return int(self.grid.sum())

    def is_empty(self) -> bool:
        return not self.grid.any()


def rasterize_bev(cloud: PointCloud, spec: GridSpec = GridSpec()) -> BevImage:
    """Project a (ground-removed) cloud to a binary occupancy image.

    A cell is set iff at least one point falls into its metric footprint.
    Points outside the grid or outside the inscribed circle are discarded.
    Binary OR is order-independent, so any evaluation schedule gives an
    identical image; an empty cloud gives an all-zero image.
    """
    s = spec.size_px
    grid = np.zeros((s, s), dtype=np.uint8)
    if len(cloud) == 0:
        return BevImage(grid=grid, spec=spec)
    x = cloud.xyz[:, 0].astype(np.float64) - spec.center[0]
    y = cloud.xyz[:, 1].astype(np.float64) - spec.center[1]
    keep = x * x + y * y < spec.radius_m**2
    ix = np.floor(x[keep] / spec.meters_per_px).astype(np.int64) + s // 2
    iy = np.floor(y[keep] / spec.meters_per_px).astype(np.int64) + s // 2
    ok = (ix >= 0) & (ix < s) & (iy >= 0) & (iy < s)
    grid[ix[ok], iy[ok]] = 1
    return BevImage(grid=grid, spec=spec)


def transform_bev(
    image: BevImage,
    alpha_deg: float,
    t_m: tuple[float, float] = (0.0, 0.0),
    interp: str = "nearest",
) -> BevImage:
    """Rotate image content by ``alpha_deg`` about the center, then translate.

    Content motion convention: a feature at centered pixel p moves to
    R(alpha) p + t/res, matching the cloud-level ``transform_cloud``. Samples
    falling outside the input are 0. ``nearest`` preserves binarity exactly;
    ``bilinear_threshold`` interpolates and re-binarizes at 0.5. Rotations by
    multiples of 90 degrees are grid-exact.
    """
    if interp not in ("nearest", "bilinear_threshold"):
        raise ValueError(f"unknown interpolation {interp!r}")
    s = image.spec.size_px
    c = image.spec.center_index
    res = image.spec.meters_per_px
    a = np.deg2rad(alpha_deg)
    ca, sa = np.cos(a), np.sin(a)
    # Inverse map: source = R(-alpha) (u - c - t_px) + c
    ii = np.arange(s, dtype=np.float64)
    di = ii - c - t_m[0] / res
    dj = ii - c - t_m[1] / res
    src_x = ca * di[:, None] + sa * dj[None, :] + c
    src_y = -sa * di[:, None] + ca * dj[None, :] + c
    grid = image.grid
    if interp == "nearest":
        xi = np.rint(src_x).astype(np.int64)
        yi = np.rint(src_y).astype(np.int64)
        ok = (xi >= 0) & (xi < s) & (yi >= 0) & (yi < s)
        out = np.zeros((s, s), dtype=np.uint8)
        out[ok] = grid[xi[ok], yi[ok]]
    else:
        x0 = np.floor(src_x).astype(np.int64)
        y0 = np.floor(src_y).astype(np.int64)
        fx = src_x - x0
        fy = src_y - y0
        acc = np.zeros((s, s), dtype=np.float64)
        for dxi, wx in ((0, 1.0 - fx), (1, fx)):
            for dyi, wy in ((0, 1.0 - fy), (1, fy)):
                xs = x0 + dxi
                ys = y0 + dyi
                ok = (xs >= 0) & (xs < s) & (ys >= 0) & (ys < s)
                w = wx * wy
                vals = np.zeros((s, s), dtype=np.float64)
                vals[ok] = grid[xs[ok], ys[ok]]
                acc += w * vals
        out = (acc >= 0.5).astype(np.uint8)
    return BevImage(grid=out, spec=image.spec)


def write_bev_pgm(path: str | os.PathLike, image: BevImage) -> None:
    """Export occupancy as PGM P5 with values 0/255."""
    pgm.write_pgm(path, (image.grid * np.uint8(255)))


def read_bev_pgm(path: str | os.PathLike, spec: GridSpec | None = None) -> BevImage:
    """Import a PGM occupancy image; any nonzero pixel counts as occupied.

    When ``spec`` is omitted, a default-resolution spec of matching size is
    assumed (PGM carries no metric metadata).
    """
    raw = pgm.read_pgm(path)
    if raw.shape[0] != raw.shape[1]:
        raise ValueError(f"{path}: BEV images must be square, got {raw.shape}")
    if spec is None:
        spec = GridSpec(size_px=raw.shape[0])
    return BevImage(grid=(raw > 0).astype(np.uint8), spec=spec)
