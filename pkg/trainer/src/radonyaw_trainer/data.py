"""Synthetic scan/submap pair generation.

A pair shares a wall layout but differs the way a single sweep differs from
an aggregated map: the scan side subsamples the walls and loses random
bearing sectors (occlusion), and each side carries its own dense clutter
blobs that the other side does not see (dynamic objects, density artifacts).
Without masks the clutter biases the correlation; suppressing it is what the
networks can learn. Ground-truth yaws sit on heading-bin centers and
translations stay inside the 5 m retrieval radius.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch

from .bev_io import rasterize, rotate_translate
from .config import TrainConfig
from .radon_layer import RadonGeometry


def _walls(
    rng: np.random.Generator,
    radius_m: float,
    n_rects: int = 20,
    axis_aligned: bool = False,
) -> np.ndarray:
    pts = []
    for _ in range(n_rects):
        ang = rng.uniform(0, 2 * np.pi)
        r = radius_m * np.sqrt(rng.uniform(0.03, 0.85))
        cx, cy = r * np.cos(ang), r * np.sin(ang)
        w, h = rng.uniform(3.0, 16.0, size=2)
        phi = float(rng.integers(0, 2)) * 0.5 * np.pi if axis_aligned else rng.uniform(0, 2 * np.pi)
        for sx, sy, length, horiz in (
            (-w / 2, -h / 2, w, True),
            (-w / 2, h / 2, w, True),
            (-w / 2, -h / 2, h, False),
            (w / 2, -h / 2, h, False),
        ):
            n = max(2, int(np.ceil(length / 0.4)))
            s = np.linspace(0, length, n)
            lx = sx + s if horiz else np.full(n, sx)
            ly = np.full(n, sy) if horiz else sy + s
            x = np.cos(phi) * lx - np.sin(phi) * ly + cx
            y = np.sin(phi) * lx + np.cos(phi) * ly + cy
            pts.append(np.column_stack([x, y, np.full(n, 1.0)]))
    xyz = np.concatenate(pts)
    keep = np.hypot(xyz[:, 0], xyz[:, 1]) < radius_m
    return xyz[keep]


def _clutter(
    rng: np.random.Generator,
    radius_m: float,
    n_blobs: int,
    bearing_sector: tuple[float, float] | None = None,
) -> np.ndarray:
    pts = []
    for _ in range(n_blobs):
        if bearing_sector is None:
            ang = rng.uniform(0, 2 * np.pi)
        else:
            ang = np.deg2rad(rng.uniform(*bearing_sector))
        r = radius_m * np.sqrt(rng.uniform(0.05, 0.8))
        cx, cy = r * np.cos(ang), r * np.sin(ang)
        blob_r = rng.uniform(2.5, 6.0)
        n = int(60 * blob_r)
        rr = blob_r * np.sqrt(rng.uniform(0, 1, n))
        aa = rng.uniform(0, 2 * np.pi, n)
        pts.append(
            np.column_stack([cx + rr * np.cos(aa), cy + rr * np.sin(aa), np.full(n, 1.0)])
        )
    xyz = np.concatenate(pts)
    keep = np.hypot(xyz[:, 0], xyz[:, 1]) < radius_m
    return xyz[keep]


def _drop_sectors(rng: np.random.Generator, xyz: np.ndarray, n_sectors: int = 2) -> np.ndarray:
    keep = np.ones(len(xyz), dtype=bool)
    bearing = np.arctan2(xyz[:, 1], xyz[:, 0])
    for _ in range(n_sectors):
        start = rng.uniform(-np.pi, np.pi)
        width = rng.uniform(0.5, 1.0)
        d = (bearing - start) % (2 * np.pi)
        keep &= d > width
    return xyz[keep]


@dataclass
class Pair:
    scan_bev: torch.Tensor
    submap_bev: torch.Tensor
    gt_yaw_deg: float
    scan_xyz: np.ndarray  # scan-frame cloud kept for rotation augmentation
    submap_bev_np: np.ndarray


class PairDataset:
    """Fixed list of synthetic scan/submap pairs with cached geometry.

    ``axis_aligned_walls`` restricts wall orientations to the grid axes
    (an orientation-skewed corpus for augmentation experiments).
    """

    def __init__(
        self,
        config: TrainConfig,
        n_pairs: int,
        seed: int | None = None,
        axis_aligned_walls: bool = False,
        scan_clutter_sector: tuple[float, float] | None = None,
    ):
        self.config = config
        self.axis_aligned_walls = axis_aligned_walls
        self.scan_clutter_sector = scan_clutter_sector
        rng = np.random.default_rng(config.seed if seed is None else seed)
        radius = 0.5 * config.grid_size_px * config.meters_per_px * 0.9
        self.pairs: list[Pair] = []
        for _ in range(n_pairs):
            self.pairs.append(self._make_pair(rng, radius))
        self._geom_cache: dict = {}

    def _make_pair(self, rng: np.random.Generator, radius: float) -> Pair:
        cfg = self.config
        walls = _walls(rng, radius, axis_aligned=self.axis_aligned_walls)
        scan_walls = walls[rng.random(len(walls)) < 0.45]
        scan_pts = np.vstack(
            [
                _drop_sectors(rng, scan_walls),
                _clutter(rng, radius, 6, self.scan_clutter_sector),
            ]
        )
        submap_pts = np.vstack([walls, _clutter(rng, radius, 6)])
        gt_yaw = float(rng.integers(0, cfg.n_angles)) * cfg.degrees_per_bin
        t = rng.uniform(-5.0, 5.0, size=2)
        submap_posed = rotate_translate(submap_pts, gt_yaw, (t[0], t[1]))
        scan_bev = rasterize(scan_pts, cfg.grid_size_px, cfg.meters_per_px)
        submap_bev = rasterize(submap_posed, cfg.grid_size_px, cfg.meters_per_px)
        return Pair(
            scan_bev=torch.from_numpy(scan_bev),
            submap_bev=torch.from_numpy(submap_bev),
            gt_yaw_deg=gt_yaw,
            scan_xyz=scan_pts,
            submap_bev_np=submap_bev,
        )

    def __len__(self) -> int:
        return len(self.pairs)

    def geometry(self, bev: torch.Tensor) -> RadonGeometry:
        key = bev.data_ptr()
        if key not in self._geom_cache:
            self._geom_cache[key] = RadonGeometry(
                bev.numpy() != 0, self.config.n_angles, self.config.n_offsets
            )
        return self._geom_cache[key]

    def sample(self, idx: int, rng: np.random.Generator | None = None):
        """(scan_bev, submap_bev, gt_yaw, geom_scan, geom_submap).

        With a generator supplied, the scan cloud is re-rotated by a random
        whole number of heading bins and the ground truth adjusted (rotation
        augmentation); the submap side is left alone.
        """
        pair = self.pairs[idx]
        cfg = self.config
        if rng is not None:
            delta = float(rng.integers(0, cfg.n_angles)) * cfg.degrees_per_bin
            scan_np = rasterize(
                rotate_translate(pair.scan_xyz, delta), cfg.grid_size_px, cfg.meters_per_px
            )
            scan = torch.from_numpy(scan_np)
            gt = (pair.gt_yaw_deg - delta) % 360.0
            geom_q = RadonGeometry(scan_np != 0, cfg.n_angles, cfg.n_offsets)
        else:
            scan = pair.scan_bev
            gt = pair.gt_yaw_deg
            geom_q = self.geometry(pair.scan_bev)
        return scan, pair.submap_bev, gt, geom_q, self.geometry(pair.submap_bev)
