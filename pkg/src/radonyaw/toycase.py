"""Synthetic translation/rotation sweeps over a structured scene."""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass

import numpy as np

from . import pgm
from .bev import BevImage, rasterize_bev, transform_bev
from .cloud import PointCloud, transform_cloud
from .config import EstimatorConfig
from .evaluate import angular_error_deg
from .heading import estimate_heading


@dataclass
class ToycaseGrid:
    """Sweep axes: heading angles in [0, 360) x translations within +-5 m."""

    angles_deg: list[float]
    translations_m: list[tuple[float, float]]
    scene: PointCloud | BevImage

    def __post_init__(self):
        if not self.angles_deg or not self.translations_m:
            raise ValueError("toycase grid axes must be nonempty")
        for t in self.translations_m:
            if abs(t[0]) > 5.0 + 1e-9 or abs(t[1]) > 5.0 + 1e-9:
                raise ValueError(f"translation {t} outside the +-5 m toycase range")


def make_toycase_scene(seed: int = 0, n_rects: int = 28, radius_m: float = 45.0) -> PointCloud:
    """Deterministic arrangement of axis-misaligned walls inside a disc.

    Rectangle perimeters are sampled densely enough (~4 points per BEV cell
    edge) to rasterize as solid walls. Randomized orientation avoids the
    rotational near-symmetry that would make heading ill-posed.
    """
    rng = np.random.default_rng(seed)
    pts: list[np.ndarray] = []
    for _ in range(n_rects):
        ang = rng.uniform(0.0, 2.0 * np.pi)
        r = radius_m * np.sqrt(rng.uniform(0.02, 1.0))
        cx, cy = r * np.cos(ang), r * np.sin(ang)
        w, h = rng.uniform(2.0, 14.0, size=2)
        phi = rng.uniform(0.0, 2.0 * np.pi)
        z0 = rng.uniform(0.3, 1.0)
        step = 0.12
        for sx, sy, length in (
            (-w / 2, -h / 2, w),
            (-w / 2, h / 2, w),
            (-w / 2, -h / 2, h),
            (w / 2, -h / 2, h),
        ):
            n = max(2, int(np.ceil(length / step)))
            s = np.linspace(0.0, length, n)
            horizontal = length == w
            if horizontal:
                lx, ly = sx + s, np.full(n, sy)
            else:
                lx, ly = np.full(n, sx), sy + s
            x = np.cos(phi) * lx - np.sin(phi) * ly + cx
            y = np.sin(phi) * lx + np.cos(phi) * ly + cy
            z = np.full(n, z0) + rng.uniform(0.0, 1.5, size=n)
            pts.append(np.stack([x, y, z], axis=1))
    xyz = np.concatenate(pts, axis=0)
    keep = np.hypot(xyz[:, 0], xyz[:, 1]) < radius_m
    return PointCloud(xyz=xyz[keep])


def default_toycase_grid(seed: int = 0) -> ToycaseGrid:
    """24 angles (15-degree steps) x 5 diagonal translations = 120 cells."""
    return ToycaseGrid(
        angles_deg=[15.0 * k for k in range(24)],
        translations_m=[(v, v) for v in (-5.0, -2.5, 0.0, 2.5, 5.0)],
        scene=make_toycase_scene(seed=seed),
    )


def run_toycase(grid: ToycaseGrid, config: EstimatorConfig = EstimatorConfig()) -> np.ndarray:
    """Angular error matrix, shape (len(translations), len(angles)).

    Cell (i, j) transforms the scene by (angles[j], translations[i]) and
    measures the heading estimate against the known angle. Deterministic:
    the estimator path has no randomness.
    """
    if isinstance(grid.scene, BevImage):
        bq = grid.scene
        if bq.is_empty():
            raise ValueError("toycase scene BEV is empty")
        make_bp = lambda a, t: transform_bev(bq, a, t)  # noqa: E731
    else:
        if len(grid.scene) == 0:
            raise ValueError("toycase scene cloud is empty")
        scene = grid.scene
        bq = rasterize_bev(scene, config.grid)
        make_bp = lambda a, t: rasterize_bev(transform_cloud(scene, a, t), config.grid)  # noqa: E731
    errors = np.zeros((len(grid.translations_m), len(grid.angles_deg)), dtype=np.float64)
    for i, t in enumerate(grid.translations_m):
        for j, a in enumerate(grid.angles_deg):
            est = estimate_heading(bq, make_bp(a, t), config)
            errors[i, j] = angular_error_deg(est.angle_deg, a)
    return errors


def write_toycase_csv(
    path: str | os.PathLike, grid: ToycaseGrid, errors: np.ndarray
) -> None:
    with open(os.fspath(path), "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["tx_m", "ty_m"] + [f"err_at_{a:g}deg" for a in grid.angles_deg])
        for (tx, ty), row in zip(grid.translations_m, errors):
            writer.writerow([tx, ty] + [f"{e:.6f}" for e in row])


def write_toycase_heatmap(path: str | os.PathLike, errors: np.ndarray) -> None:
    """PGM heatmap of the error matrix, upscaled for visibility."""
    img = pgm.to_pgm_scaled(errors)
    img = np.kron(img, np.ones((16, 16), dtype=np.uint8))
    pgm.write_pgm(path, img)
