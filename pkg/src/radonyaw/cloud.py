"""Point cloud loading, ground removal and rigid 2-D transforms.

File formats:
  kitti_bin -- flat little-endian float32 stream of (x, y, z, intensity)
               quadruples, no header.
  xyz_csv   -- UTF-8 comma-separated rows "x,y,z[,intensity]" with an optional
               header line (detected by a non-numeric first token).
  pose CSV  -- header row with columns id,x,y,z,yaw[,pitch,roll].
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass

import numpy as np


class CloudFormatError(ValueError):
    """Malformed point cloud or pose file."""


@dataclass
class PointCloud:
    """3-D points in a gravity-aligned sensor frame.

    ``xyz`` is an (N, 3) float32 array; ``intensity`` is an optional (N,)
    float32 array carried for lossless round-trips and ignored downstream.
    The cloud may be empty.
    """

    xyz: np.ndarray
    intensity: np.ndarray | None = None

    def __post_init__(self):
        self.xyz = np.asarray(self.xyz, dtype=np.float32).reshape(-1, 3)
        if self.intensity is not None:
            self.intensity = np.asarray(self.intensity, dtype=np.float32).reshape(-1)
            if self.intensity.shape[0] != self.xyz.shape[0]:
                raise ValueError("intensity length does not match point count")
        if self.xyz.size and not np.isfinite(self.xyz).all():
            raise ValueError("point cloud contains non-finite coordinates")

    def __len__(self) -> int:
        return self.xyz.shape[0]


@dataclass
class PoseRecord:
    """One ground-truth pose row; yaw is normalized to [0, 360) degrees.

    Pitch and roll are informational only and never applied: clouds are
    assumed gravity-aligned with slight residuals.
    """

    id: str
    x: float
    y: float
    z: float
    yaw: float
    pitch: float | None = None
    roll: float | None = None

    def __post_init__(self):
        self.yaw = float(self.yaw) % 360.0


def load_pointcloud(path: str | os.PathLike, format: str = "auto") -> PointCloud:
    """Load a point cloud from ``kitti_bin`` or ``xyz_csv``.

    ``format="auto"`` picks by extension (.bin -> kitti_bin, else xyz_csv).
    Raises CloudFormatError naming the offending byte or line for truncated
    or non-finite input; never silently drops data.
    """
    path = os.fspath(path)
    if format == "auto":
        format = "kitti_bin" if path.endswith(".bin") else "xyz_csv"
    if format == "kitti_bin":
        return _load_kitti_bin(path)
    if format == "xyz_csv":
        return _load_xyz_csv(path)
    raise ValueError(f"unknown point cloud format: {format!r}")


def _load_kitti_bin(path: str) -> PointCloud:
    raw = np.fromfile(path, dtype="<f4")
    nbytes = raw.size * 4
    if raw.size % 4 != 0:
        raise CloudFormatError(
            f"{path}: truncated kitti_bin record, {nbytes} bytes is not a "
            f"multiple of 16 (last complete point ends at byte {nbytes - nbytes % 16})"
        )
    pts = raw.reshape(-1, 4)
    bad = ~np.isfinite(pts[:, :3])
    if bad.any():
        idx = int(np.argwhere(bad.any(axis=1))[0, 0])
        raise CloudFormatError(
            f"{path}: non-finite coordinate in point {idx} (byte offset {idx * 16})"
        )
    return PointCloud(xyz=pts[:, :3].copy(), intensity=pts[:, 3].copy())


def _load_xyz_csv(path: str) -> PointCloud:
    xyz: list[tuple[float, float, float]] = []
    inten: list[float] = []
    has_intensity: bool | None = None
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        for lineno, row in enumerate(reader, start=1):
            row = [c.strip() for c in row if c.strip() != ""]
            if not row:
                continue
            if lineno == 1 and not _is_number(row[0]):
                continue  # header
            if len(row) not in (3, 4):
                raise CloudFormatError(
                    f"{path}:{lineno}: expected 3 or 4 columns, got {len(row)}"
                )
            try:
                vals = [float(c) for c in row]
            except ValueError:
                raise CloudFormatError(f"{path}:{lineno}: non-numeric field") from None
            if not all(math.isfinite(v) for v in vals[:3]):
                raise CloudFormatError(f"{path}:{lineno}: non-finite coordinate")
            row_has_intensity = len(vals) == 4
            if has_intensity is None:
                has_intensity = row_has_intensity
            elif has_intensity != row_has_intensity:
                raise CloudFormatError(f"{path}:{lineno}: inconsistent column count")
            xyz.append((vals[0], vals[1], vals[2]))
            if row_has_intensity:
                inten.append(vals[3])
    pts = np.array(xyz, dtype=np.float32).reshape(-1, 3)
    intensity = np.array(inten, dtype=np.float32) if has_intensity else None
    return PointCloud(xyz=pts, intensity=intensity)


def _is_number(token: str) -> bool:
    try:
        float(token)
        return True
    except ValueError:
        return False


def write_pointcloud(path: str | os.PathLike, cloud: PointCloud, format: str = "auto") -> None:
    """Write a cloud back to disk; kitti_bin round-trips byte-exactly."""
    path = os.fspath(path)
    if format == "auto":
        format = "kitti_bin" if path.endswith(".bin") else "xyz_csv"
    if format == "kitti_bin":
        inten = cloud.intensity
        if inten is None:
            inten = np.zeros(len(cloud), dtype=np.float32)
        rec = np.empty((len(cloud), 4), dtype="<f4")
        rec[:, :3] = cloud.xyz
        rec[:, 3] = inten
        rec.tofile(path)
    elif format == "xyz_csv":
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            if cloud.intensity is None:
                writer.writerow(["x", "y", "z"])
                for p in cloud.xyz:
                    writer.writerow([repr(float(v)) for v in p])
            else:
                writer.writerow(["x", "y", "z", "intensity"])
                for p, i in zip(cloud.xyz, cloud.intensity):
                    writer.writerow([repr(float(v)) for v in (*p, i)])
    else:
        raise ValueError(f"unknown point cloud format: {format!r}")


def remove_ground(cloud: PointCloud, z_min: float = -1.2, z_max: float = 30.0) -> PointCloud:
    """Keep points with z_min < z < z_max (sensor-relative height slab).

    A slab is deterministic and dataset-agnostic; the occupancy BEV downstream
    is binary, so nothing finer is needed. Idempotent; order preserving.
    """
    if not z_min < z_max:
        raise ValueError(f"z_min must be < z_max, got ({z_min}, {z_max})")
    if len(cloud) == 0:
        return PointCloud(xyz=cloud.xyz.copy(), intensity=None)
    keep = (cloud.xyz[:, 2] > z_min) & (cloud.xyz[:, 2] < z_max)
    inten = cloud.intensity[keep] if cloud.intensity is not None else None
    return PointCloud(xyz=cloud.xyz[keep], intensity=inten)


def load_pose_table(path: str | os.PathLike) -> list[PoseRecord]:
    """Load a pose CSV (columns id,x,y,z,yaw[,pitch,roll]) in file order."""
    path = os.fspath(path)
    records: list[PoseRecord] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"id", "x", "y", "z", "yaw"}
        have = {name.strip() for name in (reader.fieldnames or [])}
        missing = required - have
        if missing:
            raise CloudFormatError(
                f"{path}: pose table is missing column(s) {sorted(missing)}"
            )
        for lineno, row in enumerate(reader, start=2):
            try:
                rec = PoseRecord(
                    id=row["id"],
                    x=float(row["x"]),
                    y=float(row["y"]),
                    z=float(row["z"]),
                    yaw=float(row["yaw"]),
                    pitch=float(row["pitch"]) if row.get("pitch") not in (None, "") else None,
                    roll=float(row["roll"]) if row.get("roll") not in (None, "") else None,
                )
            except (TypeError, ValueError):
                raise CloudFormatError(f"{path}:{lineno}: malformed pose row") from None
            records.append(rec)
    return records


def transform_cloud(
    cloud: PointCloud, yaw_deg: float, t_xy: tuple[float, float] = (0.0, 0.0)
) -> PointCloud:
    """Rotate a cloud by ``yaw_deg`` about the gravity axis, then translate.

    p' = R(yaw) p + t, with z untouched. This is the cloud-level convention
    used by pose tables, submaps and the toycase ground truth.
    """
    a = math.radians(yaw_deg)
    c, s = math.cos(a), math.sin(a)
    xy = cloud.xyz[:, :2].astype(np.float64)
    out = np.empty_like(cloud.xyz)
    out[:, 0] = c * xy[:, 0] - s * xy[:, 1] + t_xy[0]
    out[:, 1] = s * xy[:, 0] + c * xy[:, 1] + t_xy[1]
    out[:, 2] = cloud.xyz[:, 2]
    inten = cloud.intensity.copy() if cloud.intensity is not None else None
    return PointCloud(xyz=out, intensity=inten)


def build_submap(
    clouds: list[PointCloud],
    poses: list[PoseRecord],
    reference: PoseRecord,
    radius_m: float = 50.0,
) -> PointCloud:
    """Union the clouds posed within ``radius_m`` of a reference pose.

    Each cloud is moved into the reference frame using its 2-D pose
    (x, y, yaw); pitch/roll are ignored by design.
    """
    if len(clouds) != len(poses):
        raise ValueError("clouds and poses must pair up")
    parts: list[np.ndarray] = []
    for cloud, pose in zip(clouds, poses):
        if math.hypot(pose.x - reference.x, pose.y - reference.y) > radius_m:
            continue
        world = transform_cloud(cloud, pose.yaw, (pose.x, pose.y))
        local = transform_cloud(
            PointCloud(world.xyz - np.array([reference.x, reference.y, 0], dtype=np.float32)),
            -reference.yaw,
        )
        parts.append(local.xyz)
    if not parts:
        return PointCloud(xyz=np.zeros((0, 3), dtype=np.float32))
    return PointCloud(xyz=np.concatenate(parts, axis=0))
