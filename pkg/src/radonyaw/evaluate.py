"""Pair evaluation with threshold fractions and error quartiles."""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass

import numpy as np

from .bev import read_bev_pgm, rasterize_bev
from .cloud import load_pointcloud, remove_ground
from .config import DEFAULT_Z_MAX_M, DEFAULT_Z_MIN_M, EstimatorConfig
from .heading import estimate_heading


def angular_error_deg(a_deg: float, b_deg: float) -> float:
    """Circular distance between two angles, in [0, 180] degrees."""
    d = abs(a_deg - b_deg) % 360.0
    return min(d, 360.0 - d)


@dataclass(frozen=True)
class ErrorStats:
    """Fractions below the 1/3/5 degree thresholds plus error quartiles."""

    frac_1deg: float
    frac_3deg: float
    frac_5deg: float
    q25: float
    q50: float
    q75: float
    n: int

    @classmethod
    def from_errors(cls, errors) -> "ErrorStats":
        e = np.asarray(list(errors), dtype=np.float64)
        if e.size == 0:
            raise ValueError("cannot aggregate an empty error list")
        if (e < 0).any() or (e > 180.0).any():
            raise ValueError("angular errors must lie in [0, 180] degrees")
        q25, q50, q75 = np.percentile(e, [25, 50, 75])  # linear interpolation
        return cls(
            frac_1deg=float((e < 1.0).mean()),
            frac_3deg=float((e < 3.0).mean()),
            frac_5deg=float((e < 5.0).mean()),
            q25=float(q25),
            q50=float(q50),
            q75=float(q75),
            n=int(e.size),
        )

    def as_dict(self) -> dict:
        return {
            "frac_1deg": self.frac_1deg,
            "frac_3deg": self.frac_3deg,
            "frac_5deg": self.frac_5deg,
            "q25_deg": self.q25,
            "q50_deg": self.q50,
            "q75_deg": self.q75,
            "n": self.n,
        }


@dataclass
class PairRow:
    query: str
    reference: str
    gt_yaw_deg: float
    gt_tx_m: float = 0.0
    gt_ty_m: float = 0.0
    mask_q: str | None = None
    mask_p: str | None = None


@dataclass
class PairManifest:
    """Evaluation pairs: query cloud vs retrieved cloud/submap plus GT yaw.

    CSV schema (header required):
        query,reference,gt_yaw_deg[,gt_tx_m,gt_ty_m][,mask_q,mask_p]
    gt_yaw_deg is the yaw that rotates the query content onto the reference
    (see estimate_heading); its provenance (raw vs optimized poses) is the
    caller's choice. The GT translation norm must stay within the retrieval
    radius.
    """

    rows: list[PairRow]

    @classmethod
    def load(cls, path: str | os.PathLike, retrieval_radius_m: float = 5.0) -> "PairManifest":
        path = os.fspath(path)
        rows: list[PairRow] = []
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            have = set(reader.fieldnames or [])
            required = {"query", "reference", "gt_yaw_deg"}
            missing = required - have
            if missing:
                raise ValueError(f"{path}: manifest is missing column(s) {sorted(missing)}")
            for lineno, rec in enumerate(reader, start=2):
                tx = float(rec.get("gt_tx_m") or 0.0)
                ty = float(rec.get("gt_ty_m") or 0.0)
                if math.hypot(tx, ty) > retrieval_radius_m + 1e-9:
                    raise ValueError(
                        f"{path}:{lineno}: GT translation {math.hypot(tx, ty):.2f} m exceeds "
                        f"the retrieval radius {retrieval_radius_m} m"
                    )
                rows.append(
                    PairRow(
                        query=rec["query"],
                        reference=rec["reference"],
                        gt_yaw_deg=float(rec["gt_yaw_deg"]) % 360.0,
                        gt_tx_m=tx,
                        gt_ty_m=ty,
                        mask_q=rec.get("mask_q") or None,
                        mask_p=rec.get("mask_p") or None,
                    )
                )
        if not rows:
            raise ValueError(f"{path}: manifest contains no pairs")
        return cls(rows=rows)


def _load_bev(path: str, config: EstimatorConfig, z_min: float, z_max: float):
    if path.endswith(".pgm"):
        return read_bev_pgm(path, spec=config.grid)
    cloud = remove_ground(load_pointcloud(path), z_min=z_min, z_max=z_max)
    return rasterize_bev(cloud, config.grid)


def evaluate_pairs(
    manifest: PairManifest,
    config: EstimatorConfig = EstimatorConfig(),
    z_min: float = DEFAULT_Z_MIN_M,
    z_max: float = DEFAULT_Z_MAX_M,
) -> tuple[ErrorStats, list[dict], int]:
    """Estimate every manifest pair and aggregate the angular errors.

    Returns (stats, per-pair result rows in manifest order, failure count).
    A pair whose inputs cannot be read or estimated is recorded as a failure
    row and excluded from the stats.
    """
    results: list[dict] = []
    errors: list[float] = []
    n_failed = 0
    for idx, row in enumerate(manifest.rows):
        rec: dict = {
            "index": idx,
            "query": row.query,
            "reference": row.reference,
            "gt_yaw_deg": row.gt_yaw_deg,
        }
        try:
            bq = _load_bev(row.query, config, z_min, z_max)
            bp = _load_bev(row.reference, config, z_min, z_max)
            mq = np.load(row.mask_q) if row.mask_q else None
            mp = np.load(row.mask_p) if row.mask_p else None
            est = estimate_heading(bq, bp, config, mask_q=mq, mask_p=mp)
        except Exception as exc:  # noqa: BLE001 - failure rows are data, not crashes
            n_failed += 1
            rec.update(status="error", error_deg="", est_yaw_deg="", message=str(exc))
            results.append(rec)
            continue
        err = angular_error_deg(est.angle_deg, row.gt_yaw_deg)
        errors.append(err)
        rec.update(
            status="ok",
            est_yaw_deg=est.angle_deg,
            error_deg=err,
            confidence=est.confidence,
            message="",
        )
        results.append(rec)
    if not errors:
        raise ValueError("no pair could be evaluated")
    return ErrorStats.from_errors(errors), results, n_failed


def write_pairs_csv(path: str | os.PathLike, results: list[dict]) -> None:
    fields = [
        "index",
        "query",
        "reference",
        "gt_yaw_deg",
        "est_yaw_deg",
        "error_deg",
        "confidence",
        "status",
        "message",
    ]
    with open(os.fspath(path), "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields, extrasaction="ignore")
        writer.writeheader()
        for rec in results:
            writer.writerow(rec)
