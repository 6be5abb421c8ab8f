"""Per-stage throughput measurement of the estimation pipeline.

Stage decomposition mirrors the deployment split: the reference (map side)
BEV and descriptor are precomputed, and each iteration runs the query side:
  preprocess          -- cloud -> binary BEV
  feature_extraction  -- BEV -> sinogram -> DFT-magnitude descriptor
  heading_estimation  -- circular correlation + refinement + half-turn check
"""

from __future__ import annotations

import time

import numpy as np

from .bev import rasterize_bev
from .config import EstimatorConfig
from .heading import (
    circular_correlate,
    dft_magnitude_rows,
    disambiguate_halfturn,
    refine_peak,
)
from .radon import radon_transform
from .toycase import make_toycase_scene
from .cloud import transform_cloud

STAGES = ("preprocess", "feature_extraction", "heading_estimation", "total")


def bench(
    config: EstimatorConfig = EstimatorConfig(),
    n_iters: int = 100,
    warmup: int = 10,
    seed: int = 0,
) -> dict:
    """Median and p95 wall time per stage over ``n_iters`` timed runs.

    At least ``warmup`` untimed iterations run first (JIT compilation, FFT
    plan caches). Returns {stage: {"median_ms": .., "p95_ms": ..}} for the
    four stages; "total" times the whole per-pair path, so it tracks the sum
    of the stages up to timer overhead.
    """
    warmup = max(int(warmup), 10)
    scene = make_toycase_scene(seed=seed)
    query = transform_cloud(scene, 37.0, (1.5, -2.0))
    bev_ref = rasterize_bev(scene, config.grid)
    rspec = config.radon_spec(config.grid.size_px)
    desc_ref = dft_magnitude_rows(
        radon_transform(bev_ref, rspec), config.drop_dc, config.half_spectrum, config.normalization
    )
    arr_ref = bev_ref.grid

    times = {s: [] for s in STAGES}
    for it in range(warmup + n_iters):
        t0 = time.perf_counter()
        bev_q = rasterize_bev(query, config.grid)
        t1 = time.perf_counter()
        sino_q = radon_transform(bev_q, rspec)
        desc_q = dft_magnitude_rows(
            sino_q, config.drop_dc, config.half_spectrum, config.normalization
        )
        t2 = time.perf_counter()
        corr = circular_correlate(desc_q, desc_ref)
        refine_peak(corr.scores, corr.best_bin)
        disambiguate_halfturn(
            bev_q.grid, arr_ref, corr.ambiguity_pair, config.peak_floor, config.disamb_pool
        )
        t3 = time.perf_counter()
        if it >= warmup:
            times["preprocess"].append(t1 - t0)
            times["feature_extraction"].append(t2 - t1)
            times["heading_estimation"].append(t3 - t2)
            times["total"].append(t3 - t0)

    report = {}
    for stage in STAGES:
        arr = np.asarray(times[stage]) * 1e3
        report[stage] = {
            "median_ms": float(np.median(arr)),
            "p95_ms": float(np.percentile(arr, 95)),
        }
    report["n_iters"] = int(n_iters)
    return report


def format_report(report: dict) -> str:
    lines = [f"{'stage':<20} {'median_ms':>10} {'p95_ms':>10}"]
    for stage in STAGES:
        r = report[stage]
        lines.append(f"{stage:<20} {r['median_ms']:>10.3f} {r['p95_ms']:>10.3f}")
    return "\n".join(lines)
