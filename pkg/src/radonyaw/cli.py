"""Command line interface.

Subcommands: bev, estimate, toycase, eval, bench.
Exit codes: 0 success, 2 input error, 3 degenerate (empty) scene.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .bev import GridSpec, rasterize_bev, read_bev_pgm, write_bev_pgm
from .bench import bench, format_report
from .cloud import CloudFormatError, load_pointcloud, remove_ground
from .config import DEFAULT_Z_MAX_M, DEFAULT_Z_MIN_M, EstimatorConfig
from .evaluate import PairManifest, evaluate_pairs, write_pairs_csv
from .heading import EmptySceneError, estimate_heading
from .toycase import (
    ToycaseGrid,
    default_toycase_grid,
    run_toycase,
    write_toycase_csv,
    write_toycase_heatmap,
)

EXIT_OK = 0
EXIT_INPUT_ERROR = 2
EXIT_DEGENERATE_SCENE = 3


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--grid-size", type=int, default=400, help="BEV side length in pixels")
    parser.add_argument("--resolution-m", type=float, default=0.5, help="meters per BEV pixel")
    parser.add_argument("--n-angles", type=int, default=360, help="sinogram angle bins over 360 degrees")
    parser.add_argument("--z-min", type=float, default=DEFAULT_Z_MIN_M, help="ground slab lower bound (m)")
    parser.add_argument("--z-max", type=float, default=DEFAULT_Z_MAX_M, help="ground slab upper bound (m)")
    parser.add_argument("--no-refine", action="store_true", help="disable sub-bin peak refinement")
    parser.add_argument(
        "--normalize-rows", action="store_true",
        help="scale descriptors to unit Frobenius norm before correlating",
    )
    parser.add_argument(
        "--ablation-raw-sinogram", action="store_true",
        help="correlate raw sinogram rows instead of DFT magnitudes",
    )
    parser.add_argument("--seed", type=int, default=0, help="seed for synthetic scenes")
    parser.add_argument("--threads", type=int, default=None, help="worker threads for the sinogram kernel")


def _config_from(args: argparse.Namespace) -> EstimatorConfig:
    return EstimatorConfig(
        grid=GridSpec(size_px=args.grid_size, meters_per_px=args.resolution_m),
        n_angles=args.n_angles,
        refine=not args.no_refine,
        normalization="l2" if args.normalize_rows else "raw",
        ablation_raw_sinogram=args.ablation_raw_sinogram,
    )


def _set_threads(n: int | None) -> None:
    if n is None:
        return
    import numba

    numba.set_num_threads(max(1, min(int(n), numba.config.NUMBA_NUM_THREADS)))


def _load_bev_any(path: str, args: argparse.Namespace, config: EstimatorConfig):
    if path.endswith(".pgm"):
        return read_bev_pgm(path, spec=config.grid)
    cloud = remove_ground(load_pointcloud(path, format=args.format), args.z_min, args.z_max)
    return rasterize_bev(cloud, config.grid)


def cmd_bev(args: argparse.Namespace) -> int:
    config = _config_from(args)
    cloud = remove_ground(load_pointcloud(args.input, format=args.format), args.z_min, args.z_max)
    image = rasterize_bev(cloud, config.grid)
    write_bev_pgm(args.output, image)
    print(f"{args.output}: {image.occupancy} occupied cells")
    return EXIT_OK


def cmd_estimate(args: argparse.Namespace) -> int:
    _set_threads(args.threads)
    config = _config_from(args)
    bq = _load_bev_any(args.query, args, config)
    bp = _load_bev_any(args.reference, args, config)
    mask_q = np.load(args.mask_q) if args.mask_q else None
    mask_p = np.load(args.mask_p) if args.mask_p else None
    est = estimate_heading(bq, bp, config, mask_q=mask_q, mask_p=mask_p)
    payload = {
        "angle_deg": est.angle_deg,
        "confidence": est.confidence,
        "ambiguity_pair": list(est.correlation.ambiguity_pair),
    }
    if args.dump_scores:
        np.save(args.dump_scores, est.correlation.scores.astype(np.float32))
        payload["scores_path"] = args.dump_scores
    text = json.dumps(payload) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_toycase(args: argparse.Namespace) -> int:
    _set_threads(args.threads)
    config = _config_from(args)
    if args.scene_pgm:
        scene = read_bev_pgm(args.scene_pgm, spec=config.grid)
        grid = default_toycase_grid(seed=args.seed)
        grid = ToycaseGrid(grid.angles_deg, grid.translations_m, scene)
    else:
        grid = default_toycase_grid(seed=args.seed)
    errors = run_toycase(grid, config)
    os.makedirs(args.outdir, exist_ok=True)
    csv_path = os.path.join(args.outdir, "toycase_errors.csv")
    pgm_path = os.path.join(args.outdir, "toycase_errors.pgm")
    write_toycase_csv(csv_path, grid, errors)
    write_toycase_heatmap(pgm_path, errors)
    frac = float((errors <= 1.0).mean())
    print(
        f"cells={errors.size} max_err={errors.max():.3f} deg "
        f"within_1deg={100.0 * frac:.1f}% -> {csv_path}"
    )
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    _set_threads(args.threads)
    config = _config_from(args)
    manifest = PairManifest.load(args.manifest, retrieval_radius_m=args.retrieval_radius)
    stats, rows, n_failed = evaluate_pairs(manifest, config, z_min=args.z_min, z_max=args.z_max)
    os.makedirs(args.outdir, exist_ok=True)
    write_pairs_csv(os.path.join(args.outdir, "pairs.csv"), rows)
    payload = stats.as_dict()
    payload["n_failed"] = n_failed
    with open(os.path.join(args.outdir, "stats.json"), "w", encoding="utf-8") as fh:
        fh.write(json.dumps(payload) + "\n")
    print(json.dumps(payload))
    return EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    _set_threads(args.threads)
    config = _config_from(args)
    report = bench(config, n_iters=args.n_iters, warmup=args.warmup, seed=args.seed)
    print(format_report(report))
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(report) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="radonyaw",
        description="Global heading estimation between gravity-aligned point clouds",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bev", help="rasterize a point cloud to a PGM occupancy image")
    p.add_argument("input", help="point cloud (.bin kitti_bin or .csv/.xyz/.txt xyz_csv)")
    p.add_argument("-o", "--output", required=True, help="output PGM path")
    p.add_argument("--format", default="auto", choices=["auto", "kitti_bin", "xyz_csv"])
    _add_common(p)
    p.set_defaults(func=cmd_bev)

    p = sub.add_parser("estimate", help="estimate the heading between two clouds or BEVs")
    p.add_argument("query", help="query cloud or .pgm BEV")
    p.add_argument("reference", help="reference cloud or .pgm BEV")
    p.add_argument("-o", "--output", default=None, help="also write the JSON here")
    p.add_argument("--format", default="auto", choices=["auto", "kitti_bin", "xyz_csv"])
    p.add_argument("--mask-q", default=None, help="NPY float32 mask multiplied onto the query BEV")
    p.add_argument("--mask-p", default=None, help="NPY float32 mask multiplied onto the reference BEV")
    p.add_argument("--dump-scores", default=None, help="write the correlation score vector (NPY)")
    _add_common(p)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("toycase", help="translation/rotation sweep on a synthetic scene")
    p.add_argument("-o", "--outdir", default="toycase_out")
    p.add_argument("--scene-pgm", default=None, help="use this BEV as the scene instead of the synthetic one")
    _add_common(p)
    p.set_defaults(func=cmd_toycase)

    p = sub.add_parser("eval", help="evaluate a manifest of cloud pairs")
    p.add_argument("manifest", help="CSV: query,reference,gt_yaw_deg[,gt_tx_m,gt_ty_m][,mask_q,mask_p]")
    p.add_argument("-o", "--outdir", default="eval_out")
    p.add_argument("--retrieval-radius", type=float, default=5.0)
    _add_common(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", help="per-stage throughput of the default pipeline")
    p.add_argument("--n-iters", type=int, default=100)
    p.add_argument("--warmup", type=int, default=10)
    p.add_argument("-o", "--output", default=None, help="write the JSON report here")
    _add_common(p)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except EmptySceneError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE_SCENE
    except (CloudFormatError, FileNotFoundError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
