#!/usr/bin/env python3
"""Generate a demo cloud pair plus manifest for exercising the CLI.

Creates query.bin, ref.bin (query rotated/translated by a known transform),
their BEV PGMs, and pairs.csv, then prints the CLI invocations to try.
"""

import argparse
import os

from radonyaw import EstimatorConfig, rasterize_bev, transform_cloud
from radonyaw.bev import write_bev_pgm
from radonyaw.cloud import write_pointcloud
from radonyaw.toycase import make_toycase_scene


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("-o", "--outdir", default="demo_pair")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--yaw-deg", type=float, default=141.0)
    parser.add_argument("--tx-m", type=float, default=2.0)
    parser.add_argument("--ty-m", type=float, default=-3.0)
    args = parser.parse_args()

    os.makedirs(args.outdir, exist_ok=True)
    scene = make_toycase_scene(seed=args.seed)
    moved = transform_cloud(scene, args.yaw_deg, (args.tx_m, args.ty_m))

    q = os.path.join(args.outdir, "query.bin")
    r = os.path.join(args.outdir, "ref.bin")
    write_pointcloud(q, scene)
    write_pointcloud(r, moved)
    grid = EstimatorConfig().grid
    write_bev_pgm(os.path.join(args.outdir, "query.pgm"), rasterize_bev(scene, grid))
    write_bev_pgm(os.path.join(args.outdir, "ref.pgm"), rasterize_bev(moved, grid))
    manifest = os.path.join(args.outdir, "pairs.csv")
    with open(manifest, "w", encoding="utf-8") as fh:
        fh.write("query,reference,gt_yaw_deg,gt_tx_m,gt_ty_m\n")
        fh.write(f"{q},{r},{args.yaw_deg},{args.tx_m},{args.ty_m}\n")

    print(f"wrote {args.outdir}/ (true yaw {args.yaw_deg} deg)")
    print("try:")
    print(f"  radonyaw estimate {q} {r}")
    print(f"  radonyaw eval {manifest} -o {args.outdir}/eval")


if __name__ == "__main__":
    main()
