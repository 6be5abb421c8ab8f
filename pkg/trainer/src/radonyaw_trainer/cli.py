"""Trainer CLI: `train` on synthetic or manifest data, `export-masks`."""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import torch

from .bev_io import read_bev
from .config import TrainConfig
from .data import PairDataset
from .radon_layer import RadonGeometry
from .train import evaluate, export_masks, train


class ManifestDataset:
    """PGM scan/submap pairs listed in a CSV: query,reference,gt_yaw_deg."""

    def __init__(self, path: str, config: TrainConfig):
        self.config = config
        self.items = []
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            required = {"query", "reference", "gt_yaw_deg"}
            missing = required - set(reader.fieldnames or [])
            if missing:
                raise ValueError(f"{path}: manifest missing column(s) {sorted(missing)}")
            for rec in reader:
                bev_q = torch.from_numpy(read_bev(rec["query"]))
                bev_p = torch.from_numpy(read_bev(rec["reference"]))
                if bev_q.shape[0] != config.grid_size_px:
                    raise ValueError(
                        f"{rec['query']}: size {bev_q.shape[0]} does not match "
                        f"config grid {config.grid_size_px}"
                    )
                self.items.append(
                    (
                        bev_q,
                        bev_p,
                        float(rec["gt_yaw_deg"]) % 360.0,
                        RadonGeometry(bev_q.numpy() != 0, config.n_angles, config.n_offsets),
                        RadonGeometry(bev_p.numpy() != 0, config.n_angles, config.n_offsets),
                    )
                )
        if not self.items:
            raise ValueError(f"{path}: manifest contains no pairs")

    def __len__(self) -> int:
        return len(self.items)

    def sample(self, idx: int, rng=None):
        return self.items[idx]


def _config_from(args: argparse.Namespace) -> TrainConfig:
    return TrainConfig(
        grid_size_px=args.grid_size,
        meters_per_px=args.resolution_m,
        n_angles=args.n_angles,
        lr=args.lr,
        batch_size=args.batch_size,
        epochs=args.epochs,
        seed=args.seed,
        augment_rotation=not args.no_augment,
        twin_aware_loss=args.twin_aware_loss,
        base_channels=args.base_channels,
    )


def cmd_train(args: argparse.Namespace) -> int:
    config = _config_from(args)
    if args.manifest:
        dataset = ManifestDataset(args.manifest, config)
    else:
        dataset = PairDataset(config, n_pairs=args.synthetic)
    result = train(dataset, config, out_dir=args.out)
    accuracy = evaluate(result["net_q"], result["net_p"], dataset)
    summary = {
        "final_loss": result["history"][-1]["loss"],
        "train_accuracy_3deg": accuracy,
        "checkpoint": os.path.join(args.out, "final.pt"),
    }
    with open(os.path.join(args.out, "summary.json"), "w", encoding="utf-8") as fh:
        fh.write(json.dumps(summary) + "\n")
    print(json.dumps(summary))
    return 0


def cmd_export_masks(args: argparse.Namespace) -> int:
    with open(args.manifest, "r", encoding="utf-8", newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError(f"{args.manifest}: no rows")
    out_rows = export_masks(args.checkpoint, rows, args.out)
    out_manifest = os.path.join(args.out, "manifest_with_masks.csv")
    with open(out_manifest, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(out_rows[0].keys()))
        writer.writeheader()
        writer.writerows(out_rows)
    print(f"wrote {len(out_rows)} mask pairs and {out_manifest}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="radonyaw-train", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train the mask networks")
    p.add_argument("-o", "--out", default="train_out")
    p.add_argument("--manifest", default=None, help="CSV of PGM pairs (query,reference,gt_yaw_deg)")
    p.add_argument("--synthetic", type=int, default=50, help="synthetic pair count when no manifest")
    p.add_argument("--grid-size", type=int, default=64)
    p.add_argument("--resolution-m", type=float, default=1.5)
    p.add_argument("--n-angles", type=int, default=120)
    p.add_argument("--lr", type=float, default=1e-4)
    p.add_argument("--batch-size", type=int, default=5)
    p.add_argument("--epochs", type=int, default=60)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-augment", action="store_true", help="disable random rotation augmentation")
    p.add_argument("--twin-aware-loss", action="store_true")
    p.add_argument("--base-channels", type=int, default=8)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("export-masks", help="materialize masks for a PGM pair manifest")
    p.add_argument("checkpoint")
    p.add_argument("manifest")
    p.add_argument("-o", "--out", default="masks_out")
    p.set_defaults(func=cmd_export_masks)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
