#!/usr/bin/env python3
"""Per-stage throughput of the default 400x400 / 360-angle pipeline."""

import argparse
import json

from radonyaw import EstimatorConfig
from radonyaw.bench import bench, format_report


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n-iters", type=int, default=200)
    parser.add_argument("--warmup", type=int, default=20)
    parser.add_argument("-o", "--output", default=None, help="JSON report path")
    args = parser.parse_args()

    report = bench(EstimatorConfig(), n_iters=args.n_iters, warmup=args.warmup)
    print(format_report(report))
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2)
            fh.write("\n")


if __name__ == "__main__":
    main()
