#!/usr/bin/env python3
"""Desk-scale end-to-end run: synthesize a corpus, run the full simulator
pipeline, and print the quality-vs-N curve with its compute ledger.

Example:
    python scripts/run_sim_experiment.py --out-dir /tmp/bonmt-run \
        --segments 32 --n 256 --noise gaussian --sigma 0.1
"""

import argparse
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from bonmt.cli import run
from bonmt.corpus import Dataset, LangPair, Segment, save_dataset

REGISTRY = os.path.join(os.path.dirname(__file__), "..", "tests", "fixtures", "models.toml")


def synth_dataset(path: str, n_segments: int, pair: str) -> None:
    lp = LangPair.parse(pair)
    segments = tuple(
        Segment(
            id=f"synth:{i}",
            pair=lp,
            domain="news",
            src=f"Synthetic source sentence number {i} for the scaling run.",
            refs=(f"Synthetic reference number {i}.",),
        )
        for i in range(n_segments)
    )
    save_dataset(Dataset(name="synth", segments=segments), path)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out-dir", required=True)
    ap.add_argument("--segments", type=int, default=16)
    ap.add_argument("--pair", default="en-zh")
    ap.add_argument("--n", type=int, default=64, help="pool size per segment")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--noise", default="gaussian", choices=["none", "gaussian", "rank_corrupt"])
    ap.add_argument("--sigma", type=float, default=0.1)
    ap.add_argument("--registry", default=REGISTRY)
    args = ap.parse_args()

    os.makedirs(args.out_dir, exist_ok=True)
    ds_path = os.path.join(args.out_dir, "segments.jsonl")
    synth_dataset(ds_path, args.segments, args.pair)

    schedule = [str(n) for n in [1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024] if n <= args.n]
    code = run(
        [
            "simulate",
            "--dataset", ds_path,
            "--n", str(args.n),
            "--seed", str(args.seed),
            "--noise", args.noise,
            "--sigma", str(args.sigma),
            "--schedule", *schedule,
            "--registry", args.registry,
            "--out-dir", args.out_dir,
        ]
    )
    if code != 0:
        return code
    with open(os.path.join(args.out_dir, "curve.csv"), encoding="utf-8") as fh:
        print(fh.read(), end="")
    return 0


if __name__ == "__main__":
    sys.exit(main())
