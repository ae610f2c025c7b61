#!/usr/bin/env python3
"""Run every config in configs/ (or the ones given) into runs/<config-stem>/."""

import argparse
import sys
from pathlib import Path

from intrinsic_chern.config import load_config
from intrinsic_chern.errors import ConfigError
from intrinsic_chern.experiments import run_experiment

ROOT = Path(__file__).resolve().parent.parent


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("configs", nargs="*", type=Path)
    ap.add_argument("--out", type=Path, default=ROOT / "runs")
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()
    paths = args.configs or sorted((ROOT / "configs").glob("*.*"))
    status = 0
    for path in paths:
        try:
            cfg = load_config(path, threads=args.threads)
        except ConfigError as exc:
            print(f"{path.name}: config error: {exc}", file=sys.stderr)
            status = 2
            continue
        recs = run_experiment(cfg, args.out / path.stem)
        bad = sum(not r.ok for r in recs)
        print(f"{path.name}: {len(recs)} records, {bad} failed -> {args.out / path.stem}")
        status = status or (1 if bad else 0)
    return status


if __name__ == "__main__":
    sys.exit(main())
