"""Scan several channels and check every constrained rate point against the outer bound.

    python scripts/claim_suite.py --restarts 12 --out claim_suite.csv
"""

from __future__ import annotations

import argparse
import time
from pathlib import Path

import numpy as np

from bcbound.formats import read_channel, rows_to_csv
from bcbound.regions import claim_check
from bcbound.search import SearchConfig, scan_region

INPUTS = Path(__file__).parent / "inputs"
CHANNELS = ("product_channel.json", "bsc01_pair.json", "random222_seed7.json")


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--restarts", type=int, default=12)
    ap.add_argument("--cards", type=int, nargs=4, default=(2, 2, 2, 2))
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", type=Path)
    args = ap.parse_args(argv)

    cfg = SearchConfig(cards=tuple(args.cards), restarts=args.restarts, seed=args.seed, jobs=args.jobs)
    rows, worst = [], np.inf
    t0 = time.perf_counter()
    for name in CHANNELS:
        ch = read_channel(INPUTS / name)
        sample = scan_region(ch, cfg)
        slacks = []
        for p in sample.points:
            rep = claim_check(p.scheme, ch)
            slacks.append(rep.slacks.min_slack)
            rows.append([name, *p.lam, *p.rate, rep.residual_inf, rep.slacks.min_slack, rep.verdict])
        worst = min(worst, min(slacks, default=np.inf))
        print(f"{name:24s} points={len(sample.points):3d} failures={sample.failures:3d} "
              f"min_slack={min(slacks, default=float('nan')):+.3e}")
    print(f"total points={len(rows)} worst slack={worst:+.3e} time={time.perf_counter() - t0:.1f}s")
    if args.out:
        header = ["channel", "lambda1", "lambda2", "R1", "R2", "residual_inf", "min_slack", "verdict"]
        args.out.write_text(rows_to_csv(header, rows))
    return 0 if all(r[-1] == "pass" for r in rows) else 4


if __name__ == "__main__":
    raise SystemExit(main())
