"""Trace the constrained rate region of one channel with a dense weight sweep.

    python scripts/trace_frontier.py scripts/inputs/bsc01_pair.json --angles 9 --out bsc_frontier.csv
"""

from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np

from bcbound.formats import read_channel, rows_to_csv
from bcbound.regions import frontier
from bcbound.search import SearchConfig, scan_region


def weight_sweep(k: int) -> tuple[tuple[float, float], ...]:
    ang = np.linspace(0.0, np.pi / 2, k)
    return tuple((round(float(np.cos(a)), 12), round(float(np.sin(a)), 12)) for a in ang)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("channel", type=Path)
    ap.add_argument("--angles", type=int, default=7)
    ap.add_argument("--restarts", type=int, default=6)
    ap.add_argument("--cards", type=int, nargs=4, default=(2, 2, 2, 2))
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", type=Path)
    args = ap.parse_args(argv)

    ch = read_channel(args.channel)
    cfg = SearchConfig(cards=tuple(args.cards), restarts=args.restarts, seed=args.seed, jobs=args.jobs,
                       sweep=weight_sweep(args.angles))
    sample = scan_region(ch, cfg)
    hull = frontier(sample.rates(), mode="hull")
    for r1, r2 in sorted(hull):
        print(f"{r1:.6f} {r2:.6f}")
    if args.out:
        args.out.write_text(rows_to_csv(["R1", "R2"], [list(map(float, p)) for p in sorted(hull)]))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
