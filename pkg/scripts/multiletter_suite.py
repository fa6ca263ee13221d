"""Single-letter identification errors for random block codes over random channels."""

from __future__ import annotations

import argparse

import numpy as np

from bcbound.multiletter import IDENTITY_TOL, random_code, single_letter_identify
from bcbound.probcore import random_channel


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--codes", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    worst = 0.0
    for k in range(args.codes):
        s = args.seed + k
        n, m1, m2 = 1 + s % 3, 2 + (s // 3) % 3, 1 + (s // 9) % 3
        ch = random_channel(2, 2, 2, np.random.default_rng(10_000 + s))
        ident = single_letter_identify(random_code(n, m1, m2, ch.x_card, s), ch)
        err = max(c.error for c in ident.identities)
        worst = max(worst, err)
        print(f"seed={s:4d} n={n} |M1|={m1} |M2|={m2} max_error={err:.2e}")
    print(f"worst identity error over {args.codes} codes: {worst:.2e}")
    return 0 if worst <= IDENTITY_TOL else 4


if __name__ == "__main__":
    raise SystemExit(main())
