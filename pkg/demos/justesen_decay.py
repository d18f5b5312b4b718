"""Failure rate of rate-1/4 concatenated codes with varying inner codes.

Each outer symbol is protected by a different small inner code taken from a
seeded hash family. Longer outer codes see the inner failures average out,
so the block failure rate over a BSC(0.05) drops as the length grows.

Run:  python demos/justesen_decay.py [trials]
"""
import sys

import numpy as np

from derand.chancode import bsc, estimate_error, justesen_scheme
from derand.prand import lhl_map


def main(trials=2000):
    f = lhl_map(8, 4)
    for s in (4, 8, 16):
        js = justesen_scheme(4, s, s // 2, f)
        est = estimate_error(js, bsc(0.05), trials, np.random.default_rng(14))
        print(f"outer length {s:2d}: rate {js.rate:.2f}, failures {est['failures']}/{trials} "
              f"= {est['rate']:.4f}")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 2000)
