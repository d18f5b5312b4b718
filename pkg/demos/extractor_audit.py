"""Exact audits of two seeded maps.

The leftover-hash map (multiply by the seed in GF(2^8), keep the top bits)
and the Reed-Solomon-style GUV condenser over GF(16) are run against 100
random flat sources. Every reported error is an exact rational, not an
estimate.

Run:  python demos/extractor_audit.py
"""
import numpy as np

from derand.field import gf
from derand.prand import audit_map, flat_sources, guv_condenser, lhl_map


def main():
    rng = np.random.default_rng(1)
    for k, m in ((5, 3), (4, 2)):
        f = lhl_map(8, m, "extractor", k=k)
        rep = audit_map(f, k, flat_sources(256, 1 << k, 100, rng))
        print(f"hash n=8 k={k} m={m}: claimed {f.eps:.3f}, worst {rep['worst']} ({float(rep['worst']):.3f})")

    g = guv_condenser(gf(16), 2, 2, 4, k=4)
    rep = audit_map(g, 4, flat_sources(256, 16, 100, rng), role="lossless-condenser")
    print(f"GUV GF(16): claimed {g.eps:.3f}, worst {rep['worst']}")


if __name__ == "__main__":
    main()
