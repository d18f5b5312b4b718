"""Small generator-matrix ensembles from an NW bit stream or a seeded RNG, audited against the GV bound."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field as dc_field

import numpy as np

from .errors import BadParams, BadRange, InsufficientStretch
from .field import gf
from .lincode import min_weight_of_span
from .prand import NWDesign, nw_generate
from .probdist import hq
from .seeds import child_rng

LAYOUT = "row-major, most significant bit first"


def gv_rate(q: int, delta: float) -> float:
    if not 0 <= delta <= 1:
        raise BadRange(f"delta={delta} outside [0, 1]")
    return max(0.0, 1.0 - hq(q, delta))


def meets_gv(n: int, k: int, d: int, q: int = 2) -> bool:
    return k >= n * (1 - hq(q, d / n)) - 1e-12


def gv_threshold(n: int, k: int, q: int = 2) -> int:
    """Smallest d <= n(q-1)/q whose relative distance satisfies k >= n(1 - h_q(d/n)).

    Since h_q increases on [0, (q-1)/q], every distance from this one up to
    n(q-1)/q satisfies the inequality; a code meets the bound iff d >= d*.
    """
    top = math.floor(n * (q - 1) / q)
    for d in range(1, top + 1):
        if meets_gv(n, k, d, q):
            return d
    return top + 1


@dataclass
class GVEnsembleReport:
    n: int
    k: int
    q: int
    source: dict
    count: int
    distances: list = dc_field(default_factory=list)
    d_star: int = 0
    layout: str = LAYOUT

    @property
    def fraction(self) -> float:
        return gv_fraction(self)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["fraction"] = self.fraction if self.count else None
        return out


def gv_fraction(report: GVEnsembleReport) -> float:
    if not report.distances:
        raise BadParams("empty ensemble")
    return sum(d >= report.d_star for d in report.distances) / len(report.distances)


def bits_to_matrix(bits, k: int, n: int) -> np.ndarray:
    return np.asarray(bits[: k * n], dtype=np.int64).reshape(k, n)


def derandomized_ensemble(n: int, k: int, count: int, q: int = 2, *, rng_seed: int | None = None,
                          f=None, design: NWDesign | None = None, seed_offset: int = 0) -> GVEnsembleReport:
    """Generator matrices from ``count`` seeds; exact minimum distance of each."""
    if count < 1:
        raise BadParams("count must be positive")
    ctx = gf(q)
    if design is not None:
        if q != 2:
            raise BadParams("the NW stream yields bits; use q = 2")
        if design.m < n * k:
            raise InsufficientStretch(f"design yields {design.m} bits per seed, need {n * k}")
        source = {"kind": "nw", "t": design.t, "s": design.s, "r": design.r, "m": design.m,
                  "seed_offset": seed_offset, "evaluations_per_code": n * k}
        mats = (bits_to_matrix(nw_generate(f, design, seed_offset + i), k, n) for i in range(count))
    elif rng_seed is not None:
        source = {"kind": "rng", "seed": rng_seed}
        mats = (child_rng(rng_seed, f"gv/{i}").integers(0, q, size=(k, n)) for i in range(count))
    else:
        raise BadParams("need an rng seed or an (f, design) pair")
    rep = GVEnsembleReport(n, k, q, source, count, d_star=gv_threshold(n, k, q))
    for G in mats:
        rep.distances.append(min_weight_of_span(ctx, G))
    return rep
