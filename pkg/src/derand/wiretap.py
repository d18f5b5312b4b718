"""Wiretap encoders built by inverting extractors, and exhaustive privacy audits.

The decoder of every scheme is an extractor; the encoder picks a uniformly
random preimage of the message.  An intruder observes some coordinates of
the transmitted block (or, for rank-metric schemes, some subfield-linear
combinations of it).  ``audit_resilience`` enumerates every (message,
randomness) pair, groups the resulting blocks by what the intruder sees,
and measures how far each conditional message law is from uniform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from itertools import combinations, product
from typing import Callable, Sequence

import numpy as np

from . import caps
from .errors import AdversaryUnsupported, BadParams, LengthMismatch, NoInverter, TooLarge
from .field import FieldCtx, gf, make_field
from .lincode import (
    LinearCode,
    all_vectors,
    erasure_decode,
    gabidulin_code,
    matmul,
    min_distance,
    nullspace,
    rank,
    rref,
    rs_code,
)
from .prand import (
    SeededMap,
    _clmul_mod,
    code_map,
    digits_index,
    gabidulin_extractor,
    index_digits,
    inverter_distance,
    lhl_map,
)

SYMBOL_SUBSET = "symbol-subset"
SUBFIELD_LINEAR = "subfield-linear"


@dataclass(eq=False)
class WiretapScheme:
    kind: str
    q: int
    n: int
    m: int
    R: int
    t: int
    eps: float
    gamma: float
    encode_all: Callable[[np.ndarray, np.ndarray], np.ndarray]
    decode_all: Callable[[np.ndarray], np.ndarray]
    field: FieldCtx | None = None
    extractor: SeededMap | None = None
    visible: tuple[int, ...] = ()
    choosable: tuple[int, ...] | None = None
    meta: dict = dc_field(default_factory=dict)

    @property
    def rate(self) -> float:
        return self.m / self.n

    @property
    def delta(self) -> float:
        return self.t / self.n

    @property
    def r_bits(self) -> float:
        return math.log2(self.R) if self.R > 1 else 0.0

    def claim(self) -> dict:
        return {"t": self.t, "eps": self.eps, "gamma": self.gamma, "q": self.q}

    def describe(self) -> dict:
        return {"kind": self.kind, "q": self.q, "n": self.n, "m": self.m, "r_bits": self.r_bits,
                "rate": self.rate, "delta": self.delta, "claimed": self.claim(),
                **{k: v for k, v in self.meta.items() if isinstance(v, (int, float, str))}}


def encode(s: WiretapScheme, msg, rng: np.random.Generator) -> np.ndarray:
    msg = np.asarray(msg, dtype=np.int64)
    if msg.shape != (s.m,):
        raise LengthMismatch(f"message must have {s.m} symbols")
    r = int(rng.integers(s.R))
    return s.encode_all(msg[None, :], np.array([r]))[0]


def decode(s: WiretapScheme, block) -> np.ndarray:
    block = np.asarray(block, dtype=np.int64)
    if block.shape[-1] != s.n:
        raise LengthMismatch(f"block must have {s.n} symbols")
    return s.decode_all(block[None, :])[0]


# -- construction -------------------------------------------------------

def _right_inverse(ctx: FieldCtx, M: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """A with M A^T = I, and a kernel basis K of M."""
    m, n = M.shape
    _, piv = rref(ctx, M)
    if len(piv) < m:
        raise NoInverter("map is not surjective")
    sub = M[:, piv]
    # invert the m x m pivot block by elimination on [sub | I]
    R, _ = rref(ctx, np.hstack([sub, np.eye(m, dtype=np.int64)]))
    inv = R[:, m:]
    A = np.zeros((m, n), dtype=np.int64)
    A[:, piv] = inv.T
    return A, nullspace(ctx, M)


def _linear_scheme(kind: str, ctx: FieldCtx, M: np.ndarray, t: int, eps: float, gamma: float,
                   extractor: SeededMap | None, meta: dict) -> WiretapScheme:
    m, n = M.shape
    A, K = _right_inverse(ctx, M)
    R = ctx.q ** K.shape[0]

    def enc(msgs, rs):
        out = matmul(ctx, msgs, A)
        if K.shape[0]:
            out = ctx.vadd(out, matmul(ctx, index_digits(rs, ctx.q, K.shape[0]), K))
        return out

    def dec(blocks):
        return matmul(ctx, blocks, M.T)

    return WiretapScheme(kind, ctx.q, n, m, R, t, eps, gamma, enc, dec, ctx, extractor, meta=meta)


def _map_scheme(f: SeededMap, t: int, eps: float, gamma: float) -> WiretapScheme:
    """Scheme from any seedless map with an inverter (scalar loops)."""
    q = f.in_q
    R = f.rand_count(0)

    def enc(msgs, rs):
        ys = digits_index(msgs, f.out_q)
        xs = np.array([f.invert(int(y), int(r)) for y, r in zip(ys, rs)], dtype=np.int64)
        return index_digits(xs, q, f.n)

    def dec(blocks):
        return index_digits(f.batch(digits_index(blocks, q), 0), f.out_q, f.l)

    return WiretapScheme("code-map", q, f.n, f.l, R, t, eps, gamma, enc, dec, f.field, f,
                         meta={"provenance": f.provenance})


def side_channel_eps(n: int, m: int, t: int) -> Fraction:
    """Worst strong error of the linear hash over nonzero seeds on bit-fixing sources
    with n - t free bits, computed from the hash table directly."""
    f = lhl_map(n, m)
    xs = np.arange(1 << n, dtype=np.int64)
    tab = np.stack([f.batch(xs, a) for a in range(1, 1 << n)])  # (T-1, N)
    D = index_digits(xs, 2, n)
    M = 1 << m
    W = 1 << t
    K = 1 << (n - t)
    T1 = tab.shape[0]
    seed_base = (np.arange(T1, dtype=np.int64) * (W * M))[:, None]
    worst = Fraction(0)
    for S in combinations(range(n), t):
        wid = digits_index(D[:, list(S)], 2) if t else np.zeros_like(xs)
        keys = seed_base + (wid * M)[None, :] + tab
        C = np.bincount(keys.ravel(), minlength=T1 * W * M).reshape(T1, W, M)
        num = np.abs(C * M - K).sum(axis=2).sum(axis=0)  # summed over seeds, per w
        worst = max(worst, Fraction(int(num.max()), 2 * K * M * T1))
    return worst


def make_scheme(kind: str, params: dict | None = None, **kw) -> WiretapScheme:
    p = dict(params or {}, **kw)
    if kind == "mds":
        q, n, k = p["q"], p["n"], p["k"]
        if n > q:
            raise BadParams(f"no Reed-Solomon code of length {n} over GF({q})")
        code = rs_code(gf(q), n, k)
        min_distance(code)
        f = code_map(code, "gen-extractor")
        return _linear_scheme("mds", code.field, code.generator, n - k, 0.0, 0.0, f,
                              {"code": "rs", "d": code.min_distance})
    if kind == "code-map":
        f: SeededMap = p["map"]
        if not f.has_inverter:
            raise NoInverter("the map has no inverter")
        if f.T != 1:
            raise BadParams("code-map schemes need a seedless map")
        g2 = inverter_distance(f)
        gamma = math.sqrt(2 * float(g2))
        t = f.n - int(math.ceil(f.k))
        if f.linear and f.field is not None:
            s = _linear_scheme("code-map", f.field, f.matrix(0), t, f.eps + gamma, gamma, f,
                               {"provenance": f.provenance})
        else:
            s = _map_scheme(f, t, f.eps + gamma, gamma)
        s.meta["inverter_distance"] = float(g2)
        return s
    if kind == "gabidulin":
        q, m, n, k = p.get("q", 2), p["m"], p["n"], p["k"]
        code = gabidulin_code(q, m, n, k)
        f = gabidulin_extractor(code)
        d = code.meta["rank_distance"]
        s = _linear_scheme("gabidulin", code.field, code.generator, d - 1, 0.0, 0.0, f,
                           {"code": "gabidulin", "rank_distance": d, "subfield_q": q})
        return s
    if kind == "side-channel":
        return _side_channel(p["n"], p["m"], p.get("t", 1))
    raise BadParams(f"unknown scheme kind {kind!r}")


def _side_channel(n: int, m: int, t: int) -> WiretapScheme:
    """Main block x (n bits) plus the hash seed a != 0 (n bits) on the side channel."""
    f = lhl_map(n, m)
    big = make_field(2, n)
    ctx_mod = sum(c << i for i, c in enumerate(big.modulus))
    shift = n - m
    free = 1 << shift
    R = ((1 << n) - 1) * free
    eps_ext = side_channel_eps(n, m, t)
    root = math.sqrt(float(eps_ext))

    def enc(msgs, rs):
        ys = digits_index(msgs, 2)
        a = 1 + rs // free
        rr = rs % free
        pre = (ys << shift) | rr
        xs = np.empty_like(pre)
        for av in np.unique(a):
            sel = a == av
            xs[sel] = _clmul_mod(big.inv(int(av)), pre[sel], ctx_mod, n)
        return np.hstack([index_digits(xs, 2, n), index_digits(a, 2, n)])

    def dec(blocks):
        xs = digits_index(blocks[:, :n], 2)
        a = digits_index(blocks[:, n:], 2)
        out = np.empty_like(xs)
        for av in np.unique(a):
            sel = a == av
            out[sel] = f.batch(xs[sel], int(av))
        return index_digits(out, 2, m)

    return WiretapScheme("side-channel", 2, 2 * n, m, R, t, root, root, enc, dec, gf(2), f,
                         visible=tuple(range(n, 2 * n)), choosable=tuple(range(n)),
                         meta={"main_bits": n, "side_bits": n, "eps_ext": float(eps_ext)})


# -- audits -------------------------------------------------------------

def enumerate_pairs(s: WiretapScheme) -> tuple[np.ndarray, np.ndarray]:
    """Every (message, randomness) pair: message indices and encoded blocks."""
    M = s.q ** s.m
    total = M * s.R
    if total > caps.get("wiretap"):
        raise TooLarge(f"{total} (message, randomness) pairs exceed the wiretap cap")
    mi = np.repeat(np.arange(M, dtype=np.int64), s.R)
    ri = np.tile(np.arange(s.R, dtype=np.int64), M)
    blocks = s.encode_all(index_digits(mi, s.q, s.m), ri)
    return mi, blocks


def check_decodability(s: WiretapScheme) -> bool:
    mi, blocks = enumerate_pairs(s)
    return bool(np.array_equal(digits_index(s.decode_all(blocks), s.q), mi))


def _conditional_stats(obs: np.ndarray, mi: np.ndarray, M: int, q: int, eps_thr: float) -> dict:
    """Distances of the message law given each observation value, and the entropy."""
    top = int(obs.max()) + 1 if obs.size else 1
    if top * M <= 1 << 24:
        C = np.bincount(obs * M + mi, minlength=top * M).reshape(top, M)
        C = C[C.sum(axis=1) > 0]
    else:
        _, inv = np.unique(obs, return_inverse=True)
        C = np.bincount(inv * M + mi).reshape(-1, M)
    rows = C.sum(axis=1)
    P = int(rows.sum())
    num = np.abs(C * M - rows[:, None]).sum(axis=1)
    dist = num / (2.0 * rows * M)
    bad = dist > eps_thr + 1e-12
    with np.errstate(divide="ignore", invalid="ignore"):
        pr = C / rows[:, None]
        h = -np.where(C > 0, pr * np.log(np.where(C > 0, pr, 1)), 0).sum(axis=1) / math.log(q)
    return {"gamma": float(rows[bad].sum()) / P,
            "eps": float(dist[~bad].max()) if (~bad).any() else 0.0,
            "worst": float(dist.max()),
            "equivocation": float((rows / P * h).sum())}


def _pairs_bayes(obs: np.ndarray, mi: np.ndarray, M: int) -> dict:
    """Conditional message laws by Bayes on the joint table (second route)."""
    joint: dict = {}
    for o, x in zip(obs.tolist(), mi.tolist()):
        joint.setdefault(o, [0] * M)[x] += 1
    out = {}
    for o, cnt in joint.items():
        tot = sum(cnt)
        out[o] = tuple(Fraction(c, tot) for c in cnt)
    return out


def subfield_maps(sub_q: int, n: int, t: int):
    """All t x n matrices over GF(sub_q) of rank t (rows in lexicographic order)."""
    ctx = gf(sub_q)
    rows = [r for r in all_vectors(sub_q, n) if r.any()]
    for combo in product(range(len(rows)), repeat=t):
        B = np.array([rows[i] for i in combo], dtype=np.int64).reshape(t, n)
        if t == 0 or rank(ctx, B) == t:
            yield B


def audit_resilience(s: WiretapScheme, t: int | None = None, mode: str = "exhaustive",
                     eps: float | None = None, adversary: str = SYMBOL_SUBSET,
                     samples: int = 200, rng: np.random.Generator | None = None,
                     observations: Sequence | None = None) -> dict:
    """Exact leakage of the scheme against every admissible observation of size t.

    ``eps`` is the bad-observation threshold (default: the scheme's claimed
    eps).  Reports gamma_meas (max over observations of the mass of bad
    values), eps_meas (max distance among good values), the worst distance
    overall and the minimum equivocation in q-ary symbols.
    """
    t = s.t if t is None else t
    thr = float(s.eps if eps is None else eps)
    mi, blocks = enumerate_pairs(s)
    M = s.q ** s.m
    if adversary == SUBFIELD_LINEAR:
        if s.kind != "gabidulin" and not s.meta.get("subfield_linear"):
            raise AdversaryUnsupported("subfield-linear observations need a rank-metric scheme")
        sub_q = s.meta["subfield_q"]
        views = list(observations) if observations is not None else list(subfield_maps(sub_q, s.n, t))
        if mode == "sampled":
            rng = rng or np.random.default_rng(0)
            views = [views[i] for i in rng.choice(len(views), size=min(samples, len(views)), replace=False)]
        obs_of = lambda B: digits_index(matmul(s.field, blocks, B.T), s.q) if B.size else np.zeros(len(mi), dtype=np.int64)
        label = lambda B: B.tolist()
    else:
        pool = s.choosable if s.choosable is not None else tuple(range(s.n))
        views = [tuple(S) for S in (observations or combinations(pool, t))]
        if mode == "sampled":
            rng = rng or np.random.default_rng(0)
            idx = rng.choice(len(views), size=min(samples, len(views)), replace=False)
            views = [views[i] for i in sorted(idx)]
        cols = np.ascontiguousarray(blocks.T)
        vis = digits_index(blocks[:, list(s.visible)], s.q) if s.visible else np.zeros(len(mi), dtype=np.int64)
        scale = s.q ** len(s.visible)

        def obs_of(S):
            acc = np.zeros(len(mi), dtype=np.int64)
            for c in S:
                acc = acc * s.q + cols[c]
            return acc * scale + vis

        label = list
    best = None
    for S in views:
        st = _conditional_stats(obs_of(S), mi, M, s.q, thr)
        if best is None:
            best = {"gamma": st["gamma"], "eps": st["eps"], "worst": st["worst"],
                    "equivocation": st["equivocation"], "worst_S": label(S)}
            continue
        if st["gamma"] > best["gamma"] or (st["gamma"] == best["gamma"] and st["worst"] > best["worst"]):
            best["worst_S"] = label(S)
        best["gamma"] = max(best["gamma"], st["gamma"])
        best["eps"] = max(best["eps"], st["eps"])
        best["worst"] = max(best["worst"], st["worst"])
        best["equivocation"] = min(best["equivocation"], st["equivocation"])
    if best is None:
        raise BadParams("no observations to audit")
    eps_m, gam_m = float(best["eps"]), float(best["gamma"])
    floor = s.m * (1 - eps_m - gam_m)
    # the entropy-from-closeness step needs more than 4 messages and eps <= 1/4
    applies = eps_m == 0 or (eps_m <= 0.25 and M > 4)
    return {
        "t": t,
        "mode": mode,
        "adversary": adversary,
        "observations": len(views),
        "threshold": float(thr),
        "gamma_meas": gam_m,
        "eps_meas": eps_m,
        "max_distance": float(best["worst"]),
        "equivocation": best["equivocation"],
        "equivocation_floor": floor,
        "floor_applies": applies,
        "floor_holds": (best["equivocation"] >= floor - 1e-9) if applies else None,
        "worst_S": best["worst_S"],
        "m": s.m,
    }


def conditional_laws_two_ways(s: WiretapScheme, S: Sequence[int]) -> tuple[dict, dict]:
    """Message laws given the view on S: Bayes on the joint vs. preimage counting."""
    mi, blocks = enumerate_pairs(s)
    M = s.q ** s.m
    cols = list(S) + list(s.visible)
    obs = digits_index(blocks[:, cols], s.q) if cols else np.zeros(len(mi), dtype=np.int64)
    bayes = _pairs_bayes(obs, mi, M)
    # preimage counting: for each view w and message x count blocks y with y|_S = w, D(y) = x,
    # weighting each block by the number of randomness values that produce it
    count: dict = {}
    all_blocks = {}
    for b in map(tuple, blocks.tolist()):
        all_blocks[b] = all_blocks.get(b, 0) + 1
    for b, mult in all_blocks.items():
        w = digits_index(np.array([b[c] for c in cols], dtype=np.int64), s.q) if cols else 0
        x = int(digits_index(s.decode_all(np.array([b], dtype=np.int64))[0], s.q))
        count.setdefault(int(w), [0] * M)[x] += mult
    direct = {w: tuple(Fraction(c, sum(v)) for c in v) for w, v in count.items()}
    return bayes, direct


# -- composition with an inner code -------------------------------------

@dataclass(eq=False)
class ComposedScheme:
    outer: WiretapScheme
    inner: LinearCode
    adversary: str

    @property
    def rate(self) -> float:
        return self.outer.rate * self.inner.rate

    @property
    def n(self) -> int:
        return self.inner.n * (self.outer.n // self.inner.k)

    def as_scheme(self) -> WiretapScheme:
        """The composition viewed as a wiretap scheme on inner codewords."""
        o, inn = self.outer, self.inner
        blocks_per = o.n // inn.k
        ctx = inn.field

        def enc(msgs, rs):
            B = o.encode_all(msgs, rs)
            parts = [matmul(ctx, B[:, j * inn.k:(j + 1) * inn.k], inn.generator) for j in range(blocks_per)]
            return np.hstack(parts)

        def dec(cws):
            out = []
            for cw in cws:
                out.append(self.decode(list(cw)))
            return np.array(out, dtype=np.int64)

        meta = dict(o.meta, composed=True)
        if self.adversary == SUBFIELD_LINEAR:
            meta["subfield_linear"] = True
        return WiretapScheme(o.kind, o.q, self.n, o.m, o.R, o.t, o.eps, o.gamma, enc, dec,
                             o.field, o.extractor, meta=meta)

    def encode(self, msg, rng) -> np.ndarray:
        s = self.as_scheme()
        return encode(s, msg, rng)

    def decode(self, word) -> np.ndarray:
        inn = self.inner
        blocks_per = self.outer.n // inn.k
        parts = []
        for j in range(blocks_per):
            seg = word[j * inn.n:(j + 1) * inn.n]
            parts.append(erasure_decode(inn, seg))
        return decode(self.outer, np.concatenate(parts))


def compose_ecc(s: WiretapScheme, inner: LinearCode, adversary: str = SYMBOL_SUBSET) -> ComposedScheme:
    if adversary == SUBFIELD_LINEAR and s.kind != "gabidulin":
        raise AdversaryUnsupported("subfield-linear observations need a rank-metric scheme")
    if adversary == SUBFIELD_LINEAR:
        sub = gf(s.meta["subfield_q"])
        if inner.field != sub:
            raise BadParams("inner code must be over the subfield")
        # a subfield-linear code acts coordinate-wise on extension symbols
        big = s.field
        G = inner.generator
        return ComposedScheme(s, LinearCode(big, G, kind=inner.kind), adversary)
    if inner.field != s.field:
        raise BadParams("inner code must share the scheme's alphabet")
    if s.n % inner.k:
        raise BadParams("inner dimension must divide the scheme block length")
    return ComposedScheme(s, inner, adversary)


def bec_success_exact(comp: ComposedScheme, p: float) -> float:
    """Probability that erasure decoding of the inner code succeeds on every block."""
    inn = comp.inner
    n = inn.n
    ok = 0.0
    for mask in range(1 << n):
        erased = [i for i in range(n) if (mask >> (n - 1 - i)) & 1]
        keep = [i for i in range(n) if i not in erased]
        if rank(inn.field, inn.generator[:, keep]) == inn.k:
            e = len(erased)
            ok += p**e * (1 - p) ** (n - e)
    return ok ** (comp.outer.n // inn.k)
