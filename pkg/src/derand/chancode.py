"""Channels, seeded code ensembles, brute-force decoders and Justesen concatenation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import caps
from .errors import (
    AlphabetMismatch,
    Ambiguous,
    BadParams,
    BadRange,
    NotLinear,
    OuterDecodingFailed,
    SizeMismatch,
    TooLarge,
)
from .field import make_field
from .lincode import (
    ERASED,
    LinearCode,
    all_vectors,
    encode,
    erasure_decode,
    erasure_ok,
    nullspace,
    rank,
    rref,
    rs_decode,
)
from .prand import CONDENSER, SeededMap, digits_index, index_digits, linear_map
from .probdist import Dist


@dataclass
class Channel:
    kind: str
    p: float = 0.0
    q: int = 2
    noise: Dist | None = None
    n: int | None = None

    def __post_init__(self):
        if self.kind in ("bec", "bsc"):
            if not 0 <= self.p < 1 and not (self.kind == "bec" and self.p == 1):
                raise BadRange(f"p={self.p} outside [0, 1)")
        elif self.kind == "additive":
            if self.noise is None or self.n is None:
                raise BadParams("additive channels need a noise law and a block length")
            if self.noise.n != self.q**self.n:
                raise BadParams("noise law must live on q^n blocks")
        else:
            raise BadParams(f"unknown channel {self.kind!r}")

    def describe(self) -> dict:
        return {"kind": self.kind, "p": self.p, "q": self.q, "n": self.n}


def bec(p: float) -> Channel:
    return Channel("bec", p)


def bsc(p: float) -> Channel:
    return Channel("bsc", p)


def transmit(ch: Channel, word, rng: np.random.Generator):
    w = np.asarray(word, dtype=np.int64)
    if w.size and (w.min() < 0 or w.max() >= ch.q):
        raise AlphabetMismatch(f"word has symbols outside [0, {ch.q})")
    if ch.kind == "bec":
        hit = rng.random(w.shape) < ch.p
        return [ERASED if h else int(s) for s, h in zip(w, hit)]
    if ch.kind == "bsc":
        return w ^ (rng.random(w.shape) < ch.p).astype(np.int64)
    if w.shape != (ch.n,):
        raise SizeMismatch(f"additive channel acts on blocks of length {ch.n}")
    z = int(rng.choice(ch.noise.n, p=[float(x) for x in ch.noise.mass]))
    return (w + index_digits(z, ch.q, ch.n)) % ch.q


# -- binomial noise as a mixture of flat shells --------------------------

def bsc_decomposition(n: int, p: float, eta: float | None = None) -> dict:
    """Split the n-bit BSC noise into flat weight shells |w - np| <= n eta plus a remainder."""
    eta = 0.1 * p if eta is None else eta
    lo, hi = math.ceil(n * (p - eta)), math.floor(n * (p + eta))
    shells = []
    rest = 0.0
    for i in range(n + 1):
        w = math.comb(n, i) * p**i * (1 - p) ** (n - i)
        if lo <= i <= hi:
            shells.append((w, i))
        else:
            rest += w
    return {"eta": eta, "shells": shells, "remainder_mass": rest, "range": (lo, hi)}


def shell_dist(n: int, i: int) -> Dist:
    W = np.array([bin(x).count("1") for x in range(1 << n)])
    return Dist.flat(1 << n, np.nonzero(W == i)[0].tolist(), backend="double")


def bsc_noise(n: int, p: float) -> Dist:
    W = np.array([bin(x).count("1") for x in range(1 << n)])
    return Dist((p**W) * (1 - p) ** (n - W), "double")


def reassemble(n: int, dec: dict, p: float) -> Dist:
    """Mix the shells back with the remainder restricted to the other weights."""
    W = np.array([bin(x).count("1") for x in range(1 << n)])
    mass = np.zeros(1 << n)
    lo, hi = dec["range"]
    for w, i in dec["shells"]:
        mass[W == i] += w / math.comb(n, i)
    out = (W < lo) | (W > hi)
    mass[out] += (p ** W[out]) * (1 - p) ** (n - W[out])
    return Dist(mass, "double")


# -- ensembles -------------------------------------------------------------

@dataclass(eq=False)
class CodeEnsemble:
    kind: str
    source: SeededMap
    codes: list
    ranks: list
    repairs: list = dc_field(default_factory=list)

    @property
    def size(self) -> int:
        return len(self.codes)

    def __getitem__(self, u: int) -> LinearCode:
        return self.codes[u]

    def describe(self) -> dict:
        return {"kind": self.kind, "size": self.size, "map": self.source.descriptor(),
                "repairs": self.repairs, "min_rank": min(self.ranks)}


def _parity_rows(ctx, H) -> np.ndarray:
    R, piv = rref(ctx, H)
    return R[: len(piv)]


def ensemble(kind: str, f: SeededMap, seeds: Sequence[int] | None = None) -> CodeEnsemble:
    """F: codes with parity checks M_u.  G: codes generated by M_u (rank-deficient seeds repaired)."""
    if not f.linear or f.matrix_fn is None:
        raise NotLinear("ensembles need a linear map with per-seed matrices")
    ctx = f.field
    seeds = range(f.T) if seeds is None else list(seeds)
    codes, ranks, repairs = [], [], []
    for u in seeds:
        A = np.asarray(f.matrix(u), dtype=np.int64)
        r = rank(ctx, A)
        ranks.append(r)
        if kind == "F":
            H = _parity_rows(ctx, A)
            codes.append(LinearCode(ctx, nullspace(ctx, H), kind="F", parity=H, meta={"seed": u}))
        elif kind == "G":
            k, n = A.shape
            if r < k:
                A = np.hstack([np.eye(k, dtype=np.int64), np.zeros((k, n - k), dtype=np.int64)])
                repairs.append(u)
            codes.append(LinearCode(ctx, A, kind="G", meta={"seed": u}))
        else:
            raise BadParams(f"unknown ensemble {kind!r}")
    return CodeEnsemble(kind, f, codes, ranks, repairs)


def erasure_pattern_ok(code: LinearCode, S: Sequence[int]) -> bool:
    if len(S) > code.n - code.k:
        return False
    return erasure_ok(code, S)


def failing_seed_fraction(f: SeededMap, erased: Sequence[int]) -> Fraction:
    """Seeds whose unrepaired matrix loses rank on the unerased columns."""
    keep = [i for i in range(f.n) if i not in set(erased)]
    bad = 0
    for u in range(f.T):
        A = np.asarray(f.matrix(u), dtype=np.int64)
        if rank(f.field, A[:, keep]) < A.shape[0]:
            bad += 1
    return Fraction(bad, f.T)


def ensemble_as_map(ens: CodeEnsemble) -> SeededMap:
    """Repackage the parity matrices of an F ensemble as a linear seeded map."""
    mats = [np.asarray(ens.source.matrix(c.meta["seed"]), dtype=np.int64) for c in ens.codes]
    return linear_map(ens.source.field, mats, role=CONDENSER, provenance="ensemble-parity")


# -- brute-force syndrome decoding -----------------------------------------

def _support(c) -> np.ndarray:
    if isinstance(c, Dist):
        return np.array(c.support(), dtype=np.int64)
    return np.sort(np.asarray(c, dtype=np.int64))


def _syndromes(code: LinearCode, idx: np.ndarray) -> np.ndarray:
    Z = index_digits(idx, code.q, code.n)
    H = code.parity
    if H.shape[0] == 0:
        return np.zeros(len(idx), dtype=np.int64)
    S = (Z @ H.T) % code.q if code.field.base is None and code.field.m == 1 else None
    if S is None:
        from .lincode import matmul
        S = matmul(code.field, Z, H.T)
    return digits_index(S, code.q)


def bsc_brute_decode(code: LinearCode, components: Sequence, received) -> np.ndarray:
    """Codeword y with received = y + z for z in some component support.

    Later components (smaller supports) win ties, then the smallest z.  With
    no consistent pair the zero codeword is returned.
    """
    supports = [_support(c) for c in components]
    if sum(len(s) for s in supports) * code.n > caps.get("decode"):
        raise TooLarge("noise support too large for brute-force decoding")
    r = np.asarray(received, dtype=np.int64)
    s_r = _syndromes(code, np.array([digits_index(r, code.q)]))[0]
    for sup in reversed(supports):
        hits = sup[_syndromes(code, sup) == s_r]
        if len(hits):
            z = index_digits(int(hits[0]), code.q, code.n)
            return code.field.vsub(r, z)
    return np.zeros(code.n, dtype=np.int64)


def exact_decoding_error(code: LinearCode, support) -> Fraction:
    """Error of the brute-force decoder on flat noise: 1 - distinct syndromes / |support|."""
    sup = _support(support)
    return 1 - Fraction(len(np.unique(_syndromes(code, sup))), len(sup))


# -- maximum-likelihood tables for tiny binary inner codes -----------------

def ml_table(code: LinearCode) -> np.ndarray:
    """Received word index -> message index of a nearest codeword (smallest message on ties)."""
    if code.q != 2 or code.n > 16:
        raise TooLarge("ML tables are for binary codes of length <= 16")
    msgs = all_vectors(2, code.k)
    cws = digits_index((msgs @ code.generator) % 2, 2)
    words = np.arange(1 << code.n, dtype=np.int64)
    x = words[:, None] ^ cws[None, :]
    dist = np.zeros_like(x)
    for b in range(code.n):
        dist += (x >> b) & 1
    return dist.argmin(axis=1)


def decode_block(code: LinearCode, received, kind: str = "bsc") -> np.ndarray:
    if kind == "bec":
        return erasure_decode(code, received)
    tab = getattr(code, "_ml", None)
    if tab is None:
        tab = code._ml = ml_table(code)
    return index_digits(int(tab[digits_index(np.asarray(received, dtype=np.int64), 2)]), 2, code.k)


# -- Justesen concatenation ------------------------------------------------

@dataclass(eq=False)
class JustesenScheme:
    outer: LinearCode
    inners: list

    def __post_init__(self):
        if len(self.inners) != self.outer.n:
            raise SizeMismatch(f"{len(self.inners)} inner codes for outer length {self.outer.n}")
        of = self.outer.field
        for c in self.inners:
            if c.k != of.m or c.q != of.p:
                raise SizeMismatch("inner dimension must match the outer alphabet")
        self.n_inner = self.inners[0].n

    @property
    def N(self) -> int:
        return self.n_inner * self.outer.n

    @property
    def rate(self) -> float:
        return self.outer.k * self.inners[0].k / self.N


def justesen_encode(js: JustesenScheme, msg) -> np.ndarray:
    cw = encode(js.outer, msg)
    of = js.outer.field
    return np.concatenate([encode(c, of.digits(int(s))) for c, s in zip(js.inners, cw)])


def justesen_decode(js: JustesenScheme, received, kind: str = "bsc") -> np.ndarray:
    of = js.outer.field
    n2 = js.n_inner
    word = []
    for i, c in enumerate(js.inners):
        block = received[i * n2 : (i + 1) * n2]
        try:
            word.append(of.from_digits([int(v) for v in decode_block(c, block, kind)]))
        except Ambiguous:
            word.append(ERASED)
    return rs_decode(js.outer, word)


def justesen_scheme(k: int, s: int, outer_k: int, f: SeededMap) -> JustesenScheme:
    """RS outer code of length s over GF(2^k); inner codes from the first s nonzero seeds of f."""
    of = make_field(2, k)
    from .lincode import rs_code
    outer = rs_code(of, s, outer_k)
    ens = ensemble("G", f, seeds=range(1, s + 1))
    return JustesenScheme(outer, ens.codes)


# -- Monte-Carlo -----------------------------------------------------------

def wilson(fails: int, trials: int, z: float = 1.959963984540054) -> tuple[float, float]:
    if trials == 0:
        return (0.0, 1.0)
    ph = fails / trials
    den = 1 + z * z / trials
    mid = (ph + z * z / (2 * trials)) / den
    half = z * math.sqrt(ph * (1 - ph) / trials + z * z / (4 * trials * trials)) / den
    # the endpoints are exactly 0 and 1 at the extremes; avoid cancellation residue
    lo = 0.0 if fails == 0 else max(0.0, mid - half)
    hi = 1.0 if fails == trials else min(1.0, mid + half)
    return (lo, hi)


def estimate_error(system, ch: Channel, trials: int, rng: np.random.Generator) -> dict:
    """Failure rate of encode -> channel -> decode with random messages."""
    if isinstance(system, JustesenScheme):
        k, q = system.outer.k, system.outer.q
        enc = lambda m: justesen_encode(system, m)
        dec = lambda y: justesen_decode(system, y, ch.kind)
    elif isinstance(system, LinearCode):
        k, q = system.k, system.q
        enc = system.encode
        if ch.kind == "bec":
            dec = lambda y: erasure_decode(system, y)
        else:
            dec = lambda y: decode_block(system, y, ch.kind)
    else:
        raise BadParams("system must be a code or a Justesen scheme")
    fails = 0
    for _ in range(trials):
        m = rng.integers(0, q, size=k)
        y = transmit(ch, enc(m), rng)
        try:
            ok = np.array_equal(dec(y), m)
        except (OuterDecodingFailed, Ambiguous):
            ok = False
        fails += not ok
    lo, hi = wilson(fails, trials)
    return {"trials": trials, "failures": fails, "rate": fails / trials, "interval": [lo, hi],
            "mode": "montecarlo", "channel": ch.describe()}
