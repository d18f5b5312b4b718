"""Seeded extractors and lossless condensers, plus the exact audit that checks them.

Conventions used throughout:

* A vector over an alphabet of size q is identified with its integer index,
  coordinate 0 being the most significant digit.
* A map evaluates whole arrays of input indices for one seed at a time
  (``SeededMap.batch``); scalar calls go through ``__call__``.
* Inverters take an integer ``r`` in ``[0, rand_count)`` instead of an rng,
  so their output distribution can be enumerated exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from itertools import combinations
from typing import Callable, Iterable, Sequence

import numpy as np

from . import caps
from .errors import (
    ArityMismatch,
    BadExponentBase,
    BadLengths,
    BadParams,
    ErrorTooLarge,
    Infeasible,
    NoInverter,
    RankDeficient,
    SizeMismatch,
    TooLarge,
    UnknownDistance,
)
from .field import FieldCtx, Poly, extend, frob_pow_mod, gf, is_power_of, is_prime, make_field
from .lincode import (
    LinearCode,
    all_vectors,
    encode,
    matmul,
    min_distance,
    min_rank_distance,
    nullspace,
    rank,
    solve,
    vec_to_index,
    write_qmatrix,
)
from .probdist import uniform_distance_from_counts

EXTRACTOR = "extractor"
CONDENSER = "lossless-condenser"


def index_digits(idx, q: int, n: int) -> np.ndarray:
    """Indices (any shape) to digit arrays with a trailing axis of length n."""
    idx = np.asarray(idx, dtype=np.int64)
    out = np.empty(idx.shape + (n,), dtype=np.int64)
    rest = idx.copy()
    for i in range(n - 1, -1, -1):
        out[..., i] = rest % q
        rest //= q
    return out


def digits_index(D, q: int) -> np.ndarray:
    D = np.asarray(D, dtype=np.int64)
    out = np.zeros(D.shape[:-1], dtype=np.int64)
    for i in range(D.shape[-1]):
        out = out * q + D[..., i]
    return out


@dataclass(eq=False)
class SeededMap:
    n: int
    in_q: int
    T: int
    l: int
    out_q: int
    role: str
    k: float
    eps: float
    linear: bool
    batch: Callable[[np.ndarray, int], np.ndarray]
    provenance: str
    field: FieldCtx | None = None
    matrix_fn: Callable[[int], np.ndarray] | None = None
    invert_fn: Callable[[int, int, int], int] | None = None
    rand_count_fn: Callable[[int], int] | None = None
    meta: dict = dc_field(default_factory=dict)

    @property
    def t(self) -> float:
        return math.log2(self.T)

    @property
    def in_size(self) -> int:
        return self.in_q**self.n

    @property
    def out_size(self) -> int:
        return self.out_q**self.l

    def __call__(self, x: int, seed: int = 0) -> int:
        return int(self.batch(np.array([x], dtype=np.int64), seed)[0])

    def table(self) -> np.ndarray:
        """Outputs for every (seed, input) pair, shape (T, in_size)."""
        if self.T * self.in_size > caps.get("audit"):
            raise TooLarge(f"{self.T} x {self.in_size} table exceeds the audit cap")
        xs = np.arange(self.in_size, dtype=np.int64)
        return np.stack([self.batch(xs, u) for u in range(self.T)])

    def matrix(self, seed: int = 0) -> np.ndarray:
        if self.matrix_fn is None:
            raise BadParams("map has no per-seed matrix")
        return self.matrix_fn(seed)

    @property
    def has_inverter(self) -> bool:
        return self.invert_fn is not None

    def rand_count(self, seed: int = 0) -> int:
        if self.rand_count_fn is None:
            raise NoInverter("map has no inverter")
        return self.rand_count_fn(seed)

    def invert(self, y: int, r: int, seed: int = 0) -> int:
        if self.invert_fn is None:
            raise NoInverter("map has no inverter")
        return self.invert_fn(y, r, seed)

    def invert_batch(self, ys, rs, seed: int = 0) -> np.ndarray:
        """Vectorised inverter; falls back to the scalar one."""
        if self.invert_fn is None:
            raise NoInverter("map has no inverter")
        fast = getattr(self.invert_fn, "batch", None)
        if fast is not None:
            return fast(ys, rs, seed)
        return np.array([self.invert_fn(int(y), int(r), seed) for y, r in zip(ys, rs)], dtype=np.int64)

    def sample_inverse(self, y: int, rng: np.random.Generator, seed: int = 0) -> int:
        return self.invert(y, int(rng.integers(self.rand_count(seed))), seed)

    def descriptor(self) -> dict:
        return {"role": self.role, "n": self.n, "t": self.t, "l": self.l, "k": self.k,
                "eps": self.eps, "linear": self.linear, "provenance": self.provenance}

    def to_json(self) -> str:
        return json.dumps(self.descriptor(), sort_keys=True)

    def dump_matrices(self) -> list[str]:
        q = self.field.q if self.field is not None else self.in_q
        return [write_qmatrix(q, self.matrix(u)) for u in range(self.T)]


# -- linear-map helpers -------------------------------------------------

def _linear_inverter(ctx: FieldCtx, matrix_fn, l: int, n: int):
    """Inverter for x -> M_u x: particular solution plus kernel combination r."""
    cache: dict = {}

    def prep(u):
        if u not in cache:
            M = matrix_fn(u)
            if rank(ctx, M) < l:
                cache[u] = None
            else:
                cache[u] = (M, nullspace(ctx, M))
        return cache[u]

    def count(u):
        p = prep(u)
        if p is None:
            raise NoInverter(f"seed {u} is not surjective")
        return ctx.q ** p[1].shape[0]

    def inv(y, r, u):
        p = prep(u)
        if p is None:
            raise NoInverter(f"seed {u} is not surjective")
        M, K = p[0], p[1]
        x0, _ = solve(ctx, M, index_digits(y, ctx.q, l))
        if K.shape[0]:
            coef = index_digits(r, ctx.q, K.shape[0])
            x0 = ctx.vadd(x0, matmul(ctx, coef[None, :], K)[0])
        return int(digits_index(x0, ctx.q))

    def inv_batch(ys, rs, u):
        # the particular solution is linear in y, so solve once per unit vector
        p = prep(u)
        if p is None:
            raise NoInverter(f"seed {u} is not surjective")
        M, K = p[0], p[1]
        if len(p) == 2:
            P = np.array([solve(ctx, M, row)[0] for row in np.eye(l, dtype=np.int64)]).reshape(l, n)
            cache[u] = p = (M, K, P)
        P = p[2]
        X = matmul(ctx, index_digits(np.asarray(ys, dtype=np.int64), ctx.q, l), P)
        if K.shape[0]:
            X = ctx.vadd(X, matmul(ctx, index_digits(np.asarray(rs, dtype=np.int64), ctx.q, K.shape[0]), K))
        return digits_index(X, ctx.q)

    inv.batch = inv_batch
    return inv, count


def _linear_batch(ctx: FieldCtx, matrix_fn, n: int):
    def batch(xs, u):
        X = index_digits(xs, ctx.q, n)
        Y = matmul(ctx, X, matrix_fn(u).T)
        return digits_index(Y, ctx.q)

    return batch


def linear_map(ctx: FieldCtx, matrices: Sequence[np.ndarray] | np.ndarray, role: str = EXTRACTOR,
               k: float = 0, eps: float = 0, provenance: str = "linear") -> SeededMap:
    """Seeded map x -> M_u x from an explicit list of matrices."""
    mats = [np.asarray(M, dtype=np.int64) for M in (matrices if isinstance(matrices, (list, tuple)) else [matrices])]
    l, n = mats[0].shape
    mfn = mats.__getitem__
    inv, cnt = _linear_inverter(ctx, mfn, l, n)
    return SeededMap(n, ctx.q, len(mats), l, ctx.q, role, k, eps, True, _linear_batch(ctx, mfn, n),
                     provenance, ctx, mfn, inv, cnt)


# -- leftover hash ------------------------------------------------------

def _clmul_mod(a: int, xs: np.ndarray, mod: int, n: int) -> np.ndarray:
    """a * xs in GF(2^n) for an array xs, via shift-and-add."""
    acc = np.zeros_like(xs)
    x = xs.copy()
    top = 1 << n
    for i in range(n):
        if (a >> i) & 1:
            acc ^= x
        x <<= 1
        x ^= np.where(x & top, mod, 0)
    return acc


def lhl_map(n: int, m: int, regime: str = EXTRACTOR, k: float | None = None,
            eps: float | None = None) -> SeededMap:
    """Linear hash h_a(x) = top m bits of a*x in GF(2^n), one seed per field element.

    With ``k`` given, ``eps`` is the best error the hash lemma guarantees in
    the chosen regime: 2^(-(k-m)/2) as an extractor, 2^(-(m-k)/2) as a
    lossless condenser.
    """
    if not 1 <= m <= n:
        raise BadLengths(f"need 1 <= m <= n (got n={n}, m={m})")
    ctx = make_field(2, n)
    mod = sum(c << i for i, c in enumerate(ctx.modulus))
    shift = n - m
    if k is not None and eps is None:
        gap = (k - m) if regime == EXTRACTOR else (m - k)
        eps = 2.0 ** (-gap / 2) if gap > 0 else 1.0
    role = EXTRACTOR if regime == EXTRACTOR else CONDENSER

    def batch(xs, a):
        return _clmul_mod(int(a), np.asarray(xs, dtype=np.int64), mod, n) >> shift

    def matrix(a):
        cols = batch(1 << np.arange(n - 1, -1, -1, dtype=np.int64), a)
        return index_digits(cols, 2, m).T

    def count(a):
        if a == 0:
            raise NoInverter("the zero seed is not surjective")
        return 1 << shift

    def inv(y, r, a):
        if a == 0:
            if y == 0:
                return r
            raise NoInverter("the zero seed only hits 0")
        return ctx.mul(ctx.inv(a), (y << shift) | r)

    return SeededMap(n, 2, 1 << n, m, 2, role, k if k is not None else 0.0,
                     eps if eps is not None else 0.0, True, batch, "lhl", gf(2), matrix, inv, count,
                     meta={"field": ctx.spec()})


# -- GUV condenser ------------------------------------------------------

def guv_condenser(ctx: FieldCtx, n: int, h: int, l: int, k: float | None = None,
                  linear: bool = True) -> SeededMap:
    """Seed z in GF(q); output (F(z), F_1(z), ..., F_{l-1}(z)) with F_i = F^(h^i) mod g."""
    q = ctx.q
    bound = (n - 1) * (h - 1) * l
    if q <= bound:
        raise ErrorTooLarge(f"error {bound}/{q} is not below 1")
    if linear and not is_power_of(h, ctx.p):
        raise BadExponentBase(f"h={h} is not a power of {ctx.p}")
    kmax = l * math.log2(h)
    if k is None:
        k = kmax
    elif k > kmax + 1e-12:
        raise BadParams(f"k={k} exceeds l*log h = {kmax}")
    if q**n > caps.get("field_q"):
        raise TooLarge("input space exceeds the field cap")
    E = make_field(ctx.p, n) if (ctx.base is None and ctx.m == 1) else extend(ctx, n)
    N = q**n
    coeffs = index_digits(np.arange(N), q, n)  # coordinate j = coefficient of x^j
    blocks = np.empty((l, N, n), dtype=np.int64)
    for x in range(N):
        F = Poly(ctx, coeffs[x])
        for i in range(l):
            Fi = frob_pow_mod(E, F, h, i, linear=linear)
            c = list(Fi.coeffs) + [0] * (n - len(Fi.coeffs))
            blocks[i, x] = c[:n]

    def batch(xs, z):
        xs = np.asarray(xs, dtype=np.int64)
        out = np.zeros(xs.shape, dtype=np.int64)
        for i in range(l):
            D = blocks[i, xs]
            v = D[..., n - 1]
            for j in range(n - 2, -1, -1):
                v = ctx.vadd(ctx.vmul(v, z), D[..., j])
            out = out * q + v
        return out

    return SeededMap(n, q, q, l, q, CONDENSER, k, bound / q, linear, batch, "guv", ctx,
                     meta={"h": h, "ext": E.spec()})


# -- code-derived maps ----------------------------------------------------

def code_map(code: LinearCode, mode: str = "gen-extractor", d: int | None = None) -> SeededMap:
    """Seedless x -> G x^T (extractor) or x -> H x^T (lossless condenser)."""
    if d is None:
        d = code.min_distance
    if d is None:
        raise UnknownDistance("code minimum distance is not known")
    ctx = code.field
    n = code.n
    if mode == "gen-extractor":
        M, role, k = code.generator, EXTRACTOR, n - d + 1
    elif mode == "parity-condenser":
        M, role, k = code.parity, CONDENSER, d - 1
    else:
        raise BadParams(f"unknown mode {mode!r}")
    mfn = lambda u: M
    inv, cnt = _linear_inverter(ctx, mfn, M.shape[0], n)
    return SeededMap(n, ctx.q, 1, M.shape[0], ctx.q, role, k, 0.0, True,
                     _linear_batch(ctx, mfn, n), f"code:{code.kind}:{mode}", ctx, mfn, inv, cnt,
                     meta={"d": d})


def gabidulin_extractor(code: LinearCode) -> SeededMap:
    d = code.meta.get("rank_distance") or min_rank_distance(code)
    code.meta["rank_distance"] = d
    return code_map(code, "gen-extractor", d=d)


# -- duality ------------------------------------------------------------

def dual_map(ctx: FieldCtx, G, claims: Iterable[tuple[int, int]] = ()) -> tuple[np.ndarray, list[dict]]:
    """H spanning the right kernel of G, with each (k, k') claim mapped to its dual."""
    G = np.asarray(G, dtype=np.int64)
    m, n = G.shape
    if rank(ctx, G) != m:
        raise RankDeficient("G must have full row rank")
    H = nullspace(ctx, G)
    report = [{"k": k, "k_out": kp, "dual_k": n - k, "dual_k_out": n - k + kp - m} for k, kp in claims]
    return H, report


def orthogonal_source(ctx: FieldCtx, A) -> np.ndarray:
    """Basis of the dual subspace of the row space of A."""
    return nullspace(ctx, A)


def duality_ranks(ctx: FieldCtx, G, A_G) -> tuple[int, int, np.ndarray, np.ndarray]:
    """rank(G A_G^T) and rank(H A_H^T) for H the dual of G and A_H the dual of A_G."""
    H, _ = dual_map(ctx, G)
    A_H = orthogonal_source(ctx, A_G)
    r1 = rank(ctx, matmul(ctx, G, np.asarray(A_G).T))
    r2 = rank(ctx, matmul(ctx, H, A_H.T)) if H.size and A_H.size else 0
    return r1, r2, H, A_H


# -- graphs and the walk map --------------------------------------------

@dataclass(eq=False)
class LabeledGraph:
    N: int
    d: int
    L: np.ndarray  # L[v, t] = neighbour of v along label t
    gens: tuple | None = None

    def __post_init__(self):
        self.L = np.asarray(self.L, dtype=np.int64)
        if self.L.shape != (self.N, self.d):
            raise BadParams("label table must be N x d")
        self._back = np.empty_like(self.L)
        for t in range(self.d):
            col = self.L[:, t]
            if len(np.unique(col)) != self.N:
                raise BadParams(f"label {t} is not consistent")
            self._back[col, t] = np.arange(self.N)
        A = self.adjacency()
        if not np.array_equal(A, A.T):
            raise BadParams("graph is not undirected")
        self._lam = None

    @classmethod
    def cayley(cls, N: int, gens: Sequence[int]) -> LabeledGraph:
        gens = tuple(int(g) % N for g in gens)
        v = np.arange(N)
        return cls(N, len(gens), (v[:, None] + np.array(gens)[None, :]) % N, gens)

    @classmethod
    def cycle(cls, N: int) -> LabeledGraph:
        return cls.cayley(N, (1, -1))

    def adjacency(self) -> np.ndarray:
        A = np.zeros((self.N, self.N), dtype=np.int64)
        np.add.at(A, (np.repeat(np.arange(self.N), self.d), self.L.ravel()), 1)
        return A

    def step_back(self, v: int, t: int) -> int:
        return int(self._back[v, t])

    @property
    def lam(self) -> float:
        """Second largest absolute eigenvalue of A/d."""
        if self._lam is None:
            ev = np.sort(np.abs(np.linalg.eigvalsh(self.adjacency() / self.d)))[::-1]
            self._lam = float(ev[1]) if self.N > 1 else 0.0
        return self._lam

    def lam_characters(self) -> float:
        """Same quantity from the characters of Z_N (Cayley graphs only)."""
        if self.gens is None:
            raise BadParams("not a Cayley graph")
        j = np.arange(1, self.N)[:, None]
        vals = np.cos(2 * np.pi * j * np.array(self.gens)[None, :] / self.N).sum(axis=1) / self.d
        return float(np.abs(vals).max()) if self.N > 1 else 0.0


def walk_bound_bits(m: int, n: int, k: int, d: int, lam: float) -> float:
    """Exponent s of the 2^(s/2) error bound of the walk extractor."""
    ll = 2 * math.log2(lam) if lam > 0 else -math.inf
    if k <= n - m:
        return m * math.log2(d) + k * ll
    return (n - k) * math.log2(d) + (n - m) * ll


def walk_map(graph: LabeledGraph, n: int, k: int | None = None) -> SeededMap:
    """First m symbols pick a vertex; the remaining n-m symbols are walk labels."""
    d, N = graph.d, graph.N
    m = round(math.log(N, d))
    if d**m != N:
        raise SizeMismatch(f"{N} vertices is not a power of the degree {d}")
    if n < m:
        raise BadParams("n must be at least m")
    steps = n - m
    L = graph.L

    def batch(xs, _u=0):
        D = index_digits(xs, d, n)
        v = digits_index(D[..., :m], d)
        for j in range(m, n):
            v = L[v, D[..., j]]
        return v

    def inv(y, r, _u=0):
        W = index_digits(r, d, steps) if steps else np.zeros(0, dtype=np.int64)
        v = int(y)
        for t in reversed(W):
            v = graph.step_back(v, int(t))
        return vec_to_index(list(index_digits(v, d, m)) + list(W), d)

    eps = 2 ** (walk_bound_bits(m, n, k, d, graph.lam) / 2) if k is not None else 1.0
    return SeededMap(n, d, 1, m, d, EXTRACTOR, k if k is not None else 0, eps, False, batch,
                     "walk", None, None, inv, lambda _u=0: d**steps,
                     meta={"lambda": graph.lam, "m": m})


# -- designs and generators -----------------------------------------------

@dataclass(frozen=True)
class NWDesign:
    t: int
    s: int
    r: int
    sets: tuple[tuple[int, ...], ...]

    @property
    def m(self) -> int:
        return len(self.sets)

    def check(self) -> bool:
        if any(len(S) != self.s for S in self.sets):
            return False
        return all(len(set(a) & set(b)) <= self.r for a, b in combinations(self.sets, 2))


def nw_design(t: int, m: int, s: int, r: int) -> NWDesign:
    """Greedy: scan s-subsets of [t] lexicographically, keep those meeting the cap."""
    if s > t:
        raise Infeasible("set size exceeds the universe")
    kept: list[tuple[int, ...]] = []
    masks: list[int] = []
    for S in combinations(range(t), s):
        mask = sum(1 << i for i in S)
        if all((mask & o).bit_count() <= r for o in masks):
            kept.append(S)
            masks.append(mask)
            if len(kept) == m:
                return NWDesign(t, s, r, tuple(kept))
    raise Infeasible(f"greedy found only {len(kept)} of {m} sets")


def _project(seed: int, S: Sequence[int], t: int) -> int:
    # seed bit j (coordinate j, MSB first) sits at integer bit t-1-j
    idx = 0
    for j in S:
        idx = (idx << 1) | ((seed >> (t - 1 - j)) & 1)
    return idx


def nw_generate(f, design: NWDesign, seed: int, mode: str = "plain", code: LinearCode | None = None,
                x=None) -> np.ndarray:
    """Output bit i is f (or the codeword of x) read at seed restricted to S_i."""
    if mode == "plain":
        if callable(f):
            table = None
        else:
            table = np.asarray(f, dtype=np.int64)
            if table.size != 1 << design.s:
                raise ArityMismatch(f"truth table has {table.size} entries, need 2^{design.s}")
        out = np.empty(design.m, dtype=np.int64)
        for i, S in enumerate(design.sets):
            a = _project(seed, S, design.t)
            out[i] = table[a] if table is not None else int(f(a)) & 1
        return out
    if mode == "trevisan":
        if code is None or code.n != 1 << design.s:
            raise ArityMismatch("code length must be 2^s")
        cw = encode(code, np.asarray(x, dtype=np.int64))
        return np.array([cw[_project(seed, S, design.t)] for S in design.sets], dtype=np.int64)
    raise BadParams(f"unknown mode {mode!r}")


# -- sources --------------------------------------------------------------

def flat_sources(N: int, K: int, count: int, rng: np.random.Generator) -> list[np.ndarray]:
    return [np.sort(rng.choice(N, size=K, replace=False)) for _ in range(count)]


def symbol_fixing_source(q: int, n: int, free: Sequence[int], fixed_vals) -> np.ndarray:
    """Inputs agreeing with ``fixed_vals`` outside ``free``; free coordinates uniform."""
    base = np.array(fixed_vals, dtype=np.int64)
    F = all_vectors(q, len(free))
    X = np.repeat(base[None, :], len(F), axis=0)
    X[:, list(free)] = F
    return digits_index(X, q)


def affine_source(ctx: FieldCtx, A, shift) -> np.ndarray:
    """Inputs c A + shift over all coefficient vectors c."""
    A = np.asarray(A, dtype=np.int64)
    C = all_vectors(ctx.q, A.shape[0])
    X = ctx.vadd(matmul(ctx, C, A), np.asarray(shift, dtype=np.int64)[None, :])
    return digits_index(X, ctx.q)


# -- audit ------------------------------------------------------------

def _seed_counts(f: SeededMap, src: np.ndarray, tab: np.ndarray | None) -> np.ndarray:
    M = f.out_size
    out = tab[:, src] if tab is not None else np.stack([f.batch(src, u) for u in range(f.T)])
    keys = (np.arange(f.T)[:, None] * M + out).ravel()
    return np.bincount(keys, minlength=f.T * M).reshape(f.T, M)


def seed_errors(f: SeededMap, src, k: float, role: str, tab=None) -> list[Fraction]:
    """Per-seed error of the output on a flat source (exact when 2^k is an integer)."""
    src = np.asarray(src, dtype=np.int64)
    K = len(src)
    C = _seed_counts(f, src, tab)
    M = f.out_size
    errs = []
    for row in C:
        if role == EXTRACTOR:
            errs.append(uniform_distance_from_counts(row, K, M))
        else:
            errs.append(_excess(row, K, k))
    return errs


def _excess(counts, K: int, k: float):
    # sum_y max(c/K - 2^-k, 0)
    if float(k).is_integer() and k >= 0:
        cap = 1 << int(k)
        num = int(np.maximum(np.asarray(counts) * cap - K, 0).sum())
        return Fraction(num, K * cap)
    cap = 2.0 ** (-k)
    return float(np.maximum(np.asarray(counts) / K - cap, 0).sum())


def audit_map(f: SeededMap, k: float, sources: Iterable[np.ndarray], role: str | None = None,
              eps: float | None = None, delta: float = 0.5) -> dict:
    """Exact error of f on each flat source, read off the joint (seed, output) law.

    The joint error equals the average of the per-seed errors, for both the
    extractor target (uniform) and the lossless target (min-entropy k + t),
    so the per-seed numbers double as the strong-seed breakdown.
    """
    role = role or f.role
    eps = f.eps if eps is None else eps
    try:
        tab = f.table()
    except TooLarge:
        tab = None
    per_source, good = [], []
    thresh = eps / delta if delta > 0 else eps
    for src in sources:
        if tab is None and f.T * len(src) > caps.get("audit"):
            raise TooLarge("source too large for an exact audit")
        errs = seed_errors(f, src, k, role, tab)
        joint = sum(errs, Fraction(0)) / f.T if all(isinstance(e, Fraction) for e in errs) \
            else sum(float(e) for e in errs) / f.T
        per_source.append(joint)
        good.append(sum(1 for e in errs if e <= thresh) / f.T)
    if not per_source:
        raise BadParams("no sources to audit")
    worst = max(per_source)
    return {
        "role": role,
        "k": k,
        "claimed_eps": eps,
        "sources": len(per_source),
        "worst": worst,
        "mean": sum(float(e) for e in per_source) / len(per_source),
        "errors": per_source,
        "good_seed_fraction": min(good),
        "good_seed_threshold": thresh,
        "backend": "rational" if isinstance(worst, Fraction) else "double",
    }


def joint_support_error(f: SeededMap, src) -> Fraction:
    """1 - |supp(seed, f(X, seed))| / (T K): the support-counting bound on lossless error."""
    src = np.asarray(src, dtype=np.int64)
    C = _seed_counts(f, src, None)
    return 1 - Fraction(int((C > 0).sum()), f.T * len(src))


def audit_symbol_fixing(f: SeededMap, free: int, role: str | None = None, seed: int = 0) -> dict:
    """Exact worst-case error over every symbol-fixing source with ``free`` free symbols."""
    role = role or f.role
    q, n, M = f.in_q, f.n, f.out_size
    if f.in_size * math.comb(n, free) > caps.get("audit") * 4:
        raise TooLarge("too many symbol-fixing sources")
    xs = np.arange(f.in_size, dtype=np.int64)
    ys = f.batch(xs, seed)
    D = index_digits(xs, q, n)
    K = q**free
    worst, worst_at = Fraction(0), None
    for F in combinations(range(n), free):
        fixed = [j for j in range(n) if j not in F]
        fid = digits_index(D[:, fixed], q) if fixed else np.zeros_like(xs)
        nf = q ** len(fixed)
        C = np.bincount(fid * M + ys, minlength=nf * M).reshape(nf, M)
        if role == EXTRACTOR:
            num = np.abs(C * M - K).sum(axis=1)
            i = int(num.argmax())
            e = Fraction(int(num[i]), 2 * K * M)
        else:
            cap = 1 << int(round(math.log2(q) * free))
            num = np.maximum(C * cap - K, 0).sum(axis=1)
            i = int(num.argmax())
            e = Fraction(int(num[i]), K * cap)
        if e > worst or worst_at is None:
            worst, worst_at = e, (F, i)
    return {"free": free, "worst": worst, "worst_free_set": list(worst_at[0]), "sources":
            math.comb(n, free) * q ** (n - free)}


def inverter_distance(f: SeededMap, seed: int = 0) -> Fraction:
    """Distance of inv(U_out, U_rand) from uniform on the inputs, exactly."""
    R = f.rand_count(seed)
    M = f.out_size
    total = M * R
    if total > caps.get("audit"):
        raise TooLarge("inverter enumeration exceeds the audit cap")
    counts = np.zeros(f.in_size, dtype=np.int64)
    rs = np.arange(R, dtype=np.int64)
    for y in range(M):
        counts += np.bincount(f.invert_batch(np.full(R, y, dtype=np.int64), rs, seed), minlength=f.in_size)
    return uniform_distance_from_counts(counts, total, f.in_size)


def check_inverter(f: SeededMap, seed: int = 0) -> bool:
    """Exact inversion for every output and every randomness value."""
    R = f.rand_count(seed)
    rs = np.arange(R, dtype=np.int64)
    for y in range(f.out_size):
        if (f.batch(f.invert_batch(np.full(R, y, dtype=np.int64), rs, seed), seed) != y).any():
            return False
    return True


def check_additive(f: SeededMap, rng: np.random.Generator, trials: int = 100, seed: int | None = None) -> bool:
    """f(x + x', u) = f(x, u) + f(x', u) on sampled triples (coordinate-wise field addition)."""
    ctx = f.field if f.field is not None else gf(f.in_q)
    for _ in range(trials):
        u = int(rng.integers(f.T)) if seed is None else seed
        a, b = (int(v) for v in rng.integers(f.in_size, size=2))
        s = digits_index(ctx.vadd(index_digits(a, f.in_q, f.n), index_digits(b, f.in_q, f.n)), f.in_q)
        ya, yb, ys = (index_digits(f(v, u), f.out_q, f.l) for v in (a, b, int(s)))
        if not np.array_equal(ctx.vadd(ya, yb), ys):
            return False
    return True
