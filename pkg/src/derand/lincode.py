"""Linear codes over finite fields and the linear algebra they need."""

from __future__ import annotations

import io
from dataclasses import dataclass, field as dc_field
from itertools import product
from typing import Sequence

import numpy as np

from . import caps
from .errors import (
    AlphabetMismatch,
    Ambiguous,
    BadParams,
    Inconsistent,
    LengthMismatch,
    RngRequired,
    TooLarge,
)
from .field import FieldCtx, extend, gf, is_prime, make_field, prime_power

ERASED = None
_B36 = "0123456789abcdefghijklmnopqrstuvwxyz"


# -- matrix arithmetic over a field -----------------------------------

def _prime(ctx: FieldCtx) -> bool:
    return ctx.base is None and ctx.m == 1


def matmul(ctx: FieldCtx, A, B) -> np.ndarray:
    A = np.asarray(A, dtype=np.int64)
    B = np.asarray(B, dtype=np.int64)
    if _prime(ctx):
        return (A @ B) % ctx.p
    out = np.zeros((A.shape[0], B.shape[1]), dtype=np.int64)
    for i in range(A.shape[1]):
        out = ctx.vadd(out, ctx.vmul(A[:, i : i + 1], B[i : i + 1, :]))
    return out


def vecmat(ctx: FieldCtx, v, M) -> np.ndarray:
    return matmul(ctx, np.asarray(v, dtype=np.int64)[None, :], M)[0]


def rref(ctx: FieldCtx, A) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form and pivot columns."""
    R = np.array(A, dtype=np.int64, copy=True)
    if R.ndim != 2:
        raise ValueError("expected a matrix")
    rows, cols = R.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(R[r:, c])[0]
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            R[[r, i]] = R[[i, r]]
        lead = int(R[r, c])
        if lead != 1:
            R[r] = ctx.vmul(R[r], ctx.inv(lead))
        others = np.nonzero(R[:, c])[0]
        others = others[others != r]
        if others.size:
            if ctx.p == 2 and ctx.base is None:
                if ctx.m == 1:
                    R[others] ^= R[r]
                else:
                    R[others] ^= ctx.vmul(R[others, c][:, None], R[r][None, :])
            else:
                R[others] = ctx.vsub(R[others], ctx.vmul(R[others, c][:, None], R[r][None, :]))
        pivots.append(c)
        r += 1
    return R, pivots


def rank(ctx: FieldCtx, A) -> int:
    A = np.asarray(A)
    if A.size == 0:
        return 0
    if ctx.p == 2 and ctx.base is None and ctx.m == 1:
        return gf2_rank(bits_rows(A))
    return len(rref(ctx, A)[1])


def bits_rows(A) -> list[int]:
    """Rows of a 0/1 matrix as integers (column 0 is the most significant bit)."""
    A = np.asarray(A, dtype=np.int64)
    w = A.shape[1]
    weights = 1 << np.arange(w - 1, -1, -1, dtype=object)
    return [int(np.dot(row.astype(object), weights)) for row in A]


def gf2_rank(rows: Sequence[int]) -> int:
    basis: dict[int, int] = {}
    for v in rows:
        while v:
            h = v.bit_length() - 1
            if h in basis:
                v ^= basis[h]
            else:
                basis[h] = v
                break
    return len(basis)


def nullspace(ctx: FieldCtx, A) -> np.ndarray:
    """Rows spanning {v : A v^T = 0}."""
    A = np.asarray(A, dtype=np.int64)
    cols = A.shape[1]
    if A.shape[0] == 0:
        return np.eye(cols, dtype=np.int64)
    R, piv = rref(ctx, A)
    free = [c for c in range(cols) if c not in piv]
    out = np.zeros((len(free), cols), dtype=np.int64)
    for t, f in enumerate(free):
        out[t, f] = 1
        for i, pc in enumerate(piv):
            out[t, pc] = ctx.neg(int(R[i, f]))
    return out


def solve(ctx: FieldCtx, A, b) -> tuple[np.ndarray, np.ndarray]:
    """One solution x of A x = b plus a kernel basis; raises Inconsistent."""
    A = np.asarray(A, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64).reshape(-1, 1)
    cols = A.shape[1]
    R, piv = rref(ctx, np.hstack([A, b]))
    if cols in piv:
        raise Inconsistent("no solution")
    x = np.zeros(cols, dtype=np.int64)
    for i, pc in enumerate(piv):
        x[pc] = R[i, cols]
    return x, nullspace(ctx, A)


def span_equal(ctx: FieldCtx, A, B) -> bool:
    A, B = np.asarray(A), np.asarray(B)
    ra, rb = rank(ctx, A), rank(ctx, B)
    if ra != rb:
        return False
    if ra == 0:
        return True
    return rank(ctx, np.vstack([A, B])) == ra


def index_to_vec(idx: int, q: int, n: int) -> np.ndarray:
    """Integer index to a length-n vector, coordinate 0 most significant."""
    out = np.zeros(n, dtype=np.int64)
    for i in range(n - 1, -1, -1):
        idx, out[i] = divmod(idx, q)
    return out


def vec_to_index(v, q: int) -> int:
    idx = 0
    for x in v:
        idx = idx * q + int(x)
    return idx


def all_vectors(q: int, n: int) -> np.ndarray:
    """Every vector of F_q^n in index order (q^n x n)."""
    if n == 0:
        return np.zeros((1, 0), dtype=np.int64)
    grid = np.indices((q,) * n).reshape(n, -1).T
    return grid.astype(np.int64)


# -- codes ------------------------------------------------------------

@dataclass
class LinearCode:
    field: FieldCtx
    generator: np.ndarray
    kind: str = "raw"
    parity: np.ndarray | None = None
    meta: dict = dc_field(default_factory=dict)
    _d: int | None = None

    def __post_init__(self):
        G = np.asarray(self.generator, dtype=np.int64)
        if G.ndim != 2:
            raise BadParams("generator must be a matrix")
        self.generator = G
        if rank(self.field, G) != G.shape[0]:
            raise BadParams("generator rows must be linearly independent")
        if self.parity is None:
            self.parity = nullspace(self.field, G)
        self.parity = np.asarray(self.parity, dtype=np.int64)

    @property
    def n(self) -> int:
        return self.generator.shape[1]

    @property
    def k(self) -> int:
        return self.generator.shape[0]

    @property
    def q(self) -> int:
        return self.field.q

    @property
    def rate(self) -> float:
        return self.k / self.n

    @property
    def min_distance(self) -> int | None:
        return self._d

    @min_distance.setter
    def min_distance(self, d: int) -> None:
        if self._d is not None and self._d != d:
            raise AssertionError(f"minimum distance recomputed as {d}, cached {self._d}")
        self._d = d

    def encode(self, msg) -> np.ndarray:
        return encode(self, msg)

    def dual(self) -> LinearCode:
        return LinearCode(self.field, self.parity, kind="raw", parity=self.generator,
                          meta={"dual_of": self.kind})

    def codewords(self) -> np.ndarray:
        return matmul(self.field, all_vectors(self.q, self.k), self.generator)

    def describe(self) -> dict:
        return {"kind": self.kind, "field": self.field.spec(), "n": self.n, "k": self.k,
                "d": self._d, **{k: v for k, v in self.meta.items() if _jsonable(v)}}


def _jsonable(v) -> bool:
    return isinstance(v, (int, float, str, bool, list, tuple, type(None)))


def encode(code: LinearCode, msg) -> np.ndarray:
    msg = np.asarray(msg, dtype=np.int64)
    if msg.shape != (code.k,):
        raise LengthMismatch(f"message must have length {code.k}")
    return vecmat(code.field, msg, code.generator)


def rs_code(ctx: FieldCtx, n: int, k: int, points: Sequence[int] | None = None) -> LinearCode:
    if n > ctx.q or k < 1 or k > n:
        raise BadParams(f"need k <= n <= q (got n={n}, k={k}, q={ctx.q})")
    pts = list(range(n)) if points is None else [int(x) for x in points]
    if len(set(pts)) != n:
        raise BadParams("evaluation points must be distinct")
    G = np.array([[ctx.pow(a, i) for a in pts] for i in range(k)], dtype=np.int64)
    code = LinearCode(ctx, G, kind="rs", meta={"points": pts})
    code.meta["designed_distance"] = n - k + 1
    return code


def hadamard_code(n: int) -> LinearCode:
    cols = all_vectors(2, n).T  # n x 2^n, column j is j in binary
    return LinearCode(gf(2), cols, kind="hadamard")


def random_code(ctx: FieldCtx, n: int, k: int, rng: np.random.Generator) -> LinearCode:
    if rng is None:
        raise RngRequired("random codes need an explicit rng")
    tries = 0
    while True:
        G = rng.integers(0, ctx.q, size=(k, n), dtype=np.int64)
        tries += 1
        if rank(ctx, G) == k:
            return LinearCode(ctx, G, kind="random", meta={"draws": tries})


def gabidulin_code(q: int, m: int, n: int, k: int, points: Sequence[int] | None = None) -> LinearCode:
    """Gabidulin code over GF(q^m): rows are (g_i^(q^j)) for j < k."""
    if m < n:
        raise BadParams(f"need m >= n (got m={m}, n={n})")
    if not 1 <= k <= n:
        raise BadParams("need 1 <= k <= n")
    big = make_field(q, m) if is_prime(q) else extend(gf(q), m)
    pts = [big.qb**i for i in range(n)] if points is None else list(points)
    if subfield_rank(big, np.array([pts])) != n:
        raise BadParams("evaluation points must be linearly independent over GF(q)")
    G = np.array([[big.pow(g, q**j) for g in pts] for j in range(k)], dtype=np.int64)
    code = LinearCode(big, G, kind="gabidulin", meta={"points": pts, "subfield_q": q})
    code.meta["designed_rank_distance"] = n - k + 1
    return code


def subfield_rank(big: FieldCtx, vec) -> int:
    """Rank over the ground field of the digit expansion of a vector over ``big``."""
    vec = np.asarray(vec).reshape(-1)
    M = np.array([big.digits(int(x)) for x in vec], dtype=np.int64).T  # m x n
    ground = big.base if big.base is not None else gf(big.p)
    return rank(ground, M)


def make_code(kind: str, params: dict | None = None, rng=None, **kw) -> LinearCode:
    params = dict(params or {}, **kw)
    if kind == "rs":
        ctx = params.get("field") or gf(params["q"])
        return rs_code(ctx, params["n"], params["k"], params.get("points"))
    if kind == "hadamard":
        return hadamard_code(params["n"])
    if kind == "random":
        if rng is None:
            raise RngRequired("random codes need an explicit rng")
        ctx = params.get("field") or gf(params.get("q", 2))
        return random_code(ctx, params["n"], params["k"], np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng)
    if kind == "gabidulin":
        return gabidulin_code(params.get("q", 2), params["m"], params["n"], params["k"], params.get("points"))
    if kind == "raw":
        ctx = params.get("field") or gf(params.get("q", 2))
        return LinearCode(ctx, np.asarray(params["generator"]), kind="raw")
    raise BadParams(f"unknown code kind {kind!r}")


def concatenate(outer: LinearCode, inner: LinearCode) -> LinearCode:
    """Outer symbols are expanded in the polynomial basis and encoded by ``inner``."""
    of, inf = outer.field, inner.field
    ok = (of.base is None and inf.base is None and inf.m == 1 and of.p == inf.p) or of.base == inf
    if not ok or of.m != inner.k:
        raise AlphabetMismatch(
            f"outer alphabet {of.q} must equal {inf.q}^{inner.k} over the inner field")
    k2, k1 = inner.k, outer.k
    rows = []
    for j in range(k1):
        for b in range(k2):
            msg = np.zeros(k1, dtype=np.int64)
            msg[j] = of.from_digits([1 if t == b else 0 for t in range(k2)])
            outer_cw = encode(outer, msg)
            rows.append(np.concatenate([encode(inner, of.digits(int(s))) for s in outer_cw]))
    code = LinearCode(inf, np.array(rows), kind="concatenated",
                      meta={"basis": "polynomial", "outer": outer.kind, "inner": inner.kind,
                            "n1": outer.n, "n2": inner.n})
    return code


def concat_encode(outer: LinearCode, inner: LinearCode, msg) -> np.ndarray:
    """Symbol-wise encoding of an outer message (same map as ``concatenate``)."""
    cw = encode(outer, msg)
    return np.concatenate([encode(inner, outer.field.digits(int(s))) for s in cw])


def min_weight_of_span(ctx: FieldCtx, G) -> int:
    """Smallest weight of x G over nonzero messages x (0 if G is rank deficient)."""
    G = np.asarray(G, dtype=np.int64)
    k, n = G.shape
    q = ctx.q
    if q**k * n > caps.get("codewords"):
        raise TooLarge(f"{q}^{k} codewords of length {n} exceed the cap")
    if q == 2 and ctx.base is None:
        rows = bits_rows(G)
        best = n + 1
        cw = 0
        for i in range(1, 1 << k):
            # Gray code: flip the row at the lowest set bit of i
            cw ^= rows[(i & -i).bit_length() - 1]
            w = cw.bit_count()
            if w < best:
                best = w
                if best == 0:
                    break
        return best
    best = n + 1
    chunk = max(1, 2**16 // max(1, k))
    msgs = all_vectors(q, k)[1:]
    for s in range(0, len(msgs), chunk):
        cws = matmul(ctx, msgs[s : s + chunk], G)
        best = min(best, int((cws != 0).sum(axis=1).min()))
    return best


def min_distance(code: LinearCode) -> int:
    d = min_weight_of_span(code.field, code.generator)
    code.min_distance = d
    return d


def min_rank_distance(code: LinearCode) -> int:
    """Smallest subfield rank over all nonzero codewords (Gabidulin metric)."""
    big = code.field
    cws = code.codewords()[1:]
    return min(subfield_rank(big, c) for c in cws)


def erasure_decode(code: LinearCode, word) -> np.ndarray:
    """Recover the message from a word whose erased positions are None."""
    if len(word) != code.n:
        raise LengthMismatch(f"word must have length {code.n}")
    keep = [i for i, s in enumerate(word) if s is not ERASED]
    y = np.array([word[i] for i in keep], dtype=np.int64)
    A = code.generator[:, keep].T  # |keep| x k
    if rank(code.field, A) < code.k:
        raise Ambiguous("unerased columns do not determine the message")
    x, _ = solve(code.field, A, y)
    return x


def erasure_ok(code: LinearCode, erased: Sequence[int]) -> bool:
    keep = [i for i in range(code.n) if i not in set(erased)]
    return rank(code.field, code.generator[:, keep]) == code.k


# -- Reed-Solomon unique decoding (Berlekamp-Welch) ---------------------

def rs_decode(code: LinearCode, word) -> np.ndarray:
    """Errors-and-erasures decoding up to half the distance of the punctured code."""
    ctx = code.field
    pts = code.meta["points"]
    k = code.k
    keep = [i for i, s in enumerate(word) if s is not ERASED]
    n1 = len(keep)
    if n1 < k:
        raise Ambiguous("too many erasures")
    a = [pts[i] for i in keep]
    y = [int(word[i]) for i in keep]
    for e in range((n1 - k) // 2, -1, -1):
        # unknowns: Q_0..Q_{e+k-1}, E_0..E_{e-1}; E monic of degree e
        rows, rhs = [], []
        for ai, yi in zip(a, y):
            pw = [ctx.pow(ai, j) for j in range(e + k)]
            row = pw + [ctx.neg(ctx.mul(yi, pw[j])) for j in range(e)]
            rows.append(row)
            rhs.append(ctx.mul(yi, ctx.pow(ai, e)))
        try:
            sol, _ = solve(ctx, np.array(rows, dtype=np.int64).reshape(n1, 2 * e + k), np.array(rhs))
        except Inconsistent:
            continue
        from .field import Poly
        Q = Poly(ctx, sol[: e + k])
        E = Poly(ctx, list(sol[e + k :]) + [1])
        P, rem = Q.divmod(E)
        if not rem.is_zero() or (P.degree or 0) >= k:
            continue
        msg = np.array(list(P.coeffs) + [0] * (k - len(P.coeffs)), dtype=np.int64)
        cw = encode(code, msg)
        errs = sum(int(cw[i]) != int(word[i]) for i in keep)
        if 2 * errs <= n1 - k:
            return msg
    from .errors import OuterDecodingFailed
    raise OuterDecodingFailed("received word is outside the unique-decoding radius")


# -- qmatrix v1 files ---------------------------------------------------

def write_qmatrix(q: int, A, fh=None) -> str:
    A = np.asarray(A, dtype=np.int64)
    r, c = A.shape
    buf = io.StringIO()
    buf.write(f"qmatrix v1 q={q} rows={r} cols={c}\n")
    for row in A:
        if q <= 36:
            buf.write("".join(_B36[int(x)] for x in row))
        else:
            buf.write(",".join(str(int(x)) for x in row))
        buf.write("\n")
    text = buf.getvalue()
    if fh is not None:
        fh.write(text)
    return text


def read_qmatrix(text: str) -> tuple[int, np.ndarray]:
    lines = [ln.rstrip("\r") for ln in text.splitlines()]
    head = lines[0].split()
    if head[:2] != ["qmatrix", "v1"]:
        raise ValueError("not a qmatrix v1 file")
    meta = dict(tok.split("=") for tok in head[2:])
    q, r, c = int(meta["q"]), int(meta["rows"]), int(meta["cols"])
    body = lines[1 : 1 + r]
    if len(body) != r:
        raise ValueError("row count mismatch")
    A = np.zeros((r, c), dtype=np.int64)
    for i, ln in enumerate(body):
        vals = [int(ch, 36) for ch in ln] if q <= 36 else [int(t) for t in ln.split(",")]
        if len(vals) != c:
            raise ValueError(f"row {i} has {len(vals)} symbols, expected {c}")
        A[i] = vals
    if (A >= q).any() or (A < 0).any():
        raise ValueError("symbol outside the alphabet")
    return q, A
