"""Group-testing measurement matrices: constructions, decoders and exhaustive verifiers.

Verification works on column bitsets (one Python int per column, bit j set
when row j has a 1).  Every property reduces to the same question: given a
target set of rows, can k columns from an allowed pool cover all but at most
e of them?  ``_max_cover`` answers it by depth-first search over column
combinations in increasing order, pruning a branch when even the k largest
remaining gains cannot reach the goal.  The first hit is therefore the
lexicographically smallest violating combination.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field as dc_field
from itertools import combinations, product
from typing import Callable, Sequence

import numpy as np

from . import caps
from .errors import (
    BadParams,
    BadThresholds,
    ColumnMismatch,
    Infeasible,
    MissingProvenance,
    TooLarge,
)
from .field import is_prime
from .lincode import LinearCode, all_vectors, matmul, read_qmatrix, write_qmatrix
from .prand import SeededMap

CLAIMED, VERIFIED, REFUTED, SAMPLED = "claimed", "verified", "refuted", "sampled-pass"


@dataclass(eq=False)
class MeasurementMatrix:
    M: np.ndarray
    claims: list = dc_field(default_factory=list)
    provenance: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        self.M = np.asarray(self.M, dtype=np.uint8)
        if self.M.ndim != 2 or (self.M > 1).any():
            raise BadParams("measurement matrix must be a 0/1 matrix")
        self._cols = None

    @property
    def m(self) -> int:
        return self.M.shape[0]

    @property
    def n(self) -> int:
        return self.M.shape[1]

    @property
    def col_bits(self) -> list[int]:
        if self._cols is None:
            packed = np.packbits(self.M.T, axis=1, bitorder="little")
            self._cols = [int.from_bytes(row.tobytes(), "little") for row in packed]
        return self._cols

    def claim(self, prop: str, params: dict, note: str | None = None) -> dict:
        c = {"property": prop, "params": params, "status": CLAIMED}
        if note:
            c["note"] = note
        self.claims.append(c)
        return c

    def measure(self, x) -> np.ndarray:
        """OR measurement M[x]."""
        return (self.M.astype(np.int64) @ np.asarray(x, dtype=np.int64) > 0).astype(np.uint8)

    def to_qmatrix(self) -> str:
        return write_qmatrix(2, self.M)

    def claims_json(self) -> str:
        return json.dumps({"claims": self.claims, "provenance": self.provenance}, indent=2,
                          sort_keys=True, default=str)

    def save(self, path: str) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_qmatrix())
        with open(path + ".claims.json", "w") as fh:
            fh.write(self.claims_json())

    @classmethod
    def load(cls, path: str) -> MeasurementMatrix:
        with open(path) as fh:
            q, A = read_qmatrix(fh.read())
        if q != 2:
            raise BadParams("measurement matrices are binary")
        mm = cls(A)
        try:
            with open(path + ".claims.json") as fh:
                side = json.load(fh)
            mm.claims = side.get("claims", [])
            mm.provenance = side.get("provenance", {})
        except FileNotFoundError:
            pass
        return mm


# -- property specs ------------------------------------------------------

ARITY = {"disjunct": ("d", "e"), "strong": ("d", "e", "u"), "regular": ("d", "e", "u"),
         "threshold": ("d", "e", "u"), "resilient": ("e0", "e1", "e0p", "e1p", "d")}


def parse_property(spec: str) -> tuple[str, dict]:
    """'disjunct:3,0' -> ('disjunct', {'d': 3, 'e': 0})."""
    name, _, args = spec.partition(":")
    name = name.strip().lower()
    if name not in ARITY:
        raise BadParams(f"unknown property {name!r}")
    vals = [int(a) for a in args.split(",")] if args else []
    if len(vals) != len(ARITY[name]):
        raise BadParams(f"{name} takes {len(ARITY[name])} parameters")
    return name, dict(zip(ARITY[name], vals))


# -- covering search -------------------------------------------------------

def _max_cover(target: int, pool: Sequence[int], cols: Sequence[int], k: int, need: int):
    """First (lexicographic) k-subset of ``pool`` covering >= need bits of target, else None."""
    if need <= 0:
        return list(pool[:k]) if len(pool) >= k else list(pool)
    gains = [(cols[c] & target).bit_count() for c in pool]
    cand = [(c, g) for c, g in zip(pool, gains) if g > 0]
    if not cand:
        return None
    if len(pool) < k:
        k = len(pool)
    if sum(sorted((g for _, g in cand), reverse=True)[:k]) < need:
        return None
    pool_list = list(pool)
    chosen: list[int] = []

    def rec(start: int, left: int, depth: int):
        # left = still-uncovered target bits
        covered_need = need - (target.bit_count() - left.bit_count())
        if covered_need <= 0:
            return True
        if depth == 0:
            return False
        tail = pool_list[start:]
        if len(tail) < depth:
            return False
        g = sorted(((cols[c] & left).bit_count() for c in tail), reverse=True)
        if sum(g[:depth]) < covered_need:
            return False
        for pos in range(start, len(pool_list) - depth + 1):
            c = pool_list[pos]
            chosen.append(c)
            if rec(pos + 1, left & ~cols[c], depth - 1):
                return True
            chosen.pop()
        return False

    if rec(0, target, k):
        # pad with the smallest unused columns so the witness has exactly k columns
        extra = [c for c in pool_list if c not in chosen]
        out = sorted(chosen)
        while len(out) < k and extra:
            out.append(extra.pop(0))
        return sorted(out)
    return None


def _exact_weight_rows(cols: Sequence[int], S: Sequence[int], u: int, full: int) -> int:
    """Rows where the columns in S sum to exactly u."""
    E = [full] + [0] * u
    for c in S:
        b = cols[c]
        for w in range(u, 0, -1):
            E[w] = (E[w] & ~b) | (E[w - 1] & b)
        E[0] &= ~b
    return E[u]


def _check_cap(count: int, n: int) -> None:
    if count * n > caps.get("verify"):
        raise TooLarge(f"{count} outer choices x {n} columns exceed the verification cap")


# -- verification ----------------------------------------------------------

def verify_matrix(mm: MeasurementMatrix, prop, record: bool = True, all_witnesses: bool = False,
                  **kw) -> dict:
    """Exhaustive check of a property; returns {'status', 'witness', ...}.

    The witness is the lexicographically first violation.  With
    ``all_witnesses`` the scan continues and ``witnesses`` lists the first
    violation for every outer choice (column, u-set or critical set).
    """
    name, params = parse_property(prop) if isinstance(prop, str) else prop
    cols = mm.col_bits
    n = mm.n
    full = (1 << mm.m) - 1
    if name == "disjunct":
        res = _verify_disjunct(cols, n, params["d"], params["e"], all_witnesses)
    elif name == "strong":
        res = _verify_strong(cols, n, params["d"], params["e"], params["u"], full, all_witnesses)
    elif name == "regular":
        res = _verify_regular(cols, n, params["d"], params["e"], params["u"], full, False, all_witnesses)
    elif name == "threshold":
        res = _verify_regular(cols, n, params["d"], params["e"], params["u"], full, True, all_witnesses)
    elif name == "resilient":
        res = sample_resilience(mm, params, **kw)
    else:
        raise BadParams(name)
    res["property"] = name
    res["params"] = params
    if record:
        _record(mm, name, params, res)
    return res


def _record(mm: MeasurementMatrix, name: str, params: dict, res: dict) -> None:
    for c in mm.claims:
        if c["property"] == name and c["params"] == params:
            c["status"] = res["status"]
            if "witness" in res:
                c["witness"] = res["witness"]
            return
    entry = {"property": name, "params": params, "status": res["status"]}
    if "witness" in res:
        entry["witness"] = res["witness"]
    mm.claims.append(entry)


def _outcome(found: list, outer: int) -> dict:
    if not found:
        return {"status": VERIFIED, "mode": "exhaustive", "outer": outer}
    res = {"status": REFUTED, "witness": found[0], "mode": "exhaustive"}
    if outer:  # full scan requested
        res["witnesses"] = found
    return res


def _verify_disjunct(cols, n, d, e, collect: bool = False) -> dict:
    if d >= n:
        raise BadParams("need d < n")
    _check_cap(n, n)
    found = []
    for c0 in range(n):
        target = cols[c0]
        need = target.bit_count() - e
        pool = [c for c in range(n) if c != c0]
        hit = _max_cover(target, pool, cols, d, need)
        if hit is not None:
            found.append({"C0": c0, "others": hit})
            if not collect:
                return _outcome(found, 0)
    return _outcome(found, n)


def _verify_strong(cols, n, d, e, u, full, collect: bool = False) -> dict:
    if d + u > n:
        raise BadParams("need d + u <= n")
    outer = math.comb(n, u)
    _check_cap(outer, n)
    found = []
    for U in combinations(range(n), u):
        target = full
        for c in U:
            target &= cols[c]
        need = target.bit_count() - e
        pool = [c for c in range(n) if c not in U]
        hit = _max_cover(target, pool, cols, d, need)
        if hit is not None:
            found.append({"U": list(U), "others": hit})
            if not collect:
                return _outcome(found, 0)
    return _outcome(found, outer)


def _verify_regular(cols, n, d, e, u, full, distinguished: bool, collect: bool = False) -> dict:
    if u < 1 or d < u:
        raise BadParams("need 1 <= u <= d")
    sizes = range(u, min(d, n) + 1)
    outer = sum(math.comb(n, s) * (s if distinguished else 1) for s in sizes)
    _check_cap(outer, n)
    found = []
    for s in sizes:
        for S in combinations(range(n), s):
            T = _exact_weight_rows(cols, S, u, full)
            pool = [c for c in range(n) if c not in S]
            k = min(s, len(pool))
            targets = [(None, T)] if not distinguished else [(i, T & cols[i]) for i in S]
            for i, tgt in targets:
                need = tgt.bit_count() - e
                hit = _max_cover(tgt, pool, cols, k, need)
                if hit is not None:
                    w = {"S": list(S), "Z": hit}
                    if i is not None:
                        w["i"] = i
                    found.append(w)
                    if not collect:
                        return _outcome(found, 0)
                    break
    return _outcome(found, outer)


def satisfying_rows(mm: MeasurementMatrix, S, Z, u: int, i: int | None = None) -> int:
    """Rows that u-satisfy (S, Z), optionally with a 1 in column i (direct count)."""
    M = mm.M.astype(np.int64)
    ok = (M[:, list(S)].sum(axis=1) == u) & (M[:, list(Z)].sum(axis=1) == 0 if len(Z) else True)
    if i is not None:
        ok &= M[:, i] == 1
    return int(np.count_nonzero(ok))


def regular_margin(mm: MeasurementMatrix, d: int, u: int, sample: int | None = None,
                   rng: np.random.Generator | None = None) -> dict:
    """Smallest number of u-satisfying rows over critical/zero pairs (largest valid e is this minus 1).

    With ``sample`` set, only that many random critical sets are examined;
    the zero set is still optimised exactly, and the result is labelled sampled.
    """
    cols, n = mm.col_bits, mm.n
    full = (1 << mm.m) - 1
    sets = [S for s in range(u, min(d, n) + 1) for S in combinations(range(n), s)] if sample is None else None
    if sample is not None:
        rng = rng or np.random.default_rng(0)
        sets = []
        for _ in range(sample):
            s = int(rng.integers(u, min(d, n) + 1))
            sets.append(tuple(sorted(rng.choice(n, size=s, replace=False).tolist())))
    else:
        _check_cap(len(sets), n)
    best, where = None, None
    for S in sets:
        T = _exact_weight_rows(cols, S, u, full)
        pool = [c for c in range(n) if c not in S]
        k = min(len(S), len(pool))
        # largest coverage achievable by k columns of the pool
        lo, hi = 0, T.bit_count()
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if _max_cover(T, pool, cols, k, mid) is not None:
                lo = mid
            else:
                hi = mid - 1
        left = T.bit_count() - lo
        if best is None or left < best:
            best, where = left, list(S)
    return {"min_rows": best, "e": best - 1, "critical_set": where,
            "mode": "sampled" if sample is not None else "exhaustive"}


# -- constructions ---------------------------------------------------------

def random_matrix(kind: str, n: int, d: int, rng: np.random.Generator, m: int | None = None,
                  p: float = 0.0, u: int = 1) -> MeasurementMatrix:
    if n < 1 or d < 1:
        raise BadParams("n and d must be positive")
    if rng is None:
        raise BadParams("an rng is required")
    if kind == "disjunct":
        if d == 1:
            mm = MeasurementMatrix(np.eye(n, dtype=np.uint8),
                                   provenance={"construction": "identity", "n": n, "d": 1})
            mm.claim("disjunct", {"d": n - 1, "e": 0})
            return mm
        if m is None:
            m = math.ceil(8 * d * d * math.log2(max(n, 2)) / (1 - p) ** 2)
        dens = 1.0 / d
        M = (rng.random((m, n)) < dens).astype(np.uint8)
        # expected private rows for a fixed column against d others
        mu = m * dens * (1 - dens) ** d
        mm = MeasurementMatrix(M, provenance={"construction": "random-disjunct", "n": n, "d": d,
                                              "m": m, "p": p, "density": dens})
        mm.claim("disjunct", {"d": d, "e": int(math.floor(p * mu))})
        return mm
    if kind == "regular":
        if m is None:
            r = max(1, math.ceil(math.log2(d / u)))
            m = math.ceil(2 * (d * math.log(max(n, 2)) + 1) / _regular_success(d, u, r))
        return prob_regular(n, d, u, m, rng, p)
    raise BadParams(f"unknown kind {kind!r}")


def _next_prime(x: int) -> int:
    while not is_prime(x):
        x += 1
    return x


def prob_regular(n: int, d: int, u: int, m_prime: int, rng: np.random.Generator,
                 p: float = 0.0, prime: int | None = None) -> MeasurementMatrix:
    """Row blocks i = 1..r with bit density 1/(2^(i+2) u), each row (u+1)-wise independent.

    A row is the threshold of a random degree-u polynomial over Z_P evaluated
    at 0..n-1, which makes any u+1 of its entries independent.
    """
    if u < 1 or d < u:
        raise BadParams("need 1 <= u <= d")
    r = max(1, math.ceil(math.log2(d / u)))
    P = prime or _next_prime(max(n, 1 << 16))
    xs = np.arange(n, dtype=np.int64)
    rows = []
    for i in range(1, r + 1):
        rho = 1.0 / (2 ** (i + 2) * u)
        cut = int(math.floor(P * rho))
        for _ in range(m_prime):
            coef = rng.integers(0, P, size=u + 1)
            v = np.zeros(n, dtype=np.int64)
            for c in coef[::-1]:
                v = (v * xs + int(c)) % P
            rows.append((v < cut).astype(np.uint8))
    M = np.array(rows, dtype=np.uint8)
    mm = MeasurementMatrix(M, provenance={"construction": "prob-regular", "n": n, "d": d, "u": u,
                                          "m_prime": m_prime, "blocks": r, "prime": P, "p": p})
    q_lb = _regular_success(d, u, r)
    mm.claim("regular", {"d": d, "e": int(math.floor(p * m_prime * q_lb)), "u": u},
             note="e from the success probability under full independence")
    return mm


def _regular_success(d: int, u: int, r: int) -> float:
    worst = 1.0
    for s in range(u, d + 1):
        for z in range(0, s + 1):
            best = 0.0
            for i in range(1, r + 1):
                rho = 1.0 / (2 ** (i + 2) * u)
                best = max(best, math.comb(s, u) * rho**u * (1 - rho) ** (s - u + z))
            worst = min(worst, best)
    return worst


def _phi_table(q: int, u: int) -> np.ndarray:
    """phi[x] = indicator over u-tuples of [q] that contain x (q x q^u)."""
    tuples = all_vectors(q, u)
    return np.array([(tuples == x).any(axis=1) for x in range(q)], dtype=np.uint8)


def ks_matrix(code: LinearCode, u: int = 1) -> MeasurementMatrix:
    """Replace each symbol of the codeword matrix by its u-tuple indicator column."""
    q, nt, k = code.q, code.n, code.k
    if nt * q**u * q**k > caps.get("matrix_cells"):
        raise TooLarge("Kautz-Singleton matrix too large")
    dt = code.min_distance
    if dt is None:
        from .lincode import min_distance
        dt = min_distance(code)
    C = code.codewords()  # q^k x nt, columns of the outer matrix
    phi = _phi_table(q, u)
    blocks = [phi[C[:, i]].T for i in range(nt)]  # each q^u x q^k
    M = np.vstack(blocks)
    mm = MeasurementMatrix(M, provenance={"construction": "kautz-singleton", "code": code.kind,
                                          "q": q, "n": nt, "k": k, "d": dt, "u": u})
    for e in range(nt):
        if nt == dt:
            dmax = q**k - u
        else:
            bound = (nt - e) / ((nt - dt) * u)
            dmax = math.ceil(bound) - 1
        if dmax >= 1:
            prop = "disjunct" if u == 1 else "strong"
            params = {"d": dmax, "e": e} if u == 1 else {"d": dmax, "e": e, "u": u}
            mm.claim(prop, params)
    return mm


def cond_graph_matrix(f: SeededMap) -> MeasurementMatrix:
    """Rows (seed, output symbol), one column per input: the codeword graph of f."""
    T, L, N = f.T, f.out_size, f.in_size
    if T * L * N > caps.get("matrix_cells"):
        raise TooLarge("codeword-graph matrix too large")
    tab = f.table()  # T x N
    M = np.zeros((T * L, N), dtype=np.uint8)
    M[(np.arange(T)[:, None] * L + tab).ravel(), np.tile(np.arange(N), T)] = 1
    mm = MeasurementMatrix(M, provenance={"construction": "codeword-graph", "map": f.descriptor(),
                                          "T": T, "L": L})
    mm.source_map = f
    return mm


def resilience_claim(f: SeededMap, p: float, nu: float, gamma: float) -> dict | None:
    """The resilience parameters a codeword-graph matrix gets for (p, nu, gamma), if admissible."""
    lt = math.log2(f.out_size)
    kp = f.k  # lossless: output entropy equals input entropy
    if (p + gamma) * 2 ** (lt - kp) + nu / gamma >= 1 - f.eps:
        return None
    m = f.T * f.out_size
    d = gamma * f.out_size
    return {"e0": p * m, "e1": nu / d * m if d else 0.0, "e0p": 2 ** f.k - d, "e1p": 0, "d": d}


def direct_product(m1: MeasurementMatrix, m2: MeasurementMatrix) -> MeasurementMatrix:
    """Row (i, j) is the OR of row i of M1 and row j of M2."""
    if m1.n != m2.n:
        raise ColumnMismatch(f"{m1.n} vs {m2.n} columns")
    M = (m1.M[:, None, :] | m2.M[None, :, :]).reshape(m1.m * m2.m, m1.n)
    mm = MeasurementMatrix(M, provenance={"construction": "direct-product", "rows": [m1.m, m2.m]})
    reg = [c for c in m1.claims if c["property"] == "regular" and c["status"] == VERIFIED]
    dis = [c for c in m2.claims if c["property"] == "disjunct" and c["status"] == VERIFIED]
    for a in reg:
        for b in dis:
            d = a["params"]["d"]
            if b["params"]["d"] >= 2 * d:
                e = (a["params"]["e"] + 1) * (b["params"]["e"] + 1) - 1
                mm.claim("threshold", {"d": d, "e": e, "u": a["params"]["u"] + 1})
    return mm


def bipartite_progression(L: int, K: int, d_left: int) -> list[list[int]]:
    """Right-vertex neighbourhoods of the graph joining left a to right (a + j) mod K, j < d_left."""
    if d_left > K or L % K:
        raise Infeasible(f"no progression graph with {L} left, {K} right vertices and left degree {d_left}")
    nbrs: list[list[int]] = [[] for _ in range(K)]
    for a in range(L):
        for j in range(d_left):
            nbrs[(a + j) % K].append(a)
    return [sorted(v) for v in nbrs]


def cond_main_matrix(f: SeededMap, k: int, u: int, d_left: int | None = None) -> np.ndarray:
    """Rows (seed y, right vertex v, u-subset U of its neighbourhood): 1 at x iff f(x, y) in U."""
    L, K = f.out_size, 1 << k
    d_left = 8 * u if d_left is None else d_left
    nbrs = bipartite_progression(L, K, d_left)
    d_r = d_left * L // K
    subsets = [(v, U) for v in range(K) for U in combinations(nbrs[v], u)]
    rows = f.T * len(subsets)
    if rows * f.in_size > caps.get("matrix_cells"):
        raise TooLarge("condenser block too large")
    member = np.zeros((len(subsets), L), dtype=np.uint8)
    for j, (_, U) in enumerate(subsets):
        member[j, list(U)] = 1
    tab = f.table()  # T x N
    blocks = [member[:, tab[y]] for y in range(f.T)]
    out = np.vstack(blocks)
    assert out.shape[0] == f.T * K * math.comb(d_r, u)
    return out


def cond_regular_matrix(d: int, u: int, p: float, condensers: Sequence[SeededMap],
                        d_left: int | None = None) -> MeasurementMatrix:
    """Stack level-i condenser blocks, each row repeated 2^(r-i) times."""
    u2 = 1 << (u - 1).bit_length()  # smallest power of two >= u
    r = max(0, math.ceil(math.log2(d / u2)))
    if len(condensers) != r + 1:
        raise BadParams(f"need {r + 1} condensers (levels 0..{r})")
    parts, counts, gammas = [], [], []
    for i, f in enumerate(condensers):
        k = int(math.log2(u2)) + i + 1
        Mi = cond_main_matrix(f, k, u, d_left)
        ri = 2 ** (r - i)
        parts.append(np.repeat(Mi, ri, axis=0))
        counts.append((ri, Mi.shape[0]))
        lt = math.log2(f.out_size)
        gammas.append(max(1.0, 2 ** (k - lt) * 2**k / (10 * u)) * 2 ** (r - i))
    M = np.vstack(parts)
    T = condensers[0].T
    mm = MeasurementMatrix(M, provenance={"construction": "condenser-regular", "d": d, "u": u, "p": p,
                                          "levels": counts, "d_left": d_left or 8 * u})
    e = max(0, math.ceil(p * min(gammas) * T) - 1)
    pre_ok = all(f.eps < (1 - p) / 16 for f in condensers)
    mm.claim("regular", {"d": d, "e": e, "u": u},
             note=None if pre_ok else "condenser error exceeds (1-p)/16; claim is nominal")
    return mm


def regular_row_count(condensers: Sequence[SeededMap], u: int, d_left: int) -> int:
    """Sum over levels of r_i m_i, with m_i = T 2^k C(d_r, u)."""
    u2 = 1 << (u - 1).bit_length()
    r = len(condensers) - 1
    total = 0
    for i, f in enumerate(condensers):
        k = int(math.log2(u2)) + i + 1
        d_r = d_left * f.out_size // (1 << k)
        total += 2 ** (r - i) * f.T * (1 << k) * math.comb(d_r, u)
    return total


# -- decoding -------------------------------------------------------------

def distance_decode(mm: MeasurementMatrix, y, e: int) -> list[int]:
    """Columns with at most floor(e/2) ones where y is zero."""
    y = np.asarray(y, dtype=np.int64)
    miss = (1 - y) @ mm.M.astype(np.int64)
    return [int(c) for c in np.nonzero(miss <= e // 2)[0]]


@dataclass
class Mixture:
    sets: list

    @property
    def n(self) -> int:
        return len(self.sets)

    def agreement(self, w) -> float:
        return sum(1 for wi, Si in zip(w, self.sets) if wi in Si) / self.n

    def wgt(self) -> int:
        return sum(len(S) for S in self.sets)

    def rho(self, sigma: int) -> float:
        return self.wgt() / (self.n * sigma)

    def agreement_list(self, words, alpha: float) -> list[int]:
        return [j for j, w in enumerate(words) if self.agreement(w) > alpha]


def mixture_from_outcome(mm: MeasurementMatrix, y) -> Mixture:
    T, L = mm.provenance["T"], mm.provenance["L"]
    y = np.asarray(y).reshape(T, L)
    return Mixture([set(np.nonzero(row)[0].tolist()) for row in y])


def agreement_decode(mm: MeasurementMatrix, y, nu: float, gamma: float) -> list[int]:
    """Columns whose codeword agrees with the outcome mixture on more than 1 - nu/gamma seeds."""
    if mm.provenance.get("construction") != "codeword-graph":
        raise MissingProvenance("agreement decoding needs a codeword-graph matrix")
    T = mm.provenance["T"]
    agr = np.asarray(y, dtype=np.int64) @ mm.M.astype(np.int64)
    # each column has exactly one 1 per seed block, so the dot product counts agreements
    return [int(c) for c in np.nonzero(agr * gamma > (gamma - nu) * T)[0]]


def threshold_measure(mm: MeasurementMatrix, x, lo: int, u: int, tie: str = "zeros",
                      rng: np.random.Generator | None = None) -> np.ndarray:
    if lo > u or lo < 0:
        raise BadThresholds(f"need lo <= u (got {lo}, {u})")
    cnt = mm.M.astype(np.int64) @ np.asarray(x, dtype=np.int64)
    out = (cnt >= u).astype(np.uint8)
    gap = (cnt >= lo) & (cnt < u)
    if gap.any():
        if tie == "ones":
            out[gap] = 1
        elif tie == "rng":
            if rng is None:
                raise BadParams("tie rule 'rng' needs an rng")
            out[gap] = rng.integers(0, 2, size=int(gap.sum()))
        elif tie != "zeros":
            raise BadParams(f"unknown tie rule {tie!r}")
    return out


def sample_resilience(mm: MeasurementMatrix, params: dict, decoder: Callable | None = None,
                      trials: int = 1000, rng: np.random.Generator | None = None) -> dict:
    """Random sparse vectors and worst-case-sized noise; never reports 'verified'."""
    rng = rng or np.random.default_rng(0)
    d = int(params["d"])
    e0, e1 = int(params["e0"]), int(params["e1"])
    e0p, e1p = int(params["e0p"]), int(params["e1p"])
    if decoder is None:
        decoder = lambda y: distance_decode(mm, y, 2 * e0)
    for _ in range(trials):
        x = np.zeros(mm.n, dtype=np.int64)
        x[rng.choice(mm.n, size=d, replace=False)] = 1
        y = mm.measure(x).astype(np.int64)
        zeros, ones = np.nonzero(y == 0)[0], np.nonzero(y == 1)[0]
        y[rng.choice(zeros, size=min(e0, len(zeros)), replace=False)] = 1
        y[rng.choice(ones, size=min(e1, len(ones)), replace=False)] = 0
        z = set(decoder(y))
        sx = set(np.nonzero(x)[0].tolist())
        if len(z - sx) > e0p or len(sx - z) > e1p:
            return {"status": REFUTED, "witness": {"x": sorted(sx)}, "mode": "sampled"}
    return {"status": SAMPLED, "mode": "sampled", "trials": trials}


def separation(mm: MeasurementMatrix, x, xp, u: int = 1) -> int:
    """|supp(M[x]_u) minus supp(M[x']_u)|."""
    a = threshold_measure(mm, x, u, u)
    b = threshold_measure(mm, xp, u, u)
    return int(np.count_nonzero((a == 1) & (b == 0)))
