"""Finite fields GF(p^m) and polynomials over them.

Elements are plain integers in ``[0, q)``.  Digit ``i`` of the base-``b``
expansion (``b`` the size of the ground field) is the coefficient of
``x^i``, so ``x^2 + 1`` over GF(2) is the element ``0b101 = 5``.  A field may
be built directly over a prime field or as an extension of another field
(needed for the condenser that works in ``GF(q)[x]/g``).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field as dc_field
from functools import cached_property
from itertools import product

import numpy as np

from . import caps
from .errors import (
    BadExponentBase,
    DivideByZero,
    NotInField,
    NotPrime,
    Reducible,
    TooLarge,
)

TABLE_MAX_Q = 1024
_DIGITS = "0123456789abcdefghijklmnopqrstuvwxyz"


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def prime_power(q: int) -> tuple[int, int]:
    """Return (p, m) with q = p^m, or raise NotPrime."""
    if q < 2:
        raise NotPrime(f"{q} is not a prime power")
    p = next(f for f in range(2, q + 1) if q % f == 0)
    m, r = 0, q
    while r % p == 0:
        r //= p
        m += 1
    if r != 1:
        raise NotPrime(f"{q} is not a prime power")
    return p, m


@dataclass(frozen=True, eq=False)
class FieldCtx:
    p: int
    m: int
    modulus: tuple[int, ...]  # low-to-high over the ground field, monic, length m+1
    base: FieldCtx | None = None
    _cache: dict = dc_field(default_factory=dict, repr=False, compare=False)

    # ground field size: p for a prime-based field, base.q for a tower
    @property
    def qb(self) -> int:
        return self.p if self.base is None else self.base.q

    @property
    def q(self) -> int:
        return self.qb**self.m

    @property
    def characteristic(self) -> int:
        return self.p

    def __eq__(self, other):
        return (
            isinstance(other, FieldCtx)
            and self.p == other.p
            and self.m == other.m
            and self.modulus == other.modulus
            and self.base == other.base
        )

    def __hash__(self):
        return hash((self.p, self.m, self.modulus, self.base))

    def __repr__(self):
        return f"FieldCtx({self.spec()})"

    # -- ground-field scalar ops --------------------------------------
    def _badd(self, a: int, b: int) -> int:
        if self.base is None:
            return (a + b) % self.p
        return self.base.add(a, b)

    def _bsub(self, a: int, b: int) -> int:
        if self.base is None:
            return (a - b) % self.p
        return self.base.sub(a, b)

    def _bmul(self, a: int, b: int) -> int:
        if self.base is None:
            return a * b % self.p
        return self.base.mul(a, b)

    def _binv(self, a: int) -> int:
        if self.base is None:
            return pow(a, self.p - 2, self.p)
        return self.base.inv(a)

    # -- digit conversion ---------------------------------------------
    def digits(self, a: int) -> list[int]:
        b = self.qb
        out = []
        for _ in range(self.m):
            a, r = divmod(a, b)
            out.append(r)
        return out

    def from_digits(self, ds) -> int:
        b = self.qb
        a = 0
        for d in reversed(list(ds)):
            a = a * b + d
        return a

    def check(self, a) -> int:
        if not isinstance(a, (int, np.integer)) or not 0 <= int(a) < self.q:
            raise NotInField(f"{a!r} is not an element of {self.spec()}")
        return int(a)

    @property
    def _binary(self) -> bool:
        return self.base is None and self.p == 2

    @cached_property
    def _mod_int(self) -> int:
        return sum(c << i for i, c in enumerate(self.modulus))

    # -- field operations ---------------------------------------------
    def add(self, a: int, b: int) -> int:
        if self._binary:
            return a ^ b
        if self.m == 1 and self.base is None:
            return (a + b) % self.p
        return self.from_digits(self._badd(x, y) for x, y in zip(self.digits(a), self.digits(b)))

    def neg(self, a: int) -> int:
        if self._binary:
            return a
        return self.from_digits(self._bsub(0, x) for x in self.digits(a))

    def sub(self, a: int, b: int) -> int:
        if self._binary:
            return a ^ b
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        if self._binary:
            return self._mul2(a, b)
        if self.m == 1 and self.base is None:
            return a * b % self.p
        da, db = self.digits(a), self.digits(b)
        prod = [0] * (2 * self.m - 1)
        for i, x in enumerate(da):
            if x == 0:
                continue
            for j, y in enumerate(db):
                if y:
                    prod[i + j] = self._badd(prod[i + j], self._bmul(x, y))
        return self.from_digits(self._reduce(prod))

    def _mul2(self, a: int, b: int) -> int:
        r = 0
        while b:
            if b & 1:
                r ^= a
            b >>= 1
            a <<= 1
        m, g = self.m, self._mod_int
        for i in range(r.bit_length() - 1, m - 1, -1):
            if (r >> i) & 1:
                r ^= g << (i - m)
        return r

    def _reduce(self, coeffs: list[int]) -> list[int]:
        """Reduce a low-to-high coefficient list modulo the (monic) modulus."""
        c = list(coeffs)
        m, g = self.m, self.modulus
        for i in range(len(c) - 1, m - 1, -1):
            lead = c[i]
            if lead:
                for j in range(m + 1):
                    c[i - m + j] = self._bsub(c[i - m + j], self._bmul(lead, g[j]))
        c = c[:m] + [0] * max(0, m - len(c))
        return c

    def pow(self, a: int, e: int) -> int:
        if e < 0:
            return self.pow(self.inv(a), -e)
        r = 1
        while e:
            if e & 1:
                r = self.mul(r, a)
            a = self.mul(a, a)
            e >>= 1
        return r

    def inv(self, a: int) -> int:
        if a == 0:
            raise DivideByZero("0 has no inverse")
        if self.m == 1 and self.base is None:
            return pow(a, self.p - 2, self.p)
        return self.pow(a, self.q - 2)

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def elements(self) -> range:
        return range(self.q)

    @property
    def x(self) -> int:
        """The class of the indeterminate, x mod g."""
        return self.from_digits(self._reduce([0, 1]))

    def prime_field(self) -> FieldCtx:
        return gf(self.p)

    # -- cached tables for vectorised work ----------------------------
    def table(self, kind: str) -> np.ndarray:
        if self.q > TABLE_MAX_Q:
            raise TooLarge(f"tables are limited to q <= {TABLE_MAX_Q}")
        if kind not in self._cache:
            q = self.q
            if kind == "add":
                t = np.array([[self.add(a, b) for b in range(q)] for a in range(q)], dtype=np.int64)
            elif kind == "mul":
                t = np.zeros((q, q), dtype=np.int64)
                for a in range(q):
                    for b in range(a, q):
                        t[a, b] = t[b, a] = self.mul(a, b)
            elif kind == "neg":
                t = np.array([self.neg(a) for a in range(q)], dtype=np.int64)
            elif kind == "inv":
                t = np.array([0] + [self.inv(a) for a in range(1, q)], dtype=np.int64)
            else:
                raise ValueError(kind)
            t.setflags(write=False)
            self._cache[kind] = t
        return self._cache[kind]

    def vadd(self, a, b) -> np.ndarray:
        a, b = np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64)
        if self._binary:
            return a ^ b
        if self.m == 1 and self.base is None:
            return (a + b) % self.p
        return self.table("add")[a, b]

    def vneg(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        if self._binary:
            return a
        if self.m == 1 and self.base is None:
            return (-a) % self.p
        return self.table("neg")[a]

    def vsub(self, a, b) -> np.ndarray:
        return self.vadd(a, self.vneg(b))

    def vmul(self, a, b) -> np.ndarray:
        a, b = np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64)
        if self.m == 1 and self.base is None:
            return (a * b) % self.p
        if self.q <= TABLE_MAX_Q:
            return self.table("mul")[a, b]
        f = np.frompyfunc(lambda x, y: self.mul(int(x), int(y)), 2, 1)
        return f(a, b).astype(np.int64)

    # -- serialization ------------------------------------------------
    def spec(self) -> str:
        hi_first = list(reversed(self.modulus))
        if self.base is None:
            if self.p <= 36:
                coeffs = "".join(_DIGITS[c] for c in hi_first)
            else:
                coeffs = ",".join(map(str, hi_first))
            return f"GF({self.p}^{self.m})/{coeffs}"
        return f"[{self.base.spec()}]^{self.m}/" + ",".join(map(str, hi_first))


# -- construction ------------------------------------------------------

def _poly_divides(ctx_ops, a: list[int], b: list[int]) -> bool:
    """True when monic b divides a (both low-to-high over the ground field)."""
    add, sub, mul = ctx_ops
    r = list(a)
    db = len(b) - 1
    for i in range(len(r) - 1, db - 1, -1):
        lead = r[i]
        if lead:
            for j in range(db + 1):
                r[i - db + j] = sub(r[i - db + j], mul(lead, b[j]))
    return not any(r[:db])


class _Ground:
    """Scalar ops for the ground field used during modulus search."""

    def __init__(self, p: int, base: FieldCtx | None):
        self.p, self.base = p, base
        self.size = p if base is None else base.q

    def ops(self):
        if self.base is None:
            p = self.p
            return (lambda a, b: (a + b) % p, lambda a, b: (a - b) % p, lambda a, b: a * b % p)
        b = self.base
        return (b.add, b.sub, b.mul)


def is_irreducible(coeffs_low: list[int], p: int, base: FieldCtx | None = None) -> bool:
    """Trial division by every monic polynomial of degree 1..deg/2."""
    g = _Ground(p, base)
    ops = g.ops()
    m = len(coeffs_low) - 1
    if m <= 0:
        return False
    if m == 1:
        return True
    for d in range(1, m // 2 + 1):
        for tail in product(range(g.size), repeat=d):
            cand = list(reversed(tail)) + [1]
            if _poly_divides(ops, coeffs_low, cand):
                return False
    return True


def _search_modulus(p: int, m: int, base: FieldCtx | None) -> tuple[int, ...]:
    """Lexicographically smallest monic irreducible of degree m.

    Order is over the coefficient sequence written highest degree first,
    which equals numeric order of the base-b integer encoding.
    """
    size = p if base is None else base.q
    for tail in product(range(size), repeat=m):
        cand = list(reversed(tail)) + [1]
        if is_irreducible(cand, p, base):
            return tuple(cand)
    raise AssertionError("no irreducible polynomial found")  # cannot happen


def _parse_modulus(modulus, size: int) -> list[int]:
    """Accept MSB-first sequences, digit strings, or comma lists; return low-to-high."""
    if isinstance(modulus, str):
        s = modulus.strip()
        if "," in s:
            hi = [int(t) for t in s.split(",")]
        else:
            hi = [int(ch, 36) for ch in s]
    else:
        hi = [int(c) for c in modulus]
    if any(not 0 <= c < size for c in hi):
        raise NotInField(f"modulus coefficients must lie in [0, {size})")
    while hi and hi[0] == 0:
        hi = hi[1:]
    return list(reversed(hi))


def _build(p: int, m: int, modulus, base: FieldCtx | None) -> FieldCtx:
    size = p if base is None else base.q
    if m < 1:
        raise ValueError("degree must be at least 1")
    if size**m > caps.get("field_q"):
        raise TooLarge(f"q = {size}^{m} exceeds the enumeration cap")
    if modulus is None:
        low = _search_modulus(p, m, base)
    else:
        low = _parse_modulus(modulus, size)
        if len(low) != m + 1 or low[-1] != 1:
            raise ValueError(f"modulus must be monic of degree {m}")
        if not is_irreducible(low, p, base):
            raise Reducible(f"modulus {modulus!r} factors over the ground field")
        low = tuple(low)
    return FieldCtx(p, m, tuple(low), base)


def make_field(p: int, m: int = 1, modulus=None) -> FieldCtx:
    """GF(p^m) over the prime field; ``modulus`` is written highest degree first."""
    if not is_prime(p):
        raise NotPrime(f"{p} is not prime")
    return _build(p, m, modulus, None)


def extend(base: FieldCtx, n: int, modulus=None) -> FieldCtx:
    """GF(q^n) realised as GF(q)[x]/g for an irreducible g of degree n over ``base``."""
    return _build(base.p, n, modulus, base)


_GF_CACHE: dict = {}


def gf(q: int) -> FieldCtx:
    """Field of size q with the default (lexicographically smallest) modulus."""
    if q not in _GF_CACHE:
        p, m = prime_power(q)
        _GF_CACHE[q] = make_field(p, m)
    return _GF_CACHE[q]


def parse_field(spec: str) -> FieldCtx:
    spec = spec.strip()
    if spec.startswith("["):
        depth = 0
        for i, ch in enumerate(spec):
            depth += ch == "["
            depth -= ch == "]"
            if depth == 0:
                break
        base = parse_field(spec[1:i])
        rest = spec[i + 1 :]
        mo = re.fullmatch(r"\^(\d+)/(.+)", rest)
        if not mo:
            raise ValueError(f"bad field spec {spec!r}")
        return extend(base, int(mo.group(1)), mo.group(2))
    mo = re.fullmatch(r"GF\((\d+)\^(\d+)\)/(.+)", spec)
    if not mo:
        raise ValueError(f"bad field spec {spec!r}")
    return make_field(int(mo.group(1)), int(mo.group(2)), mo.group(3))


def arith(ctx: FieldCtx, a: int, b: int | None = None, kind: str = "add", e: int | None = None) -> int:
    """Single entry point for element arithmetic; ``kind`` is add|sub|mul|inv|pow."""
    a = ctx.check(a)
    if kind == "inv":
        return ctx.inv(a)
    if kind == "pow":
        return ctx.pow(a, e if e is not None else b)
    b = ctx.check(b)
    if kind == "add":
        return ctx.add(a, b)
    if kind == "sub":
        return ctx.sub(a, b)
    if kind == "mul":
        return ctx.mul(a, b)
    raise ValueError(f"unknown operation {kind!r}")


# -- polynomials ---------------------------------------------------------

class Poly:
    """Polynomial with coefficients (low-to-high) in ``ctx``."""

    __slots__ = ("ctx", "coeffs")

    def __init__(self, ctx: FieldCtx, coeffs):
        c = [int(x) for x in coeffs]
        while c and c[-1] == 0:
            c.pop()
        self.ctx = ctx
        self.coeffs = tuple(c)

    @classmethod
    def monomial(cls, ctx: FieldCtx, deg: int, coeff: int = 1) -> Poly:
        return cls(ctx, [0] * deg + [coeff])

    @property
    def degree(self) -> int | None:
        """None marks the zero polynomial."""
        return len(self.coeffs) - 1 if self.coeffs else None

    def is_zero(self) -> bool:
        return not self.coeffs

    def __eq__(self, other):
        return isinstance(other, Poly) and self.ctx == other.ctx and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"Poly({list(self.coeffs)})"

    def __add__(self, other: Poly) -> Poly:
        k = self.ctx
        a, b = self.coeffs, other.coeffs
        n = max(len(a), len(b))
        a = a + (0,) * (n - len(a))
        b = b + (0,) * (n - len(b))
        return Poly(k, [k.add(x, y) for x, y in zip(a, b)])

    def __neg__(self) -> Poly:
        return Poly(self.ctx, [self.ctx.neg(x) for x in self.coeffs])

    def __sub__(self, other: Poly) -> Poly:
        return self + (-other)

    def __mul__(self, other: Poly) -> Poly:
        k = self.ctx
        if self.is_zero() or other.is_zero():
            return Poly(k, [])
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, x in enumerate(self.coeffs):
            if x:
                for j, y in enumerate(other.coeffs):
                    if y:
                        out[i + j] = k.add(out[i + j], k.mul(x, y))
        return Poly(k, out)

    def scale(self, c: int) -> Poly:
        return Poly(self.ctx, [self.ctx.mul(c, x) for x in self.coeffs])

    def divmod(self, other: Poly) -> tuple[Poly, Poly]:
        k = self.ctx
        if other.is_zero():
            raise DivideByZero("division by the zero polynomial")
        r = list(self.coeffs)
        db = other.degree
        inv_lead = k.inv(other.coeffs[-1])
        quot = [0] * max(0, len(r) - db)
        for i in range(len(r) - 1, db - 1, -1):
            c = k.mul(r[i], inv_lead)
            if c:
                quot[i - db] = c
                for j, g in enumerate(other.coeffs):
                    r[i - db + j] = k.sub(r[i - db + j], k.mul(c, g))
        return Poly(k, quot), Poly(k, r[:db])

    def __mod__(self, other: Poly) -> Poly:
        return self.divmod(other)[1]

    def __call__(self, x: int) -> int:
        """Horner evaluation."""
        k = self.ctx
        acc = 0
        for c in reversed(self.coeffs):
            acc = k.add(k.mul(acc, x), c)
        return acc

    def eval_naive(self, x: int) -> int:
        k = self.ctx
        acc = 0
        for i, c in enumerate(self.coeffs):
            acc = k.add(acc, k.mul(c, k.pow(x, i)))
        return acc


def poly_to_element(ext: FieldCtx, F: Poly) -> int:
    if F.degree is not None and F.degree >= ext.m:
        F = F % Poly(F.ctx, ext.modulus)
    return ext.from_digits(list(F.coeffs) + [0] * (ext.m - len(F.coeffs)))


def element_to_poly(ext: FieldCtx, a: int) -> Poly:
    ground = ext.base if ext.base is not None else gf(ext.p)
    return Poly(ground, ext.digits(a))


def is_power_of(h: int, p: int) -> bool:
    if h < 1:
        return False
    while h % p == 0:
        h //= p
    return h == 1


def frob_pow_mod(ctx: FieldCtx, F: Poly, h: int, i: int, linear: bool = True) -> Poly:
    """F^(h^i) reduced modulo the modulus of ``ctx``.

    ``F`` has coefficients in the ground field of ``ctx``.  The power is
    taken by raising to the h-th power ``i`` times, reducing after each
    step.  With ``linear`` set, ``h`` must be a power of the characteristic,
    which makes the map additive in ``F``.
    """
    if i < 0:
        raise ValueError("i must be non-negative")
    if linear and not is_power_of(h, ctx.p):
        raise BadExponentBase(f"h={h} is not a power of the characteristic {ctx.p}")
    if F.degree is not None and F.degree >= ctx.m:
        raise ValueError("deg F must be below the modulus degree")
    a = poly_to_element(ctx, F)
    for _ in range(i):
        a = ctx.pow(a, h)
    return element_to_poly(ctx, a)


def check_axioms(ctx: FieldCtx) -> dict:
    """Exhaustive field-axiom check straight from the element operations."""
    q = ctx.q
    els = range(q)
    fails = []
    for a in els:
        if ctx.add(a, 0) != a or ctx.mul(a, 1) != a or ctx.add(a, ctx.neg(a)) != 0:
            fails.append(("identity", a))
        if a and ctx.mul(a, ctx.inv(a)) != 1:
            fails.append(("inverse", a))
        for b in els:
            if ctx.add(a, b) != ctx.add(b, a) or ctx.mul(a, b) != ctx.mul(b, a):
                fails.append(("commutative", a, b))
            for c in els:
                if ctx.add(ctx.add(a, b), c) != ctx.add(a, ctx.add(b, c)):
                    fails.append(("add-assoc", a, b, c))
                if ctx.mul(ctx.mul(a, b), c) != ctx.mul(a, ctx.mul(b, c)):
                    fails.append(("mul-assoc", a, b, c))
                if ctx.mul(a, ctx.add(b, c)) != ctx.add(ctx.mul(a, b), ctx.mul(a, c)):
                    fails.append(("distributive", a, b, c))
            if len(fails) > 10:
                break
    return {"field": ctx.spec(), "q": q, "triples": q**3, "failures": fails[:10], "ok": not fails}
