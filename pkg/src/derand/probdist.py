"""Finite distributions with exact (Fraction) or float masses.

Distance to min-entropy
-----------------------
``dist_to_minentropy(a, b)`` returns ``sum_x max(a(x) - 2^-b, 0)``.  This is
the exact minimum of ``stat_distance(a, c)`` over distributions ``c`` whose
masses are all at most ``c_max = 2^-b``:

* lower bound: for any such ``c`` the event ``T = {x : a(x) > c_max}`` has
  ``a(T) - c(T) >= sum_{x in T} (a(x) - c_max)``, and the statistical
  distance is at least the gap on any event;
* attained: remove the excess above ``c_max`` from the atoms in ``T`` and
  pour it into atoms below the cap.  The free room below the cap is
  ``N * c_max - 1 + excess >= excess`` whenever ``N * c_max >= 1``, so the
  result is a valid capped distribution at distance exactly ``excess``.
"""

from __future__ import annotations

import json
import math
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import BadRange, DomainMismatch, Infeasible

RATIONAL = "rational"
DOUBLE = "double"


class Dist:
    __slots__ = ("mass", "backend", "labels")

    def __init__(self, mass: Sequence, backend: str | None = None, labels=None, check: bool = True):
        if backend is None:
            backend = RATIONAL if all(isinstance(x, (int, Fraction)) for x in mass) else DOUBLE
        if backend == RATIONAL:
            m = tuple(Fraction(x) for x in mass)
            if check and (sum(m) != 1 or any(x < 0 for x in m)):
                raise ValueError("masses must be non-negative and sum to 1")
        elif backend == DOUBLE:
            m = tuple(float(x) for x in mass)
            if check and (abs(math.fsum(m) - 1.0) > 1e-12 or any(x < 0 for x in m)):
                raise ValueError("masses must be non-negative and sum to 1")
        else:
            raise ValueError(f"unknown backend {backend!r}")
        self.mass = m
        self.backend = backend
        self.labels = labels

    # constructors
    @classmethod
    def uniform(cls, n: int, backend: str = RATIONAL) -> Dist:
        one = Fraction(1, n) if backend == RATIONAL else 1.0 / n
        return cls([one] * n, backend, check=False)

    @classmethod
    def point(cls, n: int, i: int, backend: str = RATIONAL) -> Dist:
        m = [0] * n
        m[i] = 1
        return cls(m, backend)

    @classmethod
    def flat(cls, n: int, support: Iterable[int], backend: str = RATIONAL) -> Dist:
        s = sorted(set(support))
        if not s:
            raise ValueError("empty support")
        one = Fraction(1, len(s)) if backend == RATIONAL else 1.0 / len(s)
        m = [0] * n
        for i in s:
            m[i] = one
        return cls(m, backend, check=False)

    @classmethod
    def from_counts(cls, counts: Sequence[int], backend: str = RATIONAL) -> Dist:
        counts = [int(c) for c in counts]
        total = sum(counts)
        if backend == RATIONAL:
            return cls([Fraction(c, total) for c in counts], backend, check=False)
        return cls([c / total for c in counts], backend, check=False)

    def __len__(self) -> int:
        return len(self.mass)

    @property
    def n(self) -> int:
        return len(self.mass)

    def __eq__(self, other):
        return isinstance(other, Dist) and self.mass == other.mass

    def __repr__(self):
        return f"Dist({[str(x) for x in self.mass]}, {self.backend})"

    def support(self) -> list[int]:
        return [i for i, x in enumerate(self.mass) if x > 0]

    def to_double(self) -> Dist:
        return Dist([float(x) for x in self.mass], DOUBLE, self.labels, check=False)

    def pushforward(self, f, size: int) -> Dist:
        out = [0] * size
        for i, x in enumerate(self.mass):
            if x:
                out[f(i)] += x
        return Dist(out, self.backend, check=False)

    def to_json(self) -> str:
        if self.backend == RATIONAL:
            return json.dumps([f"{x.numerator}/{x.denominator}" for x in self.mass])
        return json.dumps(list(self.mass))

    @classmethod
    def from_json(cls, text: str) -> Dist:
        vals = json.loads(text)
        if vals and isinstance(vals[0], str):
            return cls([Fraction(v) for v in vals], RATIONAL)
        return cls(vals, DOUBLE)


def mix(weights: Sequence, dists: Sequence[Dist]) -> Dist:
    n = dists[0].n
    if any(d.n != n for d in dists):
        raise DomainMismatch("all components must share a domain")
    out = [0] * n
    for w, d in zip(weights, dists):
        for i, x in enumerate(d.mass):
            out[i] += w * x
    backend = RATIONAL if all(d.backend == RATIONAL for d in dists) and all(
        isinstance(w, (int, Fraction)) for w in weights) else DOUBLE
    return Dist(out, backend)


def stat_distance(a: Dist, b: Dist):
    if a.n != b.n:
        raise DomainMismatch(f"domain sizes differ: {a.n} vs {b.n}")
    if a.backend == RATIONAL and b.backend == RATIONAL:
        return sum(abs(x - y) for x, y in zip(a.mass, b.mass)) / 2
    return 0.5 * math.fsum(abs(float(x) - float(y)) for x, y in zip(a.mass, b.mass))


def max_event_gap(a: Dist, b: Dist):
    """max_T |a(T) - b(T)|, attained at T = {x : a(x) > b(x)}."""
    if a.n != b.n:
        raise DomainMismatch(f"domain sizes differ: {a.n} vs {b.n}")
    return sum(x - y for x, y in zip(a.mass, b.mass) if x > y)


def _log2(x) -> float:
    if isinstance(x, Fraction):
        return math.log2(x.numerator) - math.log2(x.denominator)
    return math.log2(x)


def min_entropy(a: Dist) -> float:
    top = max(a.mass)
    return 0.0 if top == 1 else -_log2(top)


def shannon_entropy(a: Dist, base: float = 2) -> float:
    h = 0.0
    for x in a.mass:
        if x > 0:
            h -= float(x) * _log2(x)
    return h / math.log2(base)


def _cap(b, backend: str):
    if backend == RATIONAL:
        fb = Fraction(b)
        if fb.denominator == 1:
            return Fraction(1, 2 ** int(fb)) if fb >= 0 else Fraction(2 ** int(-fb))
    return 2.0 ** (-float(b))


def dist_to_minentropy(a: Dist, b):
    """Exact distance from ``a`` to the set of distributions with min-entropy >= b."""
    if a.n * 2.0 ** (-float(b)) < 1 - 1e-15 or (Fraction(b).denominator == 1 and a.n < 2 ** int(b)):
        raise Infeasible(f"no distribution on {a.n} points has min-entropy {b}")
    cap = _cap(b, a.backend)
    if isinstance(cap, Fraction):
        return sum((x - cap for x in a.mass if x > cap), Fraction(0))
    return math.fsum(float(x) - cap for x in a.mass if float(x) > cap)


def excess_from_counts(counts, total: int, cap_den: int) -> Fraction:
    """dist_to_minentropy for the distribution counts/total with cap 1/cap_den, exactly."""
    c = np.asarray(counts, dtype=np.int64)
    # sum over x of max(c/total - 1/cap_den, 0) = sum max(c*cap_den - total, 0) / (total*cap_den)
    num = int(np.maximum(c * cap_den - total, 0).sum())
    return Fraction(num, total * cap_den)


def uniform_distance_from_counts(counts, total: int, cells: int) -> Fraction:
    """Statistical distance between counts/total (over ``cells`` cells) and uniform."""
    c = np.asarray(counts, dtype=np.int64)
    absent = cells - c.size
    num = int(np.abs(c * cells - total).sum()) + absent * total
    return Fraction(num, 2 * total * cells)


def hq(q: int, x: float) -> float:
    if q < 2:
        raise BadRange("q must be at least 2")
    if not 0 <= x <= 1:
        raise BadRange(f"x={x} outside [0, 1]")
    lq = math.log(q)
    out = 0.0
    if x > 0:
        out += x * math.log(q - 1) / lq - x * math.log(x) / lq
    if x < 1:
        out -= (1 - x) * math.log(1 - x) / lq
    return out
