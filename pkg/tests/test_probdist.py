import itertools
import math
from fractions import Fraction as Fr

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

from derand.errors import BadRange, DomainMismatch, Infeasible
from derand.probdist import (
    Dist,
    dist_to_minentropy,
    hq,
    max_event_gap,
    min_entropy,
    mix,
    stat_distance,
)


def test_stat_distance_examples():
    assert stat_distance(Dist.uniform(2), Dist.uniform(2)) == 0
    assert stat_distance(Dist.point(2, 0), Dist.uniform(2)) == Fr(1, 2)
    assert stat_distance(Dist([Fr(3, 4), Fr(1, 4)]), Dist([Fr(1, 4), Fr(3, 4)])) == Fr(1, 2)


def test_domain_mismatch():
    with pytest.raises(DomainMismatch):
        stat_distance(Dist.uniform(2), Dist.uniform(3))


def test_min_entropy_examples():
    assert min_entropy(Dist.uniform(8)) == 3.0
    assert min_entropy(Dist.point(4, 1)) == 0.0
    assert min_entropy(Dist([Fr(1, 2), Fr(1, 4), Fr(1, 4)])) == 1.0


def test_dist_to_minentropy_examples():
    assert dist_to_minentropy(Dist.uniform(4), 2) == 0
    assert dist_to_minentropy(Dist([Fr(1, 2), Fr(1, 2), 0, 0]), 2) == Fr(1, 2)
    assert dist_to_minentropy(Dist.point(2, 0), 1) == Fr(1, 2)
    with pytest.raises(Infeasible):
        dist_to_minentropy(Dist.uniform(2), 2)


def test_hq_examples():
    assert hq(2, 0.5) == pytest.approx(1.0)
    assert hq(2, 0) == 0.0
    for q in (2, 3, 4, 7):
        assert hq(q, (q - 1) / q) == pytest.approx(1.0)
    with pytest.raises(BadRange):
        hq(2, 1.5)


def rational_dists(n):
    return st.lists(st.integers(0, 20), min_size=n, max_size=n).filter(any).map(
        lambda c: Dist.from_counts(c))


@settings(max_examples=1000, deadline=None)
@given(rational_dists(5), rational_dists(5), rational_dists(5))
def test_triangle_inequality(a, b, c):
    assert stat_distance(a, c) <= stat_distance(a, b) + stat_distance(b, c)


@settings(max_examples=300, deadline=None)
@given(rational_dists(6), rational_dists(6))
def test_distance_is_max_event_gap(a, b):
    # brute force over all events
    best = max(abs(sum(a.mass[i] - b.mass[i] for i in T))
               for r in range(7) for T in itertools.combinations(range(6), r))
    assert stat_distance(a, b) == best == max_event_gap(a, b)


@settings(max_examples=300, deadline=None)
@given(rational_dists(5), rational_dists(5), rational_dists(5), st.fractions(0, 1))
def test_convex_combination_of_close(y, x1, x2, lam):
    eps = max(stat_distance(x1, y), stat_distance(x2, y))
    z = mix([lam, 1 - lam], [x1, x2])
    assert stat_distance(z, y) <= eps


def lp_distance_to_capped(a, cap):
    """Minimum distance to a capped distribution, solved as a linear program."""
    n = a.n
    av = np.array([float(x) for x in a.mass])
    # variables: c (n), t (n); minimise sum t / 2 with t >= |a - c|
    cost = np.concatenate([np.zeros(n), np.full(n, 0.5)])
    A_ub = np.block([[np.eye(n), -np.eye(n)], [-np.eye(n), -np.eye(n)]])
    b_ub = np.concatenate([av, -av])
    A_eq = np.concatenate([np.ones(n), np.zeros(n)])[None, :]
    bounds = [(0, cap)] * n + [(0, None)] * n
    res = linprog(cost, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=[1.0], bounds=bounds)
    return res.fun


@settings(max_examples=200, deadline=None)
@given(rational_dists(8), st.sampled_from([0, 1, 2, 3]))
def test_clip_excess_matches_lp(a, b):
    assert float(dist_to_minentropy(a, b)) == pytest.approx(lp_distance_to_capped(a, 2.0**-b), abs=1e-9)


@settings(max_examples=300, deadline=None)
@given(rational_dists(8), st.sampled_from([0, 1, 2, 3]))
def test_zero_distance_iff_min_entropy(a, b):
    assert (dist_to_minentropy(a, b) == 0) == (min_entropy(a) >= b - 1e-12)


def test_flat_map_support_bound():
    # all flat sources on 12 points with K <= 6, each pushed through a random map into K..12 points;
    # an image covering at least (1 - eps) K values is within eps of min-entropy log K
    rng = np.random.default_rng(5)
    N = 12
    for K in range(1, 7):
        for S in itertools.combinations(range(N), K):
            M = int(rng.integers(K, N + 1))
            f = rng.integers(0, M, size=N)
            img = Dist.flat(N, S).pushforward(lambda x: int(f[x]), M)
            eps = 1 - Fr(len(set(f[list(S)].tolist())), K)
            assert float(dist_to_minentropy(img, math.log2(K))) <= float(eps) + 1e-12


def test_json_roundtrip():
    d = Dist([Fr(1, 3), Fr(2, 3)])
    assert Dist.from_json(d.to_json()) == d
