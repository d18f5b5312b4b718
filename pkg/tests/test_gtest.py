import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from derand.errors import BadThresholds, ColumnMismatch, Infeasible, MissingProvenance, TooLarge
from derand.field import make_field
from derand.gtest import (
    REFUTED,
    SAMPLED,
    VERIFIED,
    MeasurementMatrix,
    Mixture,
    agreement_decode,
    bipartite_progression,
    cond_graph_matrix,
    cond_regular_matrix,
    direct_product,
    distance_decode,
    ks_matrix,
    mixture_from_outcome,
    parse_property,
    random_matrix,
    regular_margin,
    regular_row_count,
    resilience_claim,
    separation,
    threshold_measure,
    verify_matrix,
)
from derand.lincode import rs_code
from derand.prand import lhl_map


# -- naive oracles ----------------------------------------------------------

def supp(col):
    return set(np.nonzero(col)[0].tolist())


def naive_disjunct(M, d, e):
    n = M.shape[1]
    for c0 in range(n):
        others = [c for c in range(n) if c != c0]
        for C in itertools.combinations(others, min(d, len(others))):
            rest = supp(M[:, c0]) - set().union(*(supp(M[:, c]) for c in C))
            if len(rest) <= e:
                return False
    return True


def naive_regular(M, d, e, u, distinguished=False):
    n = M.shape[1]
    A = M.astype(int)
    for s in range(u, d + 1):
        for S in itertools.combinations(range(n), s):
            pool = [c for c in range(n) if c not in S]
            for Z in itertools.combinations(pool, min(s, len(pool))):
                ok = (A[:, list(S)].sum(1) == u) & (A[:, list(Z)].sum(1) == 0)
                checks = [ok & (A[:, i] == 1) for i in S] if distinguished else [ok]
                if any(c.sum() <= e for c in checks):
                    return False
    return True


def sparse_vectors(n, d):
    for w in range(0, d + 1):
        for S in itertools.combinations(range(n), w):
            x = np.zeros(n, dtype=np.int64)
            x[list(S)] = 1
            yield x


# -- printed 5x8 example -------------------------------------------------------

def test_printed_matrix_not_1_disjunct(printed_matrix):
    mm = MeasurementMatrix(printed_matrix)
    res = verify_matrix(mm, "disjunct:1,0", all_witnesses=True)
    assert res["status"] == REFUTED
    # every witness is a genuine containment
    for w in res["witnesses"]:
        assert supp(printed_matrix[:, w["C0"]]) <= supp(printed_matrix[:, w["others"][0]])
    pairs = {(w["C0"] + 1, w["others"][0] + 1) for w in res["witnesses"]}
    assert (3, 6) in pairs
    assert supp(printed_matrix[:, 2]) == {0, 1, 4} and supp(printed_matrix[:, 5]) == {0, 1, 2, 4}
    assert mm.claims[-1]["status"] == REFUTED and "witness" in mm.claims[-1]


def test_printed_matrix_decoding(printed_matrix):
    mm = MeasurementMatrix(printed_matrix)
    x = np.zeros(8, dtype=np.int64)
    x[[0, 1, 3]] = 1
    y = mm.measure(x)
    assert y.tolist() == [1, 1, 1, 0, 1]
    assert [c + 1 for c in distance_decode(mm, y, 0)] == [1, 2, 3, 4, 6]
    assert distance_decode(mm, np.ones(5, dtype=np.int64), 0) == list(range(8))


def test_identity_disjunct():
    assert verify_matrix(MeasurementMatrix(np.eye(5, dtype=np.uint8)), "disjunct:4,0")["status"] == VERIFIED


def test_parse_property():
    assert parse_property("disjunct:3,0") == ("disjunct", {"d": 3, "e": 0})
    assert parse_property("regular:4,1,2") == ("regular", {"d": 4, "e": 1, "u": 2})
    with pytest.raises(Exception):
        parse_property("disjunct:3")


# -- agreement with naive scans ---------------------------------------------------

@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(4, 7), st.integers(3, 9), st.integers(1, 2), st.integers(0, 1))
def test_disjunct_scan_matches_naive(seed, n, m, d, e):
    M = (np.random.default_rng(seed).random((m, n)) < 0.4).astype(np.uint8)
    res = verify_matrix(MeasurementMatrix(M), ("disjunct", {"d": d, "e": e}), record=False)
    assert (res["status"] == VERIFIED) == naive_disjunct(M, d, e)
    if res["status"] == REFUTED:
        w = res["witness"]
        rest = supp(M[:, w["C0"]]) - set().union(*(supp(M[:, c]) for c in w["others"]))
        assert len(rest) <= e


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(4, 6), st.integers(6, 16), st.integers(1, 2),
       st.integers(0, 1), st.booleans())
def test_regular_scan_matches_naive(seed, n, m, u, e, dist):
    d = min(n - 1, u + 1)
    M = (np.random.default_rng(seed).random((m, n)) < 0.35).astype(np.uint8)
    prop = ("threshold" if dist else "regular", {"d": d, "e": e, "u": u})
    res = verify_matrix(MeasurementMatrix(M), prop, record=False)
    assert (res["status"] == VERIFIED) == naive_regular(M, d, e, u, dist)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(4, 6), st.integers(8, 16))
def test_regular_margin_is_tight(seed, n, m):
    M = (np.random.default_rng(seed).random((m, n)) < 0.35).astype(np.uint8)
    mm = MeasurementMatrix(M)
    e = regular_margin(mm, 2, 1)["e"]
    if e >= 0:
        assert verify_matrix(mm, ("regular", {"d": 2, "e": e, "u": 1}), record=False)["status"] == VERIFIED
    assert verify_matrix(mm, ("regular", {"d": 2, "e": e + 1, "u": 1}), record=False)["status"] == REFUTED


def test_verify_cap():
    mm = MeasurementMatrix(np.eye(200, dtype=np.uint8))
    with pytest.raises(TooLarge):
        verify_matrix(mm, "regular:6,0,3")


# -- random constructions ----------------------------------------------------

def test_random_disjunct_most_seeds():
    ok = sum(verify_matrix(random_matrix("disjunct", 30, 2, np.random.default_rng(s)), "disjunct:2,0")["status"]
             == VERIFIED for s in range(100))
    assert ok >= 95


def test_random_disjunct_identity_fallback():
    mm = random_matrix("disjunct", 7, 1, np.random.default_rng(0))
    assert np.array_equal(mm.M, np.eye(7))
    assert verify_matrix(mm, "disjunct:6,0")["status"] == VERIFIED


def test_random_regular_margin():
    mm = random_matrix("regular", 20, 4, np.random.default_rng(0), u=2)
    assert regular_margin(mm, 4, 2)["e"] >= 1


def test_regular_rows_pairwise_independent():
    # degree-1 polynomial rows: entries at two distinct columns are independent with the row density
    mm = random_matrix("regular", 8, 2, np.random.default_rng(4), m=20000, u=1)
    block = mm.M[:20000].astype(float)
    rho = 1 / 8
    assert block[:, 0].mean() == pytest.approx(rho, abs=0.01)
    assert (block[:, 0] * block[:, 5]).mean() == pytest.approx(rho * rho, abs=0.005)


# -- Kautz-Singleton -----------------------------------------------------------

@pytest.fixture(scope="module")
def ks():
    return ks_matrix(rs_code(make_field(2, 2), 4, 2))


def test_ks_shape_and_claims(ks):
    assert ks.M.shape == (16, 16)
    assert set(ks.M.sum(axis=0).tolist()) == {4}
    assert {"property": "disjunct", "params": {"d": 3, "e": 0}, "status": "claimed"} in ks.claims


def test_ks_verified(ks):
    assert verify_matrix(ks, "disjunct:3,0")["status"] == VERIFIED
    assert naive_disjunct(ks.M, 3, 0)


def test_ks_strong_u2():
    mm = ks_matrix(rs_code(make_field(2, 2), 4, 2), u=2)
    assert mm.M.shape == (64, 16)
    c = mm.claims[0]
    assert c["property"] == "strong" and c["params"]["u"] == 2
    assert verify_matrix(mm, ("strong", c["params"]))["status"] == VERIFIED


# -- codeword-graph matrices --------------------------------------------------

@pytest.fixture(scope="module")
def cg():
    return cond_graph_matrix(lhl_map(8, 6, "condenser", k=4))


def test_codeword_graph_column_weight(cg):
    assert cg.M.shape == (256 * 64, 256)
    assert set(cg.M.sum(axis=0).tolist()) == {256}


def test_identity_map_graph():
    from derand.field import gf
    from derand.prand import linear_map
    f = linear_map(gf(2), [np.eye(4, dtype=np.int64)])
    mm = cond_graph_matrix(f)
    assert np.array_equal(mm.M, np.eye(16))


def test_agreement_decoder(cg):
    rng = np.random.default_rng(0)
    for _ in range(100):
        x = np.zeros(256, dtype=np.int64)
        x[rng.choice(256, 4, replace=False)] = 1
        out = agreement_decode(cg, cg.measure(x), 1 / 128, 1 / 16)
        assert supp(x) <= set(out) and len(out) < 16
    x = np.zeros(256, dtype=np.int64)
    x[9] = 1
    mix = mixture_from_outcome(cg, cg.measure(x))
    f = cg.source_map
    assert mix.agreement(f.table()[:, 9]) == 1


def test_agreement_list_matches_decoder(cg):
    rng = np.random.default_rng(2)
    f = cg.source_map
    words = f.table().T  # column x -> its codeword (one symbol per seed)
    for _ in range(5):
        x = np.zeros(256, dtype=np.int64)
        x[rng.choice(256, 4, replace=False)] = 1
        y = cg.measure(x)
        mix = mixture_from_outcome(cg, y)
        assert mix.agreement_list(words, 1 - 8) == list(range(256))
        assert mix.agreement_list(words, 1 - (1 / 128) / (1 / 16)) == agreement_decode(cg, y, 1 / 128, 1 / 16)
        # list size bound at the mixture's own density
        alpha = mix.rho(64) * 2 ** (6 - 4) + f.eps
        assert len(mix.agreement_list(words, alpha)) < 16


def test_agreement_needs_provenance(printed_matrix):
    with pytest.raises(MissingProvenance):
        agreement_decode(MeasurementMatrix(printed_matrix), np.ones(5), 0.1, 0.5)


def test_resilience_claim(cg):
    f = cg.source_map
    assert resilience_claim(f, 1 / 64, 1 / 128, 1 / 16) == {"e0": 256.0, "e1": 32.0, "e0p": 12.0, "e1p": 0, "d": 4.0}
    assert resilience_claim(f, 1 / 16, 1 / 128, 1 / 16) is None


def test_mixture_weights():
    mix = Mixture([{0, 1}, {2}, set()])
    assert mix.wgt() == 3 and mix.rho(4) == pytest.approx(3 / 12)


# -- direct product --------------------------------------------------------------

def test_direct_product_rows():
    rng = np.random.default_rng(6)
    a = MeasurementMatrix((rng.random((5, 9)) < 0.3).astype(np.uint8))
    b = MeasurementMatrix((rng.random((7, 9)) < 0.3).astype(np.uint8))
    p = direct_product(a, b)
    assert p.m == 35
    for _ in range(20):
        i, j = int(rng.integers(5)), int(rng.integers(7))
        assert np.array_equal(p.M[i * 7 + j], a.M[i] | b.M[j])
    with pytest.raises(ColumnMismatch):
        direct_product(a, MeasurementMatrix(np.eye(4, dtype=np.uint8)))


def test_direct_product_threshold():
    m1 = random_matrix("regular", 12, 2, np.random.default_rng(0), u=1)
    m2 = random_matrix("disjunct", 12, 4, np.random.default_rng(0))
    assert verify_matrix(m1, "regular:2,0,1")["status"] == VERIFIED
    assert verify_matrix(m2, "disjunct:4,0")["status"] == VERIFIED
    p = direct_product(m1, m2)
    assert {"property": "threshold", "params": {"d": 2, "e": 0, "u": 2}, "status": "claimed"} in p.claims
    assert verify_matrix(p, "threshold:2,0,2")["status"] == VERIFIED
    assert p.claims[0]["status"] == VERIFIED


# -- condenser-based regular matrices ------------------------------------------

def tiny_condensers():
    return [lhl_map(6, 3, "condenser", k=2), lhl_map(6, 4, "condenser", k=3)]


def test_bipartite_progression():
    nb = bipartite_progression(8, 4, 2)
    assert all(len(v) == 4 for v in nb)
    left = [sum(a in v for v in nb) for a in range(8)]
    assert set(left) == {2}
    with pytest.raises(Infeasible):
        bipartite_progression(8, 4, 5)
    with pytest.raises(Infeasible):
        bipartite_progression(6, 4, 2)


def test_default_left_degree_infeasible_at_tiny_scale():
    with pytest.raises(Infeasible):
        cond_regular_matrix(4, 2, 0.5, tiny_condensers())


def test_cond_regular_row_count():
    mm = cond_regular_matrix(4, 2, 0.5, tiny_condensers(), d_left=2)
    assert mm.M.shape == (6144, 64)
    assert mm.m == regular_row_count(tiny_condensers(), 2, 2)
    assert mm.claims[0]["note"]


def test_cond_regular_single_level():
    f = lhl_map(4, 2, "condenser", k=1)
    mm = cond_regular_matrix(1, 1, 0.5, [f], d_left=1)
    # singleton subsets of a degree-1 graph: one row per (seed, symbol), the codeword graph up to row order
    cg = cond_graph_matrix(f).M
    assert sorted(map(bytes, mm.M)) == sorted(map(bytes, cg))


@pytest.mark.slow
def test_cond_regular_tiny_verified():
    mm = cond_regular_matrix(4, 2, 0.5, tiny_condensers(), d_left=2)
    assert verify_matrix(mm, "regular:4,1,2")["status"] == VERIFIED


# -- outcome separation ----------------------------------------------------------

def test_or_monotone():
    rng = np.random.default_rng(8)
    mm = MeasurementMatrix((rng.random((12, 10)) < 0.3).astype(np.uint8))
    for _ in range(300):
        x = (rng.random(10) < 0.3).astype(np.int64)
        xp = x | (rng.random(10) < 0.3)
        assert supp(mm.measure(x)) <= supp(mm.measure(xp))


def separated_pairs(mm, d, e, u=1, threshold=False):
    n = mm.n
    vecs = list(sparse_vectors(n, d))
    meas = {tuple(x): threshold_measure(mm, x, u, u) for x in vecs}
    for x in vecs:
        sx = supp(x)
        if threshold and len(sx) < u:
            continue
        for xp in vecs:
            sp = supp(xp)
            if sx <= sp:
                continue
            if threshold and len(sx) < len(sp - sx):
                continue
            a, b = meas[tuple(x)], meas[tuple(xp)]
            if np.count_nonzero((a == 1) & (b == 0)) <= e:
                return False
    return True


def test_classic_disjunct_forward():
    hits = 0
    for s in range(30):
        M = (np.random.default_rng(s).random((14, 9)) < 0.35).astype(np.uint8)
        mm = MeasurementMatrix(M)
        for d in (1, 2):
            if verify_matrix(mm, ("disjunct", {"d": d, "e": 0}), record=False)["status"] == VERIFIED:
                hits += 1
                assert separated_pairs(mm, d, 0)
    assert hits > 0


def test_classic_disjunct_converse():
    hits = 0
    for s in range(30):
        M = (np.random.default_rng(100 + s).random((24, 8)) < 0.35).astype(np.uint8)
        mm = MeasurementMatrix(M)
        if separated_pairs(mm, 2, 0):
            hits += 1
            assert verify_matrix(mm, ("disjunct", {"d": 1, "e": 0}), record=False)["status"] == VERIFIED
    assert hits > 0


def test_threshold_disjunct_separates():
    m1 = random_matrix("regular", 8, 2, np.random.default_rng(1), u=1)
    m2 = random_matrix("disjunct", 8, 4, np.random.default_rng(1))
    p = direct_product(m1, m2)
    assert verify_matrix(p, "threshold:2,0,2")["status"] == VERIFIED
    assert separated_pairs(p, 2, 0, u=2, threshold=True)


def test_fixed_input_separation():
    n, d = 12, 2
    m = math.ceil(8 * d * math.log2(n))
    rng = np.random.default_rng(13)
    x = np.zeros(n, dtype=np.int64)
    x[rng.choice(n, d, replace=False)] = 1
    ys = [np.array(v) for v in itertools.product((0, 1), repeat=n)]
    good = 0
    for s in range(50):
        mm = random_matrix("disjunct", n, d, np.random.default_rng(s), m=m)
        mx = mm.measure(x)
        good += all(np.count_nonzero(mm.measure(y) != mx) > 0 for y in ys if not np.array_equal(y, x))
    assert good >= 45


def test_threshold_measure_rules():
    M = np.array([[1, 1, 1, 0], [1, 0, 0, 0], [0, 1, 1, 1]], dtype=np.uint8)
    mm = MeasurementMatrix(M)
    x = np.array([1, 1, 0, 0])
    assert np.array_equal(threshold_measure(mm, x, 1, 1), mm.measure(x))
    assert threshold_measure(mm, np.zeros(4, dtype=np.int64), 1, 2).tolist() == [0, 0, 0]
    assert threshold_measure(mm, x, 1, 2).tolist() == [1, 0, 0]
    assert threshold_measure(mm, x, 1, 2, tie="ones").tolist() == [1, 1, 1]
    with pytest.raises(BadThresholds):
        threshold_measure(mm, x, 3, 2)
    assert separation(mm, x, np.array([0, 0, 0, 1])) == 2


def test_distance_decoder_recovers():
    mm = random_matrix("disjunct", 20, 2, np.random.default_rng(3), m=160)
    res = verify_matrix(mm, ("disjunct", {"d": 2, "e": 4}), record=False)
    assert res["status"] == VERIFIED
    rng = np.random.default_rng(7)
    for _ in range(10**4):
        x = np.zeros(20, dtype=np.int64)
        x[rng.choice(20, int(rng.integers(1, 3)), replace=False)] = 1
        y = mm.measure(x).astype(np.int64)
        flip = rng.choice(mm.m, 2, replace=False)
        y[flip] ^= 1
        assert distance_decode(mm, y, 4) == sorted(supp(x))


def test_sampled_resilience_never_verifies(cg):
    res = verify_matrix(cg, ("resilient", {"e0": 0, "e1": 0, "e0p": 12, "e1p": 0, "d": 4}), trials=20,
                        decoder=lambda y: agreement_decode(cg, y, 1 / 128, 1 / 16))
    assert res["status"] == SAMPLED


def test_save_load_roundtrip(tmp_path, ks):
    path = tmp_path / "ks.qm"
    ks.save(str(path))
    back = MeasurementMatrix.load(str(path))
    assert np.array_equal(back.M, ks.M)
    assert back.claims == ks.claims
    side = json.loads((tmp_path / "ks.qm.claims.json").read_text())
    assert side["provenance"]["construction"] == "kautz-singleton"
