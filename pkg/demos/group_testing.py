"""Group testing walkthrough.

Builds a Kautz-Singleton matrix from a Reed-Solomon code, verifies that it is
3-disjunct, then decodes a few random defective sets with a couple of flipped
test outcomes. A small hand-made 5x8 matrix is also checked and shown to fail
1-disjunctness, with the offending column pair printed.

Run:  python demos/group_testing.py
"""
import numpy as np

from derand.field import make_field
from derand.gtest import MeasurementMatrix, distance_decode, ks_matrix, verify_matrix
from derand.lincode import rs_code

SMALL = np.array([
    [1, 1, 0, 0, 1, 0, 1, 0],
    [1, 0, 1, 1, 0, 0, 0, 1],
    [1, 1, 1, 0, 0, 1, 0, 0],
    [0, 0, 1, 1, 1, 1, 0, 0],
    [0, 1, 0, 0, 0, 1, 1, 1],
])


def main():
    ks = ks_matrix(rs_code(make_field(2, 3), 8, 2))
    print(f"Kautz-Singleton matrix: {ks.m} tests, {ks.n} items")
    res = verify_matrix(ks, ("disjunct", {"d": 3, "e": 4}))
    print(f"(3,4)-disjunct: {res['status']}")

    rng = np.random.default_rng(0)
    for trial in range(5):
        x = np.zeros(ks.n, dtype=np.int64)
        x[rng.choice(ks.n, 3, replace=False)] = 1
        y = ks.measure(x).astype(np.int64)
        y[rng.choice(ks.m, 2, replace=False)] ^= 1
        got = distance_decode(ks, y, 4)
        print(f"  trial {trial}: defectives {np.nonzero(x)[0].tolist()} -> decoded {got}")

    res = verify_matrix(MeasurementMatrix(SMALL), "disjunct:1,0")
    w = res["witness"]
    print(f"5x8 matrix, 1-disjunct: {res['status']}; column {w['C0'] + 1} "
          f"is covered by column {w['others'][0] + 1}")


if __name__ == "__main__":
    main()
