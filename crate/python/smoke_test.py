"""Smoke test for the curtangent Python extension.

Build the extension first (see README), then run:

    python python/smoke_test.py
"""

import math
import os
import sys
import tempfile

import curtangent as ct


def fro(a):
    return math.sqrt(sum(x * x for row in a for x in row))


def sub(a, b):
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def main():
    # 3x3 worked example: CUR sees only the first row and column.
    m = [[1.0 / 3.0] * 3 for _ in range(3)]
    sel = ct.SelectionPair([0], [0], 3, 3)
    a = [row[:] for row in m]
    a[2][2] += 2.0 / 3.0
    assert fro(sub(ct.cur_rank_truncated(a, sel, 1), m)) <= 1e-14
    assert abs(fro(sub(ct.truncate_rank(a, 1), m)) - math.sqrt(33) / 9) <= 1e-12

    tp = ct.TangentPoint(ct.compact_svd(m), sel)
    du, dv, npv = tp.obliqueness()
    assert abs(du - math.sqrt(2)) < 1e-12 and abs(npv - math.sqrt(3)) < 1e-12

    svd, sel, tp = ct.test_problem(seed=3)
    assert svd.rank == 5 and len(sel.rows) == 10
    base = svd.reconstruct()
    assert fro(sub(ct.cur_rank_truncated(base, sel, 5), base)) <= 1e-11 * fro(base)
    e = ct.perturbation("invisible", svd, sel, seed=9)
    assert fro(tp.project(e)) <= 1e-13

    try:
        ct.SelectionPair([0, 0], [1], 3, 3)
    except ValueError:
        pass
    else:
        raise AssertionError("duplicate indices accepted")

    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "generic.csv")
        recs = ct.run_experiment("generic", seed=7, out=path)
        assert len(recs) == 15
        with open(path) as f:
            assert f.readline().strip() == "epsilon,alpha,err_cur,err_svd,pred_cur,pred_svd"

    checks = ct.run_verification("projectors")
    assert all(passed for _, passed, _ in checks), checks
    print("smoke test passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
