import itertools
import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from gmfilter.assign import AssignmentProblem, linear_assignment, project_to_injection, solve
from gmfilter.graph import Injection, TransportPlan


def _enumerate(R):
    n_c, n = R.shape
    rows = np.arange(n_c)
    best, arg = -np.inf, None
    for m in itertools.permutations(range(n), n_c):  # lexicographic, so first hit is lex-smallest
        v = R[rows, list(m)].sum()
        if v > best:
            best, arg = v, m
    return arg, best


def test_identity_block():
    R = np.zeros((3, 5))
    R[np.arange(3), np.arange(3)] = 1
    inj, val = linear_assignment(R)
    assert inj.map.tolist() == [0, 1, 2]
    assert val == 3


def test_all_equal_takes_identity_order():
    inj, val = linear_assignment(np.full((4, 9), 2.5))
    assert inj.map.tolist() == [0, 1, 2, 3]
    assert val == 10.0


def test_matches_enumeration_continuous():
    rng = np.random.default_rng(0)
    for _ in range(50):
        R = rng.random((4, 7))
        inj, val = linear_assignment(R)
        ref, best = _enumerate(R)
        assert inj.map.tolist() == list(ref)
        assert np.isclose(val, best, rtol=0, atol=1e-12)


def test_lex_smallest_among_ties():
    rng = np.random.default_rng(1)
    for _ in range(200):
        n_c = int(rng.integers(1, 5))
        n = int(rng.integers(n_c, 8))
        R = rng.integers(0, 3, size=(n_c, n)).astype(float)
        inj, val = linear_assignment(R)
        ref, best = _enumerate(R)
        assert inj.map.tolist() == list(ref)
        assert val == best


@settings(max_examples=100, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 4), st.integers(4, 6)), elements=st.floats(-5, 5, allow_nan=False)))
def test_max_equals_min_of_negation(R):
    a, va = solve(AssignmentProblem(R, "maximize"))
    b, vb = solve(AssignmentProblem(-R, "minimize"))
    assert a == b
    assert va == -vb


def test_value_invariant_under_permutation():
    rng = np.random.default_rng(2)
    for _ in range(50):
        R = rng.random((5, 9))
        pr, pc = rng.permutation(5), rng.permutation(9)
        _, v = linear_assignment(R)
        inj, w = linear_assignment(R[pr][:, pc])
        assert np.isclose(v, w, atol=1e-12)
        back = np.empty(5, dtype=np.int64)
        back[pr] = pc[inj.map]
        assert np.isclose(R[np.arange(5), back].sum(), v, atol=1e-12)


def test_square_and_single_row():
    inj, _ = linear_assignment(np.array([[0.0, 1.0, 0.5]]))
    assert inj.map.tolist() == [1]
    R = np.array([[1.0, 2.0], [3.0, 1.0]])
    inj, v = linear_assignment(R)
    assert inj.map.tolist() == [1, 0] and v == 5.0


def test_errors():
    with pytest.raises(ValueError):
        AssignmentProblem(np.zeros((3, 2)))
    with pytest.raises(ValueError):
        AssignmentProblem(np.array([[np.nan, 1.0]]))
    with pytest.raises(ValueError):
        AssignmentProblem(np.zeros((1, 2)), "best")


def test_project_fixed_point():
    inj = Injection([3, 0, 5], 6)
    assert project_to_injection(TransportPlan.from_injection(inj)) == inj


def test_project_uniform_plan():
    plan = TransportPlan(np.full((3, 6), 1 / 6))
    assert project_to_injection(plan).map.tolist() == [0, 1, 2]


def test_project_heavy_component():
    rng = np.random.default_rng(3)
    for _ in range(20):
        p, q = (Injection(rng.permutation(6)[:4], 6) for _ in range(2))
        plan = TransportPlan(0.9 * p.indicator() + 0.1 * q.indicator())
        assert project_to_injection(plan) == p


def _median_time(R, reps=5):
    ts = []
    for _ in range(reps):
        t0 = time.perf_counter()
        linear_assignment(R)
        ts.append(time.perf_counter() - t0)
    return float(np.median(ts))


def test_doubling_n_scales_at_most_eightfold():
    rng = np.random.default_rng(4)
    R500, R1000 = rng.random((40, 500)), rng.random((40, 1000))
    _median_time(R500, 2)  # warm up
    t500, t1000 = _median_time(R500), _median_time(R1000)
    assert t1000 <= 8 * t500, (t500, t1000)
