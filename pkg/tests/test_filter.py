import csv

import numpy as np
import pytest

import gmfilter.filter as filt
from gmfilter.faq import objective
from gmfilter.filter import (
    FilterConfig,
    GapRow,
    MatchResult,
    front_seeds,
    objective_gap_profile,
    pair_frequencies,
    random_start,
    rank_by_objective,
    run_filter,
    write_pairs_csv,
    write_results_csv,
)
from gmfilter.graph import Graph, Injection, correct_matches
from gmfilter.models import homogeneous_params, sample_corr_er
from gmfilter.padding import Scheme, pad


def _result(obj, r, inj=None):
    return MatchResult(inj, obj, r, 1, 0.5)


def _pair(n, n_c, rho, seed, lam=0.5):
    return sample_corr_er(homogeneous_params(n, n_c, lam, rho), np.random.default_rng(seed))


def test_random_start_fully_seeded():
    plan = random_start(5, 12, 5, np.random.default_rng(0))
    assert np.array_equal(plan.rows, Injection.identity(5, 12).indicator())


def test_random_start_alpha_zero_is_barycenter():
    plan = random_start(6, 20, 2, np.random.default_rng(1), alpha=0.0)
    assert np.allclose(plan.rows[2:, 2:], 1 / 18)
    assert np.array_equal(plan.rows[:2, :2], np.eye(2))


def test_random_start_mean_entry():
    rng = np.random.default_rng(2)
    n, n_c, s = 20, 6, 2
    vals = np.array([random_start(n_c, n, s, rng).rows[s:, s:] for _ in range(10_000)])
    mean = vals.mean()
    se = vals.reshape(len(vals), -1).mean(axis=1).std(ddof=1) / np.sqrt(len(vals))
    assert abs(mean - 1 / (n - s)) <= 3 * se + 1e-12


def test_random_start_plan_is_reconstructible():
    plan = random_start(6, 20, 2, np.random.default_rng(3))
    assert np.allclose(plan.reconstruct(), plan.rows, atol=1e-12)


def test_random_start_validation():
    with pytest.raises(ValueError):
        random_start(5, 4, 0, np.random.default_rng(0))
    with pytest.raises(ValueError):
        random_start(5, 8, 6, np.random.default_rng(0))


def test_full_correlation_recovered():
    A, B = _pair(60, 12, 1.0, 4)
    res = run_filter(A, B, FilterConfig(M=20, s=6))
    assert correct_matches(res[0].injection, Injection.identity(12, 60)) == 12
    assert res[0].objective == 0.0


def test_single_fully_seeded_restart():
    A, B = _pair(40, 8, 1.0, 5)
    (res,) = run_filter(A, B, FilterConfig(M=1, s=8))
    At, Bt = pad(A, B, Scheme.centered())
    assert res.injection == Injection.identity(8, 40)
    assert res.objective == objective(At, Bt, Injection.identity(8, 40))


def _same(xs, ys):
    return [(m.restart, m.objective, m.injection, m.iterations, m.alpha0) for m in xs] == [
        (m.restart, m.objective, m.injection, m.iterations, m.alpha0) for m in ys
    ]


def test_repeatable_and_worker_independent():
    A, B = _pair(50, 8, 0.8, 6)
    cfg = FilterConfig(M=8, s=2, rng_seed=7)
    a = run_filter(A, B, cfg)
    b = run_filter(A, B, cfg)
    c = run_filter(A, B, FilterConfig(M=8, s=2, rng_seed=7, workers=2))
    assert _same(a, b)
    assert _same(a, c)


def test_seed_can_be_overturned():
    # network vertices 0 and 2 swapped: seed pair (0, 0) is wrong, truth sends 0 to 2
    A, B = _pair(40, 10, 1.0, 8)
    perm = np.arange(40)
    perm[[0, 2]] = [2, 0]
    B = B.relabel(perm)
    res = run_filter(A, B, FilterConfig(M=50, s=2, rng_seed=1))
    assert sum(m.injection[0] == 2 for m in res) >= 1


def test_second_stage_fills_both_objectives():
    A, B = _pair(50, 8, 0.9, 9)
    res = run_filter(A, B, FilterConfig(M=5, s=2, scheme1=Scheme.low_rank(1), scheme2=Scheme.low_rank(3)))
    for m in res:
        assert m.objective2 is not None and np.isfinite(m.objective2)
    assert [m.objective for m in res] == sorted(m.objective for m in res)


def test_failed_restart_is_recorded(monkeypatch):
    A, B = _pair(30, 6, 0.9, 10)
    real = filt.run_faq
    calls = {"k": 0}

    def flaky(*args, **kw):
        calls["k"] += 1
        if calls["k"] == 2:
            raise RuntimeError("boom")
        return real(*args, **kw)

    monkeypatch.setattr(filt, "run_faq", flaky)
    res = run_filter(A, B, FilterConfig(M=4))
    bad = [m for m in res if m.injection is None]
    assert len(bad) == 1 and "boom" in bad[0].error
    assert res[-1] is bad[0]


def test_rank_examples():
    out = rank_by_objective([_result(3, 0), _result(1, 1), _result(2, 2)])
    assert [m.objective for m in out] == [1, 2, 3]
    out = rank_by_objective([_result(5, r) for r in (0, 1, 2)])
    assert [m.restart for m in out] == [0, 1, 2]
    rng = np.random.default_rng(11)
    objs = rng.integers(0, 10, 100).astype(float)
    out = rank_by_objective([_result(o, r) for r, o in enumerate(objs)])
    assert [m.restart for m in out] == sorted(range(100), key=lambda r: (objs[r], r))
    with pytest.raises(ValueError):
        rank_by_objective([])


def test_pair_frequencies():
    inj = Injection([3, 1], 5)
    f = pair_frequencies([_result(0, 0, inj)])
    assert f.counts.sum(axis=1).tolist() == [1, 1]
    f = pair_frequencies([_result(0, r, inj) for r in range(7)])
    assert f.counts[0, 3] == 7 and f.counts[1, 1] == 7 and f.counts.sum() == 14
    rng = np.random.default_rng(12)
    injs = [Injection(rng.permutation(6)[:3], 6) for _ in range(20)]
    f = pair_frequencies([_result(0, r, i) for r, i in enumerate(injs)])
    ref = np.zeros((3, 6), dtype=int)
    for i in injs:
        for row, col in enumerate(i.map):
            ref[row, col] += 1
    assert np.array_equal(f.counts, ref) and f.total == 20
    with pytest.raises(ValueError):
        pair_frequencies([_result(0, 0, inj), _result(0, 1, Injection([0], 5))])


def test_gap_profile_examples():
    truth = Injection.identity(3, 5)
    perfect = [_result(o, r, truth) for r, o in enumerate([1.0, 2.0, 3.0])]
    assert objective_gap_profile(perfect, truth) == [GapRow(3, 2.0, 3)]
    wrong = Injection([3, 4, 2], 5)
    mixed = perfect + [_result(10.0, 3, wrong), _result(20.0, 4, wrong)]
    assert objective_gap_profile(mixed, truth) == [GapRow(1, 15.0, 2), GapRow(3, 2.0, 3)]


def test_front_seeds_relabels_consistently():
    A = Graph(4, [(0, 3), (1, 2)])
    B = Graph(6, [(5, 1), (4, 2)])
    A2, B2, ao, bo = front_seeds(A, B, [(3, 5), (0, 1)])
    assert ao[:2].tolist() == [3, 0] and bo[:2].tolist() == [5, 1]
    assert A2.toarray()[0, 1] == 1 and B2.toarray()[0, 1] == 1
    with pytest.raises(ValueError):
        front_seeds(A, B, [(0, 1), (0, 2)])
    with pytest.raises(ValueError):
        front_seeds(A, B, [(0, 9)])


def test_csv_writers(tmp_path):
    A, B = _pair(30, 6, 1.0, 13)
    res = run_filter(A, B, FilterConfig(M=3, s=6))
    truth = Injection.identity(6, 30)
    write_results_csv(res, tmp_path / "r.csv", truth, A, B)
    rows = list(csv.DictReader(open(tmp_path / "r.csv")))
    assert rows[0]["correct_matches"] == "6" and rows[0]["edge_errors"] == "0"
    assert rows[0]["sigma"] == "0 1 2 3 4 5"
    write_pairs_csv(pair_frequencies(res), tmp_path / "p.csv")
    lines = open(tmp_path / "p.csv").read().splitlines()
    assert lines[0].split(",")[:3] == ["template", "b0", "b1"]
    assert len(lines) == 7


def test_config_validation():
    with pytest.raises(ValueError):
        FilterConfig(M=0)
    with pytest.raises(ValueError):
        FilterConfig(s=-1)
    assert FilterConfig(scheme1="rank:2").scheme1.rank == 2
    A, B = _pair(20, 4, 1.0, 14)
    with pytest.raises(ValueError):
        run_filter(A, B, FilterConfig(s=5))


def test_default_workers_env(monkeypatch):
    monkeypatch.setenv("GMFILTER_WORKERS", "3")
    assert filt.default_workers() == 3
    monkeypatch.setenv("GMFILTER_WORKERS", "junk")
    assert filt.default_workers() == 1
