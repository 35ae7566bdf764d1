import numpy as np
import pytest

from gmfilter.faq import (
    FaqConfig,
    _best_alpha,
    gmp_objective,
    gradient_rows,
    line_search,
    objective,
    relaxed_objective,
    run_faq,
)
from gmfilter.filter import random_start
from gmfilter.graph import Graph, Injection, TransportPlan, barycenter_rows
from gmfilter.models import homogeneous_params, sample_corr_er
from gmfilter.oracle import brute_force_gmp
from gmfilter.padding import Scheme, pad

SCHEMES = [Scheme.naive(), Scheme.centered(), Scheme.low_rank(1), Scheme.low_rank(2)]


def _random_graph(n, p, rng, directed=False):
    a = rng.random((n, n)) < p
    np.fill_diagonal(a, False)
    if not directed:
        a = np.triu(a, 1)
        a = a | a.T
    return Graph.from_adjacency(a.astype(int), directed=directed)


def _random_plan(n_c, n, rng, k=3):
    w = rng.dirichlet(np.ones(k))
    rows = sum(wi * Injection(rng.permutation(n)[:n_c], n).indicator() for wi in w)
    return TransportPlan(rows)


def _trace_value(Atil, Btil, D):
    """``trace(At^T D Bt D^T)`` restricted to the core rows, dense."""
    X = Atil.toarray()[: D.shape[0], : D.shape[0]]
    return float(np.vdot(X, D @ Btil.toarray() @ D.T))


def test_objective_identity_is_zero():
    rng = np.random.default_rng(0)
    A = _random_graph(5, 0.5, rng)
    At, Bt = pad(A, A, Scheme.centered())
    assert objective(At, Bt, Injection.identity(5, 5)) == 0.0


def test_objective_opposite_block():
    # B's core is the complement of A: centered entries flip sign off the diagonal
    A = Graph(2, [(0, 1)])
    B = Graph(3, [(1, 2)])
    At, Bt = pad(A, B, Scheme.centered())
    assert objective(At, Bt, Injection([0, 1], 3)) == 4.0 * 2


def test_objective_matches_dense_formula():
    rng = np.random.default_rng(1)
    A, B = _random_graph(5, 0.5, rng), _random_graph(8, 0.5, rng)
    for scheme in SCHEMES:
        At, Bt = pad(A, B, scheme)
        sigma = Injection(rng.permutation(8)[:5], 8)
        a, b = At.toarray(), Bt.toarray()
        diff = a[:5, :5] - b[np.ix_(sigma.map, sigma.map)]
        assert np.isclose(objective(At, Bt, sigma), np.sum(diff**2), rtol=1e-12)
        assert np.isclose(gmp_objective(At, Bt, sigma), -np.sum(a[:5, :5] * b[np.ix_(sigma.map, sigma.map)]), rtol=1e-12)


def test_gradient_zero_template():
    rng = np.random.default_rng(2)
    At, Bt = pad(Graph(3, []), _random_graph(6, 0.5, rng), Scheme.naive())
    assert np.all(gradient_rows(At, Bt, _random_plan(3, 6, rng)) == 0)


def test_gradient_at_identity_matches_dense_derivative():
    A = Graph(3, [(0, 1), (1, 2)])
    B = Graph(4, [(0, 1), (0, 2), (2, 3)])
    At, Bt = pad(A, B, Scheme.centered())
    D = Injection.identity(3, 4).indicator()
    X = At.toarray()[:3, :3]
    expected = X @ D @ Bt.toarray()
    assert np.allclose(gradient_rows(At, Bt, TransportPlan(D)), expected)


@pytest.mark.parametrize("directed", [False, True])
def test_gradient_finite_differences(directed):
    rng = np.random.default_rng(3)
    for _ in range(20):
        A, B = _random_graph(4, 0.5, rng, directed), _random_graph(9, 0.5, rng, directed)
        At, Bt = pad(A, B, SCHEMES[int(rng.integers(len(SCHEMES)))])
        plan = _random_plan(4, 9, rng)
        G = gradient_rows(At, Bt, plan)
        full = G if directed else 2.0 * G
        for _ in range(10):
            E = rng.normal(size=plan.rows.shape)
            h = 1e-4
            fd = (_trace_value(At, Bt, plan.rows + h * E) - _trace_value(At, Bt, plan.rows - h * E)) / (2 * h)
            exact = np.vdot(full, E)
            assert abs(fd - exact) <= 1e-5 * max(1.0, abs(exact))


def test_relaxed_objective_is_negated_trace():
    rng = np.random.default_rng(4)
    A, B = _random_graph(4, 0.5, rng), _random_graph(7, 0.5, rng)
    At, Bt = pad(A, B, Scheme.centered())
    plan = _random_plan(4, 7, rng)
    assert np.isclose(relaxed_objective(At, Bt, plan), -_trace_value(At, Bt, plan.rows))


def test_line_search_degenerate_returns_zero():
    rng = np.random.default_rng(5)
    A, B = _random_graph(4, 0.5, rng), _random_graph(7, 0.5, rng)
    At, Bt = pad(A, B, Scheme.centered())
    inj = Injection([2, 0, 6, 3], 7)
    assert line_search(At, Bt, TransportPlan.from_injection(inj), inj) == 0.0


def test_best_alpha_vertex():
    assert abs(_best_alpha(2.0, -2.0) - 0.5) < 1e-12
    assert _best_alpha(1.0, 5.0) == 0.0
    assert _best_alpha(1.0, -5.0) == 1.0
    assert _best_alpha(-1.0, 0.5) == 1.0
    assert _best_alpha(-1.0, 2.0) == 0.0
    assert _best_alpha(0.0, 0.0) == 0.0


def test_line_search_beats_grid():
    rng = np.random.default_rng(6)
    grid = np.linspace(0.0, 1.0, 10_000)
    for _ in range(20):
        A, B = _random_graph(4, 0.5, rng), _random_graph(8, 0.5, rng)
        At, Bt = pad(A, B, SCHEMES[int(rng.integers(len(SCHEMES)))])
        plan = _random_plan(4, 8, rng)
        step = Injection(rng.permutation(8)[:4], 8)
        Q = step.indicator()
        X, Bd = At.toarray()[:4, :4], Bt.toarray()
        Dt = plan.rows + grid[:, None, None] * (Q - plan.rows)
        on_grid = -np.einsum("ij,tik,kl,tjl->t", X, Dt, Bd, Dt)
        alpha = line_search(At, Bt, plan, step)
        assert 0.0 <= alpha <= 1.0
        assert -_trace_value(At, Bt, plan.rows + alpha * (Q - plan.rows)) <= on_grid.min() + 1e-10


def test_faq_from_global_optimum_stays_put():
    rng = np.random.default_rng(7)
    A, B = _random_graph(4, 0.5, rng), _random_graph(6, 0.5, rng)
    At, Bt = pad(A, B, Scheme.centered())
    mins, best = brute_force_gmp(At, Bt)
    res = run_faq(At, Bt, TransportPlan.from_injection(mins[0]))
    assert res.injection == mins[0]
    assert res.objective == best
    assert res.trace.objectives[-1] == res.trace.objectives[0]


def test_faq_fully_seeded_isomorphic_copy():
    params = homogeneous_params(30, 8, 0.5, 1.0)
    A, B = sample_corr_er(params, np.random.default_rng(8))
    At, Bt = pad(A, B, Scheme.centered())
    inj, obj, _ = run_faq(At, Bt, TransportPlan.from_injection(Injection.identity(8, 30)))
    assert inj == Injection.identity(8, 30)
    assert obj == 0.0


def test_relaxed_objective_non_increasing():
    rng = np.random.default_rng(9)
    for k in range(100):
        directed = k % 4 == 3
        n_c = int(rng.integers(3, 9))
        n = int(rng.integers(n_c, 25))
        A, B = _random_graph(n_c, 0.4, rng, directed), _random_graph(n, 0.4, rng, directed)
        At, Bt = pad(A, B, SCHEMES[k % len(SCHEMES)])
        res = run_faq(At, Bt, random_start(n_c, n, 0, rng))
        f = np.array(res.trace.objectives)
        assert np.all(np.diff(f) <= 1e-9 * np.maximum(1.0, np.abs(f[:-1])))
        assert len(res.trace.alphas) == res.trace.iterations == len(f) - 1
        assert res.trace.reason in ("repeat", "stationary", "tol", "max_iters")


def test_plan_combo_reconstructs_rows():
    rng = np.random.default_rng(10)
    A, B = _random_graph(6, 0.5, rng), _random_graph(20, 0.5, rng)
    At, Bt = pad(A, B, Scheme.centered())
    for s in (0, 2):
        res = run_faq(At, Bt, random_start(6, 20, s, rng), FaqConfig(max_iters=30, tol=1e-12))
        assert np.allclose(res.plan.reconstruct(), res.plan.rows, atol=1e-8)


def test_faq_square_isomorphic_pairs_reach_zero():
    rng = np.random.default_rng(11)
    for _ in range(5):
        n = 7
        A = _random_graph(n, 0.5, rng)
        B = A.relabel(rng.permutation(n))
        At, Bt = pad(A, B, Scheme.centered())
        assert brute_force_gmp(At, Bt)[1] == 0.0
        objs = [run_faq(At, Bt, TransportPlan(barycenter_rows(n, n))).objective]
        objs += [run_faq(At, Bt, random_start(n, n, 0, np.random.default_rng([11, r]))).objective for r in range(50)]
        assert min(objs) == 0.0


def test_faq_config_validation():
    with pytest.raises(ValueError):
        FaqConfig(max_iters=0)
    with pytest.raises(ValueError):
        FaqConfig(tol=0.0)


def test_faq_rejects_mismatched_orders():
    At, Bt = pad(Graph(2, []), Graph(5, []), Scheme.naive())
    with pytest.raises(ValueError):
        run_faq(At, Bt, TransportPlan.from_injection(Injection.identity(2, 4)))
