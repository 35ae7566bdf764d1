"""Matched filters: soft-seeded random restarts of the Frank-Wolfe solver.

Restart ``r`` draws its start from ``np.random.default_rng([rng_seed, r])``, so
results do not depend on how restarts are scheduled across workers.
"""

from __future__ import annotations

import csv
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .faq import FaqConfig, run_faq
from .graph import Graph, Injection, TransportPlan, barycenter_rows, correct_matches, edge_errors
from .padding import Scheme, pad, parse_scheme

__all__ = [
    "FilterConfig",
    "MatchResult",
    "PairFrequency",
    "GapRow",
    "random_start",
    "run_filter",
    "rank_by_objective",
    "pair_frequencies",
    "objective_gap_profile",
    "front_seeds",
    "write_results_csv",
    "write_pairs_csv",
    "RESULT_COLUMNS",
    "default_workers",
]

RESULT_COLUMNS = [
    "restart",
    "objective1",
    "objective2",
    "iters",
    "alpha0",
    "correct_matches",
    "edge_errors",
    "sigma",
]


def random_start(n_c: int, n: int, s: int, rng: np.random.Generator, alpha: float | None = None) -> TransportPlan:
    """Seed indicators on the first ``s`` rows, a random mix of an injection and the barycenter below.

    Returns the plan; its mixing weight is the weight of the injection term in
    ``plan.combo`` (1 when fully seeded).
    """
    if not 0 <= s <= n_c <= n:
        raise ValueError(f"need 0 <= s <= n_c <= n, got s={s}, n_c={n_c}, n={n}")
    a = float(rng.random()) if alpha is None else float(alpha)
    if s == n_c:
        return TransportPlan.from_injection(Injection.identity(n_c, n))
    tail = s + rng.permutation(n - s)[: n_c - s]
    inj = Injection(np.concatenate([np.arange(s), tail]), n)
    rows = a * inj.indicator() + (1.0 - a) * barycenter_rows(n_c, n, s)
    return TransportPlan(rows, ((a, inj),), (1.0 - a, s))


def _alpha0(plan: TransportPlan) -> float:
    return plan.combo[0][0] if plan.combo else float("nan")


@dataclass(frozen=True)
class FilterConfig:
    M: int = 50
    s: int = 0
    scheme1: Scheme = field(default_factory=Scheme.centered)
    scheme2: Scheme | None = None
    rng_seed: int = 0
    faq: FaqConfig = field(default_factory=FaqConfig)
    workers: int = 1

    def __post_init__(self):
        if self.M < 1:
            raise ValueError("M must be at least 1")
        if self.s < 0:
            raise ValueError("seed count must be non-negative")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        for name in ("scheme1", "scheme2"):
            val = getattr(self, name)
            if isinstance(val, str):
                object.__setattr__(self, name, parse_scheme(val))


@dataclass(frozen=True, eq=False)
class MatchResult:
    """One restart.  ``objective`` always refers to the first-stage scheme.

    When a second stage ran, ``injection`` is its output and ``objective2`` its
    objective.  A failed restart keeps ``injection=None``, an infinite
    objective and the error text.
    """

    injection: Injection | None
    objective: float
    restart: int
    iterations: int
    alpha0: float
    objective2: float | None = None
    error: str | None = None
    seconds: float = 0.0


@dataclass(frozen=True, eq=False)
class PairFrequency:
    counts: np.ndarray
    total: int


@dataclass(frozen=True)
class GapRow:
    correct: int
    mean_objective: float
    count: int


def _one_restart(A1, B1, A2, B2, n_c, s, cfg_faq, rng_seed, r) -> MatchResult:
    t0 = time.perf_counter()
    rng = np.random.default_rng([rng_seed, r])
    D0 = random_start(n_c, A1.n, s, rng)
    a0 = _alpha0(D0)
    try:
        res = run_faq(A1, B1, D0, cfg_faq)
        if A2 is None:
            out = MatchResult(res.injection, res.objective, r, res.trace.iterations, a0)
        else:
            res2 = run_faq(A2, B2, res.plan, cfg_faq)
            iters = res.trace.iterations + res2.trace.iterations
            out = MatchResult(res2.injection, res.objective, r, iters, a0, res2.objective)
    except (ValueError, RuntimeError, FloatingPointError) as exc:
        out = MatchResult(None, float("inf"), r, 0, a0, None, f"{type(exc).__name__}: {exc}")
    return replace(out, seconds=time.perf_counter() - t0)


def _restart_chunk(args) -> list[MatchResult]:
    A1, B1, A2, B2, n_c, s, cfg_faq, rng_seed, restarts = args
    return [_one_restart(A1, B1, A2, B2, n_c, s, cfg_faq, rng_seed, r) for r in restarts]


def run_filter(A: Graph, B: Graph, cfg: FilterConfig) -> list[MatchResult]:
    """Run ``cfg.M`` restarts and return them ranked by first-stage objective.

    Seeds must already occupy the first ``cfg.s`` vertices of both graphs.
    Seed rows only initialise the solver and are free to move.
    """
    n_c = A.n
    if cfg.s > n_c:
        raise ValueError(f"{cfg.s} seeds but the template has {n_c} vertices")
    A1, B1 = pad(A, B, cfg.scheme1)
    A2 = B2 = None
    if cfg.scheme2 is not None:
        A2, B2 = pad(A, B, cfg.scheme2)
    restarts = list(range(cfg.M))
    workers = min(cfg.workers, cfg.M)
    if workers == 1:
        results = _restart_chunk((A1, B1, A2, B2, n_c, cfg.s, cfg.faq, cfg.rng_seed, restarts))
    else:
        chunks = [restarts[k::workers] for k in range(workers)]
        jobs = [(A1, B1, A2, B2, n_c, cfg.s, cfg.faq, cfg.rng_seed, c) for c in chunks]
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = [m for part in ex.map(_restart_chunk, jobs) for m in part]
    return rank_by_objective(results)


def rank_by_objective(results) -> list[MatchResult]:
    """Ascending first-stage objective; ties keep restart order."""
    results = list(results)
    if not results:
        raise ValueError("no results to rank")
    return sorted(results, key=lambda m: (m.objective, m.restart))


def pair_frequencies(results) -> PairFrequency:
    """Count, over successful restarts, how often template vertex ``i`` went to ``j``."""
    injs = [m.injection for m in results if m.injection is not None]
    if not injs:
        raise ValueError("no successful restarts")
    shapes = {(inj.n_c, inj.n) for inj in injs}
    if len(shapes) > 1:
        raise ValueError(f"results have mixed sizes {sorted(shapes)}")
    n_c, n = shapes.pop()
    counts = np.zeros((n_c, n), dtype=np.int64)
    rows = np.arange(n_c)
    for inj in injs:
        counts[rows, inj.map] += 1
    return PairFrequency(counts, len(injs))


def objective_gap_profile(results, truth: Injection) -> list[GapRow]:
    """Mean first-stage objective grouped by number of correct matches."""
    groups: dict[int, list[float]] = {}
    for m in results:
        if m.injection is not None:
            groups.setdefault(correct_matches(m.injection, truth), []).append(m.objective)
    return [GapRow(k, float(np.mean(v)), len(v)) for k, v in sorted(groups.items())]


def front_seeds(A: Graph, B: Graph, seeds) -> tuple[Graph, Graph, np.ndarray, np.ndarray]:
    """Relabel both graphs so seed pairs come first.

    ``seeds`` is a sequence of ``(template vertex, network vertex)`` pairs.
    Returns ``(A', B', a_order, b_order)`` where ``a_order[i]`` is the original
    label of new template vertex ``i`` (likewise for ``b_order``).
    """
    pairs = np.asarray(seeds, dtype=np.int64).reshape(-1, 2)
    sa, sb = pairs[:, 0], pairs[:, 1]
    if len(np.unique(sa)) != len(sa) or len(np.unique(sb)) != len(sb):
        raise ValueError("seed vertices must be distinct")
    if len(sa) and (sa.min() < 0 or sa.max() >= A.n or sb.min() < 0 or sb.max() >= B.n):
        raise ValueError("seed index out of range")
    a_order = np.concatenate([sa, np.setdiff1d(np.arange(A.n), sa)])
    b_order = np.concatenate([sb, np.setdiff1d(np.arange(B.n), sb)])
    return A.relabel(np.argsort(a_order)), B.relabel(np.argsort(b_order)), a_order, b_order


def _fmt(x) -> str:
    if x is None:
        return ""
    return repr(float(x))


def write_results_csv(results, path, truth: Injection | None = None, A: Graph | None = None, B: Graph | None = None):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RESULT_COLUMNS)
        for m in results:
            ok = m.injection is not None
            cm = correct_matches(m.injection, truth) if ok and truth is not None else None
            ee = edge_errors(A, B, m.injection) if ok and A is not None and B is not None else None
            w.writerow(
                [
                    m.restart,
                    _fmt(m.objective),
                    _fmt(m.objective2),
                    m.iterations,
                    _fmt(m.alpha0),
                    "" if cm is None else cm,
                    "" if ee is None else ee,
                    " ".join(map(str, m.injection.map.tolist())) if ok else "",
                ]
            )


def write_pairs_csv(freq: PairFrequency, path):
    n = freq.counts.shape[1]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["template"] + [f"b{j}" for j in range(n)])
        for i, row in enumerate(freq.counts.tolist()):
            w.writerow([i] + row)


def default_workers() -> int:
    """Worker count from ``GMFILTER_WORKERS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("GMFILTER_WORKERS", "1")))
    except ValueError:
        return 1
