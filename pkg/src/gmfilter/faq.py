"""Frank-Wolfe over the first ``n_c`` rows of the doubly stochastic matrices.

Every padded template is zero outside its ``n_c x n_c`` core, so the relaxed
objective

    f(D) = -<X, D Bt D^T>,      X = core of At,  D an n_c x n plan,

depends only on the first ``n_c`` rows of the full relaxed permutation.  Each
iteration solves a rectangular assignment problem on the gradient, picks the
exact minimiser of the quadratic ``f`` along the segment, and moves there.
The product ``D Bt`` is updated in place: a step towards an injection ``sigma``
only needs the rows ``Bt[sigma]``.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .assign import AssignmentProblem, project_to_injection, solve
from .graph import Injection, TransportPlan
from .padding import PaddedMatrix

__all__ = [
    "FaqConfig",
    "FaqTrace",
    "FaqResult",
    "objective",
    "gmp_objective",
    "relaxed_objective",
    "gradient_rows",
    "line_search",
    "run_faq",
]

# slack allowed for round-off when asserting monotone descent
_DESCENT_SLACK = 1e-9


@dataclass(frozen=True)
class FaqConfig:
    max_iters: int = 100
    tol: float = 1e-6
    stop_on_repeat: bool = True

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")


@dataclass
class FaqTrace:
    """Diagnostics for one solver run.

    ``objectives[k]`` is the relaxed objective at iterate ``k`` (so it has one
    more entry than ``alphas``).  ``reason`` is one of ``repeat``,
    ``stationary``, ``tol`` or ``max_iters``.
    """

    objectives: list = field(default_factory=list)
    alphas: list = field(default_factory=list)
    iterations: int = 0
    reason: str = ""

    def to_json(self) -> str:
        return json.dumps(asdict(self))


@dataclass(frozen=True, eq=False)
class FaqResult:
    injection: Injection
    objective: float
    trace: FaqTrace
    plan: TransportPlan

    def __iter__(self):
        return iter((self.injection, self.objective, self.trace))


def _check(Atil: PaddedMatrix, Btil: PaddedMatrix, n_c: int, n: int):
    if Atil.n != n or Btil.n != n:
        raise ValueError(f"padded matrices have orders {Atil.n}, {Btil.n}; expected {n}")
    if n_c > n:
        raise ValueError("template larger than network")


def _sq_sum(diff: np.ndarray) -> np.ndarray:
    # shared with the brute-force oracle so both reduce in the same order
    return (diff * diff).reshape(diff.shape[:-2] + (-1,)).sum(axis=-1)


def _neg_inner(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    return -(X * Y).reshape(Y.shape[:-2] + (-1,)).sum(axis=-1)


def objective(Atil: PaddedMatrix, Btil: PaddedMatrix, sigma: Injection) -> float:
    """Squared Frobenius disagreement on the ``n_c x n_c`` block selected by ``sigma``."""
    _check(Atil, Btil, sigma.n_c, sigma.n)
    core = np.arange(sigma.n_c)
    diff = Atil.take(core, core) - Btil.take(sigma.map, sigma.map)
    return float(_sq_sum(diff[None])[0])


def gmp_objective(Atil: PaddedMatrix, Btil: PaddedMatrix, sigma: Injection) -> float:
    """``-trace(At P Bt P^T)``; ranks injections like the full-matrix Frobenius distance."""
    _check(Atil, Btil, sigma.n_c, sigma.n)
    core = np.arange(sigma.n_c)
    return float(_neg_inner(Atil.take(core, core), Btil.take(sigma.map, sigma.map)[None])[0])


def relaxed_objective(Atil: PaddedMatrix, Btil: PaddedMatrix, plan: TransportPlan) -> float:
    _check(Atil, Btil, plan.n_c, plan.n)
    core = np.arange(plan.n_c)
    X = Atil.take(core, core)
    D = plan.rows
    return float(-np.vdot(X, Btil.rdot(D) @ D.T))


def _grad(X, DB, DBt, symmetric: bool) -> np.ndarray:
    if symmetric:
        return X @ DB
    return X @ DBt + X.T @ DB


def gradient_rows(Atil: PaddedMatrix, Btil: PaddedMatrix, plan: TransportPlan) -> np.ndarray:
    """Linear coefficient of the next step in ``trace(At^T D Bt D^T)``.

    For symmetric inputs this is ``X D Bt`` (half the derivative); for
    directed inputs the full derivative ``X D Bt^T + X^T D Bt``.  Maximising
    ``<G, Q>`` over injections is the Frank-Wolfe direction either way.
    """
    _check(Atil, Btil, plan.n_c, plan.n)
    core = np.arange(plan.n_c)
    X = Atil.take(core, core)
    D = np.asarray(plan.rows)
    symmetric = Atil.symmetric and Btil.symmetric
    DB = Btil.rdot(D)
    DBt = None if symmetric else Btil.T.rdot(D)
    return _grad(X, DB, DBt, symmetric)


def _quadratic(X, D, DB, QB, smap):
    """Coefficients of ``f(D + a (Q - D)) = A a^2 + B a + C``."""
    T_dd = DB @ D.T
    T_qd = QB @ D.T
    T_dq = DB[:, smap]
    T_qq = QB[:, smap]
    a = -np.vdot(X, T_qq - T_qd - T_dq + T_dd)
    b = -np.vdot(X, T_qd + T_dq - 2.0 * T_dd)
    c = -np.vdot(X, T_dd)
    return float(a), float(b), float(c)


def _best_alpha(a: float, b: float) -> float:
    if a > 0:
        return min(max(-b / (2.0 * a), 0.0), 1.0)
    return 1.0 if a + b < 0 else 0.0


def line_search(Atil: PaddedMatrix, Btil: PaddedMatrix, plan: TransportPlan, step: Injection) -> float:
    """Exact minimiser over ``[0, 1]`` of ``f`` on the segment from ``plan`` to ``step``.

    Returns 0 when the quadratic is flat.
    """
    _check(Atil, Btil, plan.n_c, plan.n)
    core = np.arange(plan.n_c)
    X = Atil.take(core, core)
    D = np.asarray(plan.rows)
    a, b, _ = _quadratic(X, D, Btil.rdot(D), Btil.take_rows(step.map), step.map)
    return _best_alpha(a, b)


def run_faq(
    Atil: PaddedMatrix,
    Btil: PaddedMatrix,
    D0: TransportPlan,
    cfg: FaqConfig | None = None,
) -> FaqResult:
    """Frank-Wolfe from ``D0``, then projection onto the injections.

    The returned plan is the last iterate before projection; its ``combo``
    record is kept whenever ``D0`` carried one.
    """
    cfg = cfg or FaqConfig()
    n_c, n = D0.n_c, D0.n
    _check(Atil, Btil, n_c, n)
    core = np.arange(n_c)
    ar = np.arange(n_c)
    X = Atil.take(core, core)
    symmetric = Atil.symmetric and Btil.symmetric
    BT = None if symmetric else Btil.T

    D = np.array(D0.rows)
    DB = Btil.rdot(D)
    DBt = None if symmetric else BT.rdot(D)
    record = bool(D0.combo) or D0.barycenter is not None
    weights: dict[Injection, float] = {}
    for w, inj in D0.combo:
        weights[inj] = weights.get(inj, 0.0) + w
    bary = list(D0.barycenter) if D0.barycenter is not None else None

    trace = FaqTrace(objectives=[float(-np.vdot(X, DB @ D.T))])
    prev = None
    reason = "max_iters"
    for _ in range(cfg.max_iters):
        G = _grad(X, DB, DBt, symmetric)
        sigma, _ = solve(AssignmentProblem(G, "maximize"))
        if cfg.stop_on_repeat and prev is not None and sigma == prev:
            reason = "repeat"
            break
        prev = sigma
        QB = Btil.take_rows(sigma.map)
        a, b, _ = _quadratic(X, D, DB, QB, sigma.map)
        alpha = _best_alpha(a, b)
        if alpha == 0.0:
            reason = "stationary"
            break
        keep = 1.0 - alpha
        D *= keep
        D[ar, sigma.map] += alpha
        DB = keep * DB + alpha * QB
        if DBt is not None:
            DBt = keep * DBt + alpha * BT.take_rows(sigma.map)
        for inj in weights:
            weights[inj] *= keep
        weights[sigma] = weights.get(sigma, 0.0) + alpha
        if bary is not None:
            bary[0] *= keep

        f_old = trace.objectives[-1]
        f_new = float(-np.vdot(X, DB @ D.T))
        if f_new > f_old + _DESCENT_SLACK * max(1.0, abs(f_old)):
            raise RuntimeError(f"relaxed objective increased from {f_old!r} to {f_new!r}")
        trace.objectives.append(f_new)
        trace.alphas.append(alpha)
        trace.iterations += 1
        if f_old - f_new <= cfg.tol * abs(f_old):
            reason = "tol"
            break
    trace.reason = reason

    np.clip(D, 0.0, None, out=D)
    if record:
        combo = tuple((w, inj) for inj, w in weights.items() if w > 0)
        plan = TransportPlan(D, combo, tuple(bary) if bary is not None else None)
    else:
        plan = TransportPlan(D)
    inj = plan.as_injection()
    if inj is None:
        inj = project_to_injection(plan)
    return FaqResult(inj, objective(Atil, Btil, inj), trace, plan)
