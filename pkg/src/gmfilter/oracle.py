"""Exhaustive search over all injections, for instances small enough to enumerate."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .faq import _neg_inner, _sq_sum
from .graph import Injection
from .models import CorrErParams, sample_corr_er
from .padding import PaddedMatrix, Scheme, pad, parse_scheme

__all__ = [
    "EnumerationBudget",
    "BudgetExceeded",
    "brute_force_gmp",
    "recovery_outcomes",
    "verify_recovery_rate",
    "CRITERIA",
]

CRITERIA = ("frobenius", "gmp")
_CHUNK = 1 << 16


class BudgetExceeded(ValueError):
    pass


@dataclass(frozen=True)
class EnumerationBudget:
    max_injections: int = 2_000_000

    def __post_init__(self):
        if self.max_injections < 1:
            raise ValueError("budget must be positive")


def _prefix_block(n: int, n_c: int, first: int) -> np.ndarray:
    rest = [j for j in range(n) if j != first]
    k = math.perm(n - 1, n_c - 1)
    tails = np.fromiter(
        itertools.chain.from_iterable(itertools.permutations(rest, n_c - 1)),
        dtype=np.int64,
        count=k * (n_c - 1),
    ).reshape(k, n_c - 1)
    return np.column_stack([np.full(k, first, dtype=np.int64), tails])


def _evaluate(Ac: np.ndarray, Bd: np.ndarray, maps: np.ndarray, criterion: str) -> np.ndarray:
    out = np.empty(len(maps))
    for lo in range(0, len(maps), _CHUNK):
        m = maps[lo : lo + _CHUNK]
        Bs = Bd[m[:, :, None], m[:, None, :]]
        out[lo : lo + _CHUNK] = _sq_sum(Ac - Bs) if criterion == "frobenius" else _neg_inner(Ac, Bs)
    return out


def brute_force_gmp(
    Atil: PaddedMatrix,
    Btil: PaddedMatrix,
    budget: EnumerationBudget | None = None,
    criterion: str = "frobenius",
    n_c: int | None = None,
) -> tuple[list[Injection], float]:
    """All minimisers and the minimum over every injection ``[n_c] -> [n]``.

    ``criterion="frobenius"`` scores with :func:`gmfilter.faq.objective` (the
    core block only); ``"gmp"`` scores with ``-trace(At P Bt P^T)``, which ranks
    permutations exactly like the full ``n x n`` Frobenius distance.  Minimisers
    are exact ties and come back in lexicographic order.  ``n_c`` defaults to
    the template order recorded on ``At`` by the padding functions.
    """
    budget = budget or EnumerationBudget()
    if criterion not in CRITERIA:
        raise ValueError(f"criterion must be one of {CRITERIA}")
    n = Atil.n
    if Btil.n != n:
        raise ValueError("padded matrices differ in order")
    if n_c is None:
        n_c = Atil.template_order
        if n_c is None:
            raise ValueError("template order unknown; pass n_c")
    total = math.perm(n, n_c)
    if total > budget.max_injections:
        raise BudgetExceeded(f"{total} injections exceed the budget of {budget.max_injections}")
    core = np.arange(n_c)
    Ac = Atil.take(core, core)
    Bd = Btil.toarray()
    if n_c == 0:
        return [Injection(np.zeros(0, dtype=np.int64), n)], 0.0
    best = np.inf
    winners: list[np.ndarray] = []
    for first in range(n):
        maps = _prefix_block(n, n_c, first)
        vals = _evaluate(Ac, Bd, maps, criterion)
        lo = vals.min()
        if lo < best:
            best = lo
            winners = [maps[vals == lo]]
        elif lo == best:
            winners.append(maps[vals == lo])
    mins = np.concatenate(winners)
    return [Injection(m, n) for m in mins], float(best)


def recovery_outcomes(
    params: CorrErParams,
    scheme: Scheme | str,
    replicates: int,
    seed: int = 0,
    criterion: str = "gmp",
    budget: EnumerationBudget | None = None,
) -> np.ndarray:
    """Per replicate: ``(truth is a minimiser, truth is the unique minimiser)``.

    Replicate ``k`` samples from ``default_rng([seed, k])`` whatever the
    scheme, so calls with different schemes see the same graph pairs.
    """
    if replicates < 1:
        raise ValueError("replicates must be at least 1")
    scheme = parse_scheme(scheme) if isinstance(scheme, str) else scheme
    n_c, n = params.n_c, params.n
    truth = Injection.identity(n_c, n)
    out = np.zeros((replicates, 2), dtype=bool)
    for k in range(replicates):
        A, B = sample_corr_er(params, np.random.default_rng([seed, k]))
        At, Bt = pad(A, B, scheme)
        mins, _ = brute_force_gmp(At, Bt, budget, criterion)
        hit = any(m == truth for m in mins)
        out[k] = (hit, hit and len(mins) == 1)
    return out


def verify_recovery_rate(
    params: CorrErParams,
    scheme: Scheme | str,
    replicates: int,
    seed: int = 0,
    criterion: str = "gmp",
    unique: bool = False,
) -> float:
    """Fraction of sampled pairs whose true alignment attains the optimum.

    With ``unique=True`` a replicate only counts when the truth is the sole
    minimiser.
    """
    out = recovery_outcomes(params, scheme, replicates, seed, criterion)
    return float(out[:, 1 if unique else 0].mean())
