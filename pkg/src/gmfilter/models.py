"""Random graph pairs with a planted noisy copy of the template.

The template ``A`` is correlated with the core (the first ``n_c`` vertices) of
the network ``B``.  Each core pair is drawn from three independent Bernoulli
variables ``Z0, Z1, Z2`` with

    B = Z0,    A = (1 - Z0) Z1 + Z0 Z2,

which gives both entries the marginal ``Lam`` and correlation ``R``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Graph, Injection

__all__ = [
    "CorrErParams",
    "RdpgParams",
    "sample_corr_er",
    "homogeneous_params",
    "planted_partition_params",
    "adversarial_naive_lambda",
    "sample_rdpg_pair",
    "triangle_positions",
    "shuffle_nonseeds",
]


def _prob_matrix(M, name: str) -> np.ndarray:
    M = np.array(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"{name} must be a square matrix")
    if not np.all(np.isfinite(M)) or M.min(initial=0.0) < 0 or M.max(initial=0.0) > 1:
        raise ValueError(f"{name} entries must lie in [0, 1]")
    M.setflags(write=False)
    return M


@dataclass(frozen=True, eq=False)
class CorrErParams:
    """Edge probabilities ``Lam`` (n x n) and core correlations ``R`` (n_c x n_c).

    Diagonals are never sampled.  Undirected sampling reads the upper
    triangles, so both matrices must be symmetric.
    """

    Lam: np.ndarray
    R: np.ndarray
    directed: bool = False

    def __post_init__(self):
        Lam = _prob_matrix(self.Lam, "Lam")
        R = _prob_matrix(self.R, "R")
        if R.shape[0] > Lam.shape[0]:
            raise ValueError("core larger than the network")
        if not self.directed and not (np.allclose(Lam, Lam.T) and np.allclose(R, R.T)):
            raise ValueError("undirected sampling needs symmetric Lam and R")
        object.__setattr__(self, "Lam", Lam)
        object.__setattr__(self, "R", R)

    @property
    def n(self) -> int:
        return self.Lam.shape[0]

    @property
    def n_c(self) -> int:
        return self.R.shape[0]


def _pairs(n: int, directed: bool):
    if directed:
        u, v = np.nonzero(~np.eye(n, dtype=bool))
        return u, v
    return np.triu_indices(n, 1)


def sample_corr_er(params: CorrErParams, rng: np.random.Generator) -> tuple[Graph, Graph]:
    """Draw ``(A, B)``; the true alignment is the identity on the core."""
    n, n_c = params.n, params.n_c
    u, v = _pairs(n, params.directed)
    lam = params.Lam[u, v]
    in_core = (u < n_c) & (v < n_c)
    z0 = rng.random(len(u)) < lam
    lc = lam[in_core]
    rc = params.R[u[in_core], v[in_core]]
    z1 = rng.random(len(lc)) < lc * (1.0 - rc)
    z2 = rng.random(len(lc)) < lc + rc * (1.0 - lc)
    b_core = z0[in_core]
    a = np.where(b_core, z2, z1)
    B = Graph(n, np.column_stack([u[z0], v[z0]]), params.directed)
    A = Graph(n_c, np.column_stack([u[in_core][a], v[in_core][a]]), params.directed)
    return A, B


def _hollow(M: np.ndarray) -> np.ndarray:
    np.fill_diagonal(M, 0.0)
    return M


def homogeneous_params(n: int, n_c: int, lam: float, rho: float) -> CorrErParams:
    return CorrErParams(_hollow(np.full((n, n), float(lam))), _hollow(np.full((n_c, n_c), float(rho))))


def planted_partition_params(n: int, n_c: int, p: float, q: float, rho: float) -> CorrErParams:
    """Core block density ``q``, everything else ``p``."""
    Lam = np.full((n, n), float(p))
    Lam[:n_c, :n_c] = q
    return CorrErParams(_hollow(Lam), _hollow(np.full((n_c, n_c), float(rho))))


def adversarial_naive_lambda(n: int, n_c: int, beta: float, rho: float, eps: float) -> CorrErParams:
    """Background ``beta`` plus a decoy block on vertices ``n_c..2 n_c - 1``.

    The decoy density ``beta + (1 - beta) rho + eps`` exceeds the conditional
    edge probability of the true copy, which is what lures naive padding away.
    """
    if 2 * n_c > n:
        raise ValueError("need n >= 2 n_c to fit the decoy block")
    if not (0 <= beta <= 1 and 0 <= rho <= 1 and eps >= 0):
        raise ValueError("need beta, rho in [0, 1] and eps >= 0")
    decoy = beta + (1.0 - beta) * rho + eps
    if decoy >= 1.0:
        raise ValueError(f"decoy density {decoy} must stay below 1")
    Lam = np.full((n, n), float(beta))
    Lam[n_c : 2 * n_c, n_c : 2 * n_c] = decoy
    return CorrErParams(_hollow(Lam), _hollow(np.full((n_c, n_c), float(rho))))


@dataclass(frozen=True)
class RdpgParams:
    n: int
    n_c: int
    rho: float
    core: str = "random"

    def __post_init__(self):
        if not 0 <= self.rho <= 1:
            raise ValueError("rho must lie in [0, 1]")
        if not 0 < self.n_c <= self.n:
            raise ValueError("need 0 < n_c <= n")
        if self.core not in ("random", "max-angle"):
            raise ValueError(f"unknown core selection {self.core!r}")


def triangle_positions(n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` points uniform on ``{(x, y) : x, y > 0, x + y < 1}``."""
    P = rng.random((n, 2))
    flip = P.sum(axis=1) > 1
    P[flip] = 1.0 - P[flip]
    return P


def sample_rdpg_pair(params: RdpgParams, rng: np.random.Generator, positions=None):
    """Draw ``(A, B, truth, X)`` with ``Lam = X X^T`` in two dimensions.

    The core is relabelled to the front of ``B``, so ``truth`` is the identity
    and ``X`` is returned in the relabelled order.
    """
    n, n_c = params.n, params.n_c
    X = triangle_positions(n, rng) if positions is None else np.array(positions, dtype=float)
    if params.core == "random":
        core = rng.choice(n, n_c, replace=False)
    else:
        core = np.argsort(-(X[:, 1] / X[:, 0]), kind="stable")[:n_c]
    order = np.concatenate([core, np.setdiff1d(np.arange(n), core)])
    X = X[order]
    Lam = np.clip(_hollow(X @ X.T), 0.0, 1.0)
    R = _hollow(np.full((n_c, n_c), float(params.rho)))
    A, B = sample_corr_er(CorrErParams(Lam, R), rng)
    return A, B, Injection.identity(n_c, n), X


def shuffle_nonseeds(B: Graph, truth: Injection, s: int, rng: np.random.Generator):
    """Randomly relabel vertices ``s..n-1`` of ``B``; returns the new graph and truth.

    Samplers place the true copy on the first ``n_c`` vertices, which would let
    index-order tie-breaking leak the answer.
    """
    n = B.n
    perm = np.arange(n)
    perm[s:] = s + rng.permutation(n - s)
    return B.relabel(perm), Injection(perm[truth.map], n)
