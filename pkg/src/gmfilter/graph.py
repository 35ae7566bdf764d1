"""Graphs, injections and transport plans.

Vertices are 0-indexed everywhere inside the library.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.sparse as sp

__all__ = [
    "Graph",
    "Injection",
    "TransportPlan",
    "SeedSet",
    "barycenter_rows",
    "compose_injection",
    "correct_matches",
    "edge_errors",
    "read_edgelist",
    "write_edgelist",
]

PLAN_TOL = 1e-9


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Graph:
    """Simple graph on ``n`` vertices with 0/1 adjacency and no self-loops.

    Undirected edges are stored canonically with ``u < v``.
    """

    n: int
    edges: np.ndarray
    directed: bool = False

    def __post_init__(self):
        n = int(self.n)
        if n < 0:
            raise ValueError("vertex count must be non-negative")
        e = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if e.size and (e.min() < 0 or e.max() >= n):
            raise ValueError(f"edge endpoint out of range for n={n}")
        if np.any(e[:, 0] == e[:, 1]):
            raise ValueError("self-loops are not allowed")
        if not self.directed:
            e = np.sort(e, axis=1)
        if e.size:
            e = np.unique(e, axis=0)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "edges", _readonly(e))

    @classmethod
    def from_adjacency(cls, adj, directed: bool | None = None) -> "Graph":
        """Build from a dense or sparse 0/1 matrix; directedness inferred from symmetry."""
        m = sp.coo_matrix(adj)
        if m.shape[0] != m.shape[1]:
            raise ValueError("adjacency must be square")
        dense_vals = m.data
        if np.any((dense_vals != 0) & (dense_vals != 1)):
            raise ValueError("adjacency entries must be 0 or 1")
        m.eliminate_zeros()
        if directed is None:
            directed = (abs(m - m.T) > 0).nnz > 0
        if not directed and (abs(m - m.T) > 0).nnz:
            raise ValueError("undirected graph requires a symmetric adjacency")
        e = np.column_stack([m.row, m.col])
        if not directed:
            e = e[e[:, 0] < e[:, 1]]
        return cls(m.shape[0], e, bool(directed))

    @cached_property
    def adjacency(self) -> sp.csr_matrix:
        n = self.n
        e = self.edges
        rows, cols = e[:, 0], e[:, 1]
        if not self.directed:
            rows, cols = np.concatenate([rows, cols]), np.concatenate([cols, rows])
        a = sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
        a.sort_indices()
        return a

    def toarray(self) -> np.ndarray:
        return self.adjacency.toarray()

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def subgraph(self, vertices: Sequence[int]) -> "Graph":
        """Induced subgraph; vertex ``vertices[i]`` becomes vertex ``i``."""
        idx = np.asarray(vertices, dtype=np.int64)
        sub = self.adjacency[idx][:, idx]
        return Graph.from_adjacency(sub, directed=self.directed)

    def relabel(self, perm: Sequence[int]) -> "Graph":
        """Return the graph with vertex ``v`` renamed to ``perm[v]``."""
        p = np.asarray(perm, dtype=np.int64)
        if sorted(p.tolist()) != list(range(self.n)):
            raise ValueError("relabeling must be a permutation of the vertices")
        return Graph(self.n, p[self.edges], self.directed)

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.n == other.n
            and self.directed == other.directed
            and np.array_equal(self.edges, other.edges)
        )

    __hash__ = None

    def __repr__(self):
        kind = "directed" if self.directed else "undirected"
        return f"Graph(n={self.n}, m={self.num_edges}, {kind})"


@dataclass(frozen=True, eq=False)
class Injection:
    """One-to-one map from ``[n_c]`` into ``[n]``; ``map[i]`` is the image of ``i``."""

    map: np.ndarray
    n: int

    def __post_init__(self):
        m = np.array(self.map, dtype=np.int64).reshape(-1)
        n = int(self.n)
        if len(m) > n:
            raise ValueError(f"cannot inject {len(m)} vertices into {n}")
        if m.size and (m.min() < 0 or m.max() >= n):
            raise ValueError("injection target out of range")
        if len(np.unique(m)) != len(m):
            raise ValueError("map is not injective")
        object.__setattr__(self, "map", _readonly(m))
        object.__setattr__(self, "n", n)

    @classmethod
    def identity(cls, n_c: int, n: int) -> "Injection":
        return cls(np.arange(n_c), n)

    @property
    def n_c(self) -> int:
        return len(self.map)

    def indicator(self) -> np.ndarray:
        """First ``n_c`` rows of a permutation matrix, as a dense array."""
        out = np.zeros((self.n_c, self.n))
        out[np.arange(self.n_c), self.map] = 1.0
        return out

    def extend(self) -> np.ndarray:
        """A full permutation of ``[n]`` whose first ``n_c`` entries are this map."""
        rest = np.setdiff1d(np.arange(self.n), self.map)
        return np.concatenate([self.map, rest])

    def __len__(self):
        return self.n_c

    def __iter__(self):
        return iter(self.map.tolist())

    def __getitem__(self, i):
        return int(self.map[i])

    def __eq__(self, other):
        if not isinstance(other, Injection):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.map, other.map)

    def __hash__(self):
        return hash((self.n, self.map.tobytes()))

    def __repr__(self):
        return f"Injection({self.map.tolist()}, n={self.n})"


@dataclass(frozen=True)
class SeedSet:
    """Seeds identify vertex ``i`` of the template with vertex ``i`` of the network, ``i < s``."""

    s: int
    n_c: int

    def __post_init__(self):
        if not 0 <= self.s <= self.n_c:
            raise ValueError(f"seed count {self.s} outside [0, {self.n_c}]")


def barycenter_rows(n_c: int, n: int, s: int = 0) -> np.ndarray:
    """Rows of ``I_s (+) J/(n-s)`` restricted to the first ``n_c`` rows."""
    out = np.zeros((n_c, n))
    out[np.arange(s), np.arange(s)] = 1.0
    if n_c > s:
        out[s:, s:] = 1.0 / (n - s)
    return out


@dataclass(frozen=True, eq=False)
class TransportPlan:
    """First ``n_c`` rows of a doubly stochastic matrix.

    ``combo`` records the plan as a convex combination of injections, optionally
    plus a seeded barycenter term ``(weight, s)``, so that
    ``rows == bary_w * barycenter_rows(n_c, n, s) + sum(w * inj.indicator())``.
    Plans built without that record carry an empty ``combo``.
    """

    rows: np.ndarray
    combo: tuple = ()
    barycenter: tuple | None = None

    def __post_init__(self):
        r = np.array(self.rows, dtype=float)
        if r.ndim != 2 or r.shape[0] > r.shape[1]:
            raise ValueError(f"plan rows must be n_c x n with n_c <= n, got {r.shape}")
        if np.any(r < -PLAN_TOL):
            raise ValueError("plan has negative entries")
        if np.any(np.abs(r.sum(axis=1) - 1.0) > PLAN_TOL):
            raise ValueError("plan rows must sum to 1")
        if np.any(r.sum(axis=0) > 1.0 + PLAN_TOL):
            raise ValueError("plan column sums must not exceed 1")
        combo = tuple((float(w), inj) for w, inj in self.combo)
        if combo or self.barycenter is not None:
            weights = [w for w, _ in combo]
            if self.barycenter is not None:
                weights.append(float(self.barycenter[0]))
            if min(weights) < -PLAN_TOL or abs(sum(weights) - 1.0) > 1e-8:
                raise ValueError("combination weights must be non-negative and sum to 1")
        object.__setattr__(self, "rows", _readonly(r))
        object.__setattr__(self, "combo", combo)

    @classmethod
    def from_injection(cls, inj: Injection) -> "TransportPlan":
        return cls(inj.indicator(), ((1.0, inj),))

    @property
    def n_c(self) -> int:
        return self.rows.shape[0]

    @property
    def n(self) -> int:
        return self.rows.shape[1]

    def reconstruct(self) -> np.ndarray:
        """Dense rows rebuilt from the convex-combination record."""
        out = np.zeros((self.n_c, self.n))
        if self.barycenter is not None:
            w, s = self.barycenter
            out += w * barycenter_rows(self.n_c, self.n, s)
        ar = np.arange(self.n_c)
        for w, inj in self.combo:
            out[ar, inj.map] += w
        return out

    def as_injection(self, tol: float = 1e-12) -> Injection | None:
        """The injection this plan equals, if its rows are 0/1 indicators."""
        j = self.rows.argmax(axis=1)
        if np.all(np.abs(self.rows[np.arange(self.n_c), j] - 1.0) <= tol):
            return Injection(j, self.n)
        return None


def compose_injection(sigma: Injection, tau: Sequence[int]) -> Injection:
    """``i -> tau[sigma[i]]`` for a permutation ``tau`` of ``[n]``."""
    t = np.asarray(tau, dtype=np.int64)
    if len(t) != sigma.n:
        raise ValueError(f"permutation has length {len(t)}, injection codomain is {sigma.n}")
    if not np.array_equal(np.sort(t), np.arange(sigma.n)):
        raise ValueError("tau is not a permutation")
    return Injection(t[sigma.map], sigma.n)


def correct_matches(sigma: Injection, truth: Injection) -> int:
    if sigma.n_c != truth.n_c or sigma.n != truth.n:
        raise ValueError("injections have different shapes")
    return int(np.count_nonzero(sigma.map == truth.map))


def edge_errors(A: Graph, B: Graph, sigma: Injection, per_direction: bool = True) -> int:
    """Count vertex pairs of the template whose adjacency disagrees with ``B`` under ``sigma``.

    Undirected pairs are counted once. For directed graphs each ordered pair is
    counted separately unless ``per_direction`` is False, in which case an
    unordered pair counts once if either direction disagrees.
    """
    if A.n != sigma.n_c or B.n != sigma.n:
        raise ValueError("graph orders do not match the injection")
    a = A.toarray()
    idx = sigma.map
    b = B.adjacency[idx][:, idx].toarray()
    diff = a != b
    np.fill_diagonal(diff, False)
    if A.directed or B.directed:
        if per_direction:
            return int(diff.sum())
        return int(np.triu(diff | diff.T, 1).sum())
    return int(np.triu(diff, 1).sum())


def read_edgelist(path: str | Path) -> Graph:
    """Read the edge-list format.

    The first non-comment line is ``n directed|undirected [base]`` where the
    optional ``base`` (0 or 1) gives the index of the first vertex; the
    remaining lines hold one whitespace-separated ``u v`` pair each.
    """
    lines = [ln.split("#", 1)[0].strip() for ln in Path(path).read_text().splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise ValueError(f"{path}: empty edge-list file")
    head = lines[0].split()
    if len(head) not in (2, 3) or head[1] not in ("directed", "undirected"):
        raise ValueError(f"{path}: bad header {lines[0]!r}")
    n = int(head[0])
    base = int(head[2]) if len(head) == 3 else 0
    if base not in (0, 1):
        raise ValueError(f"{path}: index base must be 0 or 1")
    pairs = []
    for k, ln in enumerate(lines[1:], start=2):
        parts = ln.split()
        if len(parts) != 2:
            raise ValueError(f"{path}: line {k}: expected 'u v', got {ln!r}")
        pairs.append((int(parts[0]) - base, int(parts[1]) - base))
    return Graph(n, np.array(pairs, dtype=np.int64).reshape(-1, 2), head[1] == "directed")


def write_edgelist(graph: Graph, path: str | Path, base: int = 0) -> None:
    kind = "directed" if graph.directed else "undirected"
    out = [f"{graph.n} {kind} {base}"]
    out.extend(f"{u + base} {v + base}" for u, v in graph.edges.tolist())
    Path(path).write_text("\n".join(out) + "\n")
