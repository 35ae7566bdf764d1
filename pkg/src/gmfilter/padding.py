"""Padding and centering schemes.

Each scheme turns a template ``A`` (order ``n_c``) and a network ``B`` (order
``n``) into a pair of ``n x n`` real matrices.  Both are kept as a sparse
matrix plus a short list of rank-one terms so that products against the
``n_c x n`` plan rows never need a dense ``n x n`` array.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .graph import Graph

__all__ = [
    "LowRank",
    "PaddedMatrix",
    "Scheme",
    "best_rank_r",
    "pad",
    "pad_centered",
    "pad_lowrank",
    "pad_naive",
    "pad_oracle",
    "parse_scheme",
]

DENSE_EIG_LIMIT = 4096
# below this order take() reads from a cached dense copy; sparse fancy indexing dominates otherwise
DENSE_TAKE_LIMIT = 64


@dataclass(frozen=True, eq=False)
class LowRank:
    """``sum_k c[k] * outer(U[:, k], V[:, k])``."""

    c: np.ndarray
    U: np.ndarray
    V: np.ndarray

    @property
    def rank(self) -> int:
        return len(self.c)

    def toarray(self) -> np.ndarray:
        out = np.zeros((self.U.shape[0], self.V.shape[0]))
        for k in range(self.rank):
            out += np.multiply.outer(self.c[k] * self.U[:, k], self.V[:, k])
        return out


class PaddedMatrix:
    """Square matrix stored as ``sparse + sum_k c_k u_k v_k^T``.

    Entry ``(i, j)`` equals ``sparse[i, j] + sum_k c[k] * U[i, k] * V[j, k]``.
    All dense extraction goes through :meth:`take`, so a submatrix pulled out
    with ``take`` is bitwise identical to the same entries of :meth:`toarray`.
    """

    def __init__(self, sparse, c=(), U=None, V=None, symmetric: bool = True, template_order: int | None = None):
        S = sp.csr_matrix(sparse, dtype=float)
        if S.shape[0] != S.shape[1]:
            raise ValueError("padded matrix must be square")
        n = S.shape[0]
        c = np.array(c, dtype=float).reshape(-1)
        k = len(c)
        U = np.zeros((n, 0)) if U is None else np.array(U, dtype=float).reshape(n, k)
        V = U if V is None else np.array(V, dtype=float).reshape(n, k)
        S.sort_indices()
        self.n = n
        self.sparse = S
        self.c = c
        self.U = U
        self.V = V
        self.symmetric = bool(symmetric)
        # order of the leading block a padded template was built from
        self.template_order = template_order
        self._dense = None
        for a in (self.c, self.U, self.V):
            a.setflags(write=False)

    @property
    def lowrank(self) -> list[tuple[float, np.ndarray, np.ndarray]]:
        return [(float(self.c[k]), self.U[:, k], self.V[:, k]) for k in range(len(self.c))]

    @property
    def T(self) -> "PaddedMatrix":
        if self.symmetric:
            return self
        return PaddedMatrix(self.sparse.T, self.c, self.V, self.U, False, self.template_order)

    def take(self, rows, cols) -> np.ndarray:
        """Dense submatrix ``M[rows][:, cols]``."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        if self.n <= DENSE_TAKE_LIMIT:
            if self._dense is None:
                idx = np.arange(self.n)
                self._dense = self._assemble(idx, idx)
                self._dense.setflags(write=False)
            return self._dense[np.ix_(rows, cols)]
        return self._assemble(rows, cols)

    def _assemble(self, rows, cols) -> np.ndarray:
        # entrywise the same arithmetic for any index set, so subsets agree bitwise
        out = self.sparse[rows][:, cols].toarray()
        for k in range(len(self.c)):
            out += np.multiply.outer(self.c[k] * self.U[rows, k], self.V[cols, k])
        return out

    def take_rows(self, rows) -> np.ndarray:
        rows = np.asarray(rows, dtype=np.int64)
        out = self.sparse[rows].toarray()
        for k in range(len(self.c)):
            out += np.multiply.outer(self.c[k] * self.U[rows, k], self.V[:, k])
        return out

    def toarray(self) -> np.ndarray:
        idx = np.arange(self.n)
        return self.take(idx, idx)

    def core(self, k: int) -> "PaddedMatrix":
        """Leading principal ``k x k`` block, same representation."""
        return PaddedMatrix(
            self.sparse[:k][:, :k], self.c, self.U[:k], self.V[:k], symmetric=self.symmetric
        )

    def dot(self, Y: np.ndarray) -> np.ndarray:
        """``M @ Y`` for a dense ``Y`` with ``n`` rows."""
        out = np.asarray(self.sparse @ Y)
        if len(self.c):
            out = out + self.U @ (self.c[:, None] * (self.V.T @ Y))
        return out

    def rdot(self, Y: np.ndarray) -> np.ndarray:
        """``Y @ M`` for a dense ``Y`` with ``n`` columns."""
        out = np.asarray((self.sparse.T @ Y.T).T)
        if len(self.c):
            out = out + ((Y @ self.U) * self.c) @ self.V.T
        return out

    def __repr__(self):
        return f"PaddedMatrix(n={self.n}, nnz={self.sparse.nnz}, rank={len(self.c)})"


@dataclass(frozen=True, eq=False)
class Scheme:
    """Padding scheme tag: ``naive``, ``centered``, ``oracle`` (needs ``lam``) or ``rank`` (needs ``rank``)."""

    kind: str
    rank: int | None = None
    lam: np.ndarray | None = None
    source: str | None = None

    def __post_init__(self):
        if self.kind not in ("naive", "centered", "oracle", "rank"):
            raise ValueError(f"unknown padding scheme {self.kind!r}")
        if self.kind == "oracle":
            if self.lam is None:
                raise ValueError("oracle padding needs an edge-probability matrix")
            lam = np.asarray(self.lam, dtype=float)
            if lam.ndim != 2 or lam.shape[0] != lam.shape[1]:
                raise ValueError("oracle matrix must be square")
            if np.any(lam < 0) or np.any(lam > 1) or not np.all(np.isfinite(lam)):
                raise ValueError("oracle matrix entries must lie in [0, 1]")
            object.__setattr__(self, "lam", lam)
        if self.kind == "rank" and (self.rank is None or int(self.rank) < 1):
            raise ValueError("low-rank centering needs a rank >= 1")

    @classmethod
    def naive(cls):
        return cls("naive")

    @classmethod
    def centered(cls):
        return cls("centered")

    @classmethod
    def oracle(cls, lam, source=None):
        return cls("oracle", lam=lam, source=source)

    @classmethod
    def low_rank(cls, r: int):
        return cls("rank", rank=int(r))

    def __str__(self):
        if self.kind == "rank":
            return f"rank:{self.rank}"
        if self.kind == "oracle":
            return f"oracle:{self.source or '<matrix>'}"
        return self.kind


def parse_scheme(text: str) -> Scheme:
    """Parse ``naive | centered | oracle:<lambda-file> | rank:<r>``.

    Lambda files are read with :func:`numpy.load` when they end in ``.npy`` and
    :func:`numpy.loadtxt` otherwise.
    """
    text = text.strip()
    if text in ("naive", "centered"):
        return Scheme(text)
    kind, sep, arg = text.partition(":")
    if not sep or not arg:
        raise ValueError(f"cannot parse padding scheme {text!r}")
    if kind == "rank":
        try:
            r = int(arg)
        except ValueError:
            raise ValueError(f"bad rank in scheme {text!r}") from None
        return Scheme.low_rank(r)
    if kind == "oracle":
        path = Path(arg)
        if not path.exists():
            raise FileNotFoundError(f"lambda file not found: {arg}")
        lam = np.load(path) if path.suffix == ".npy" else np.loadtxt(path, ndmin=2)
        return Scheme.oracle(lam, source=arg)
    raise ValueError(f"unknown padding scheme {text!r}")


def _check_orders(A: Graph, B: Graph):
    if A.n > B.n:
        raise ValueError(f"template has {A.n} vertices, more than the network's {B.n}")


def _embed(M, n: int) -> sp.csr_matrix:
    """``M (+) 0`` as an ``n x n`` sparse matrix."""
    M = sp.coo_matrix(M)
    return sp.csr_matrix((M.data, (M.row, M.col)), shape=(n, n))


def _pad_vecs(U: np.ndarray, n: int) -> np.ndarray:
    out = np.zeros((n, U.shape[1]))
    out[: U.shape[0]] = U
    return out


def pad_naive(A: Graph, B: Graph) -> tuple[PaddedMatrix, PaddedMatrix]:
    _check_orders(A, B)
    sym = not (A.directed or B.directed)
    return (
        PaddedMatrix(_embed(A.adjacency, B.n), symmetric=sym, template_order=A.n),
        PaddedMatrix(B.adjacency, symmetric=sym),
    )


def pad_centered(A: Graph, B: Graph) -> tuple[PaddedMatrix, PaddedMatrix]:
    """``(2A - J) (+) 0`` against ``2B - J``, with zero diagonals.

    The ``-J`` term is the rank-one part; the sparse part carries ``2A`` plus a
    unit diagonal that cancels ``-J`` on the diagonal.
    """
    _check_orders(A, B)
    n, n_c = B.n, A.n
    sym = not (A.directed or B.directed)
    ones_c = np.zeros((n, 1))
    ones_c[:n_c] = 1.0
    Sa = _embed(2.0 * A.adjacency + sp.identity(n_c), n)
    Sb = 2.0 * B.adjacency + sp.identity(n)
    return (
        PaddedMatrix(Sa, [-1.0], ones_c, symmetric=sym, template_order=n_c),
        PaddedMatrix(Sb, [-1.0], np.ones((n, 1)), symmetric=sym),
    )


def pad_oracle(A: Graph, B: Graph, lam) -> tuple[PaddedMatrix, PaddedMatrix]:
    """``(A - lam_c) (+) 0`` against ``B - lam`` where ``lam_c`` is the leading block.

    ``lam`` is held in the sparse slot, so this is dense storage in disguise;
    for structured probability matrices prefer a low-rank scheme.
    """
    _check_orders(A, B)
    lam = Scheme.oracle(lam).lam
    n, n_c = B.n, A.n
    if lam.shape != (n, n):
        raise ValueError(f"oracle matrix has shape {lam.shape}, expected {(n, n)}")
    sym = not (A.directed or B.directed)
    Sa = _embed(A.toarray() - lam[:n_c, :n_c], n)
    Sb = sp.csr_matrix(B.toarray() - lam)
    return PaddedMatrix(Sa, symmetric=sym, template_order=n_c), PaddedMatrix(Sb, symmetric=sym)


def best_rank_r(M, r: int, symmetric: bool | None = None) -> LowRank:
    """Best Frobenius-norm approximation of rank at most ``r``.

    Symmetric input keeps the ``r`` eigenpairs of largest magnitude (signs
    kept); anything else uses the truncated SVD.  Orders above
    ``DENSE_EIG_LIMIT`` switch to ARPACK.
    """
    if sp.issparse(M):
        M = M.tocsr().astype(float)
        if not np.all(np.isfinite(M.data)):
            raise ValueError("matrix has non-finite entries")
    else:
        M = np.asarray(M, dtype=float)
        if not np.all(np.isfinite(M)):
            raise ValueError("matrix has non-finite entries")
    if M.ndim != 2:
        raise ValueError("expected a matrix")
    r = int(r)
    if not 1 <= r <= min(M.shape):
        raise ValueError(f"rank {r} outside [1, {min(M.shape)}]")
    if symmetric is None:
        if sp.issparse(M):
            symmetric = M.shape[0] == M.shape[1] and abs(M - M.T).max() == 0
        else:
            symmetric = M.shape[0] == M.shape[1] and np.array_equal(M, M.T)
    big = max(M.shape) > DENSE_EIG_LIMIT and r < min(M.shape) - 1
    if symmetric:
        if big:
            w, Q = spla.eigsh(M, k=r, which="LM")
        else:
            dense = M.toarray() if sp.issparse(M) else M
            w, Q = np.linalg.eigh(dense)
        order = np.argsort(-np.abs(w), kind="stable")[:r]
        return LowRank(w[order], Q[:, order], Q[:, order])
    if big:
        U, s, Vt = spla.svds(M, k=r)
    else:
        dense = M.toarray() if sp.issparse(M) else M
        U, s, Vt = np.linalg.svd(dense, full_matrices=False)
    order = np.argsort(-s, kind="stable")[:r]
    return LowRank(s[order], U[:, order], Vt[order].T)


def pad_lowrank(A: Graph, B: Graph, r: int) -> tuple[PaddedMatrix, PaddedMatrix]:
    """``(A - Ahat_r) (+) 0`` against ``B - Bhat_r`` with best rank-``r`` approximations."""
    _check_orders(A, B)
    r = int(r)
    if not 1 <= r <= A.n:
        raise ValueError(f"rank {r} outside [1, {A.n}]")
    n = B.n
    sym = not (A.directed or B.directed)
    la = best_rank_r(A.adjacency, r, symmetric=sym)
    lb = best_rank_r(B.adjacency, r, symmetric=sym)
    Atil = PaddedMatrix(
        _embed(A.adjacency, n),
        -la.c,
        _pad_vecs(la.U, n),
        _pad_vecs(la.V, n),
        symmetric=sym,
        template_order=A.n,
    )
    Btil = PaddedMatrix(B.adjacency, -lb.c, lb.U, lb.V, symmetric=sym)
    return Atil, Btil


def pad(A: Graph, B: Graph, scheme: Scheme | str) -> tuple[PaddedMatrix, PaddedMatrix]:
    if isinstance(scheme, str):
        scheme = parse_scheme(scheme)
    if scheme.kind == "naive":
        return pad_naive(A, B)
    if scheme.kind == "centered":
        return pad_centered(A, B)
    if scheme.kind == "oracle":
        return pad_oracle(A, B, scheme.lam)
    return pad_lowrank(A, B, scheme.rank)
