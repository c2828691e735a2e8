"""Graph construction and the normalized operators every other module consumes.

A :class:`Graph` stores the raw undirected edge list and a symmetric binary
adjacency without self-loops.  :func:`normalize` produces the self-looped,
symmetrically normalized adjacency ``a_hat`` and the Laplacian
``l_tilde = I - a_hat``; these two sparse operators are the only topology
inputs the propagation, spectral and training code ever touches.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import InvalidEdge, ShapeError

__all__ = [
    "Graph",
    "NormalizedOperators",
    "build_graph",
    "normalize",
    "spmm",
    "check_csr",
]


@dataclass(frozen=True)
class Graph:
    """Immutable undirected graph.

    Attributes
    ----------
    num_nodes : int
        Number of nodes ``n``; ids are ``0 .. n-1``.
    edges : tuple of (int, int)
        Deduplicated undirected edges in canonical ``(min, max)`` order,
        sorted ascending.
    adjacency : scipy.sparse.csr_matrix
        Symmetric ``n x n`` binary adjacency.  Self-loops are never stored;
        they are added by :func:`normalize` only.
    """

    num_nodes: int
    edges: tuple
    adjacency: sp.csr_matrix


@dataclass(frozen=True)
class NormalizedOperators:
    """The pair of normalized sparse operators derived from a graph.

    ``a_hat`` is the self-looped, symmetrically normalized adjacency; its
    eigenvalues lie in (-1, 1].  ``l_tilde = I - a_hat`` is symmetric positive
    semi-definite with eigenvalues in [0, 2).  For an empty graph ``a_hat``
    is exactly the identity and ``l_tilde`` holds no stored entries.
    """

    a_hat: sp.csr_matrix
    l_tilde: sp.csr_matrix

    @property
    def num_nodes(self) -> int:
        return self.a_hat.shape[0]


def build_graph(num_nodes: int, edges) -> Graph:
    """Build an immutable graph from an undirected edge list.

    Duplicate edges (either direction) are silently deduplicated.  Self-edges
    and out-of-range ids are rejected.

    Parameters
    ----------
    num_nodes : int
        Node count, at least 1.
    edges : iterable of (int, int)
        Undirected edges; order and direction are irrelevant.

    Returns
    -------
    Graph

    Raises
    ------
    InvalidEdge
        If an endpoint is out of ``[0, num_nodes)`` or an edge joins a node
        to itself.
    """
    if num_nodes < 1:
        raise InvalidEdge(f"num_nodes must be >= 1, got {num_nodes}")
    canonical = set()
    for u, v in edges:
        u = int(u)
        v = int(v)
        if not (0 <= u < num_nodes and 0 <= v < num_nodes):
            raise InvalidEdge(
                f"edge ({u}, {v}) out of range for {num_nodes} nodes"
            )
        if u == v:
            raise InvalidEdge(f"self-edge ({u}, {v}) not allowed")
        canonical.add((u, v) if u < v else (v, u))
    ordered = tuple(sorted(canonical))
    if ordered:
        arr = np.asarray(ordered, dtype=np.int64)
        rows = np.concatenate([arr[:, 0], arr[:, 1]])
        cols = np.concatenate([arr[:, 1], arr[:, 0]])
        data = np.ones(rows.shape[0], dtype=np.float64)
        adj = sp.csr_matrix(
            (data, (rows, cols)), shape=(num_nodes, num_nodes)
        )
    else:
        adj = sp.csr_matrix((num_nodes, num_nodes), dtype=np.float64)
    adj.sort_indices()
    return Graph(num_nodes=num_nodes, edges=ordered, adjacency=adj)


def normalize(g: Graph) -> NormalizedOperators:
    """Compute ``a_hat`` (self-looped, symmetrically normalized adjacency)
    and ``l_tilde = I - a_hat``.

    Every node gains a self-loop before normalization, so degrees are
    strictly positive and no error case exists.  For an edgeless graph the
    result is bitwise ``a_hat == I`` (all stored values exactly 1.0) and an
    ``l_tilde`` with no stored entries.
    """
    n = g.num_nodes
    a_tilde = (g.adjacency + sp.identity(n, format="csr", dtype=np.float64)).tocsr()
    deg = np.asarray(a_tilde.sum(axis=1)).ravel()
    dinv_sqrt = 1.0 / np.sqrt(deg)
    a_hat = a_tilde.copy()
    # scale values in place: value(i,j) * dinv[i] * dinv[j]
    a_hat.data *= np.repeat(dinv_sqrt, np.diff(a_hat.indptr))
    a_hat.data *= dinv_sqrt[a_hat.indices]
    a_hat.sort_indices()
    l_tilde = (sp.identity(n, format="csr", dtype=np.float64) - a_hat).tocsr()
    l_tilde.eliminate_zeros()
    l_tilde.sort_indices()
    return NormalizedOperators(a_hat=a_hat, l_tilde=l_tilde)


def spmm(m: sp.csr_matrix, x: np.ndarray) -> np.ndarray:
    """Sparse-dense product ``m @ x`` with shape validation.

    Summation within each row runs in ascending column order (CSR layout),
    so results are reproducible across runs and schedules.

    Raises
    ------
    ShapeError
        If ``m.shape[1] != x.shape[0]``.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise ShapeError(f"dense operand must be 1-D or 2-D, got {x.ndim}-D")
    if m.shape[1] != x.shape[0]:
        raise ShapeError(
            f"cannot multiply {m.shape[0]}x{m.shape[1]} sparse by "
            f"{x.shape[0]}x{x.shape[1]} dense"
        )
    return np.asarray(m @ x)


def check_csr(m: sp.csr_matrix) -> None:
    """Validate CSR structure against the storage contract.

    Checks: non-decreasing row offsets closed by the value count, strictly
    increasing column indices inside each row (sorted, no duplicates), no
    stored explicit zeros, 64-bit float values.

    Raises
    ------
    ShapeError
        On any structural violation.
    """
    if not sp.issparse(m) or m.format != "csr":
        raise ShapeError("expected a CSR sparse matrix")
    n_rows, n_cols = m.shape
    indptr, indices, data = m.indptr, m.indices, m.data
    if len(indptr) != n_rows + 1:
        raise ShapeError("row offsets length must be num_rows + 1")
    if indptr[0] != 0 or indptr[-1] != len(data) or len(indices) != len(data):
        raise ShapeError("row offsets must close over the value arrays")
    if np.any(np.diff(indptr) < 0):
        raise ShapeError("row offsets must be non-decreasing")
    if data.dtype != np.float64:
        raise ShapeError(f"values must be float64, got {data.dtype}")
    if len(indices) and (indices.min() < 0 or indices.max() >= n_cols):
        raise ShapeError("column index out of range")
    for i in range(n_rows):
        row = indices[indptr[i]:indptr[i + 1]]
        if row.size > 1 and np.any(np.diff(row) <= 0):
            raise ShapeError(f"row {i}: column indices not strictly increasing")
    if np.any(data == 0.0):
        raise ShapeError("explicit zeros are not allowed")
