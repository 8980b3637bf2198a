"""Independent oracles and small builders shared across the test modules.

Everything here recomputes results from first principles (dense arrays,
literal definitions) so the sparse production paths are checked against
genuinely independent implementations.
"""
from __future__ import annotations

import itertools

import numpy as np

from hyperctrl import AdjacencyTensor, Hypergraph, dense_tensor
from hyperctrl.hypergraph import _splitmix64


def dense_ttv(tensor: AdjacencyTensor, vectors) -> np.ndarray:
    """Naive full contraction over all n^(k-1) index tuples."""
    dense = dense_tensor(tensor)
    out = dense
    for v in vectors:
        # contract the last axis each time; symmetric so order is irrelevant
        out = np.tensordot(out, np.asarray(v, dtype=float), axes=([out.ndim - 1], [0]))
    return out


def dense_subspace_rank(tensor: AdjacencyTensor, control_nodes, tol=1e-9) -> int:
    """Literal iterative-span construction over full argument tuples.

    Starts from the control columns and repeatedly appends the dense tensor
    applied to every (k-1)-tuple of current basis columns, re-deriving an
    orthonormal basis each round, for n rounds.
    """
    n, k = tensor.dim, tensor.order
    cols = [np.eye(n)[:, j - 1] for j in control_nodes]
    if not cols:
        return 0
    basis = _orth_dense(np.column_stack(cols), tol)
    for _ in range(n):
        generated = [
            dense_ttv(tensor, combo)
            for combo in itertools.product(list(basis.T), repeat=k - 1)
        ]
        stacked = np.column_stack([basis] + [g.reshape(-1, 1) for g in generated])
        basis = _orth_dense(stacked, tol)
    return basis.shape[1]


def _orth_dense(mat: np.ndarray, tol: float) -> np.ndarray:
    u, s, _ = np.linalg.svd(mat, full_matrices=False)
    return u[:, s > tol]


def kalman_rank(adjacency: np.ndarray, control_nodes, tol=1e-9) -> int:
    """Classical controllability-matrix rank [B, AB, ..., A^(n-1)B]."""
    n = adjacency.shape[0]
    B = np.zeros((n, len(control_nodes)))
    for col, j in enumerate(control_nodes):
        B[j - 1, col] = 1.0
    blocks = [B]
    for _ in range(n - 1):
        blocks.append(adjacency @ blocks[-1])
    return int(np.linalg.matrix_rank(np.hstack(blocks), tol=tol))


def seeded_floats(seed: int, count: int, lo=-1.0, hi=1.0) -> np.ndarray:
    """Deterministic, platform-stable uniform floats from splitmix64."""
    vals = np.array(
        [(_splitmix64(seed, i) >> 11) / float(1 << 53) for i in range(count)]
    )
    return lo + (hi - lo) * vals


def seeded_ints(seed: int, count: int, bound: int) -> list:
    return [_splitmix64(seed, i) % bound for i in range(count)]


def random_hypergraph(seed: int, n: int, k: int, density=0.4) -> Hypergraph:
    """Seeded uniform hypergraph (thin wrapper kept for test readability)."""
    from hyperctrl import random_uniform

    return random_uniform(n, k, density, seed)


def random_mixed_hypergraph(seed: int, n: int, max_card: int) -> Hypergraph:
    """Seeded hypergraph with mixed edge cardinalities between 2 and max_card."""
    candidates = []
    for s in range(2, max_card + 1):
        candidates.extend(itertools.combinations(range(1, n + 1), s))
    edges = []
    for i, edge in enumerate(candidates):
        if (_splitmix64(seed, i) >> 11) / float(1 << 53) < 0.25:
            edges.append(edge)
    if not edges:
        edges = [candidates[_splitmix64(seed, len(candidates)) % len(candidates)]]
    return Hypergraph(n=n, edges=tuple(edges))
