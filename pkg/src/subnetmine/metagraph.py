"""Instance-level neighborhood graphs and node-level topology constraint.

Two m x m affinity matrices are built over the instances: one linking
cosine k-nearest-neighbor pairs that share a global state, one linking
neighbor pairs whose states differ.  Their Laplacians drive the spectral
objective.  The n x n constraint matrix is the Laplacian of the generalized
network and penalizes projection vectors that vary across strongly shared
edges.

Cosine values are kept raw (negative entries are not clamped), so row sums
of the affinities are not guaranteed nonnegative in pathological inputs;
downstream whitening checks for that.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .data import GeneralizedNetwork, NetworkDatabase, StateMatrix
from .errors import AsymmetricInput, DimensionMismatch, KTooLarge, LengthMismatch


@dataclass(frozen=True)
class MetaGraphConfig:
    """Neighborhood parameters; similarity is fixed to cosine."""

    k: int = 10
    similarity: str = "cosine"


@dataclass(frozen=True)
class AffinityPair:
    """Symmetric zero-diagonal affinities: same-state and cross-state."""

    a_plus: sparse.csr_array
    a_minus: sparse.csr_array


@dataclass(frozen=True)
class LaplacianSet:
    """Laplacians of the affinity pair.

    ``d_plus`` stores the diagonal entries of D+ (row sums of A+);
    ``l_tilde`` is L- minus L+.
    """

    d_plus: np.ndarray
    l_plus: sparse.csr_array
    l_minus: sparse.csr_array
    l_tilde: sparse.csr_array


@dataclass(frozen=True)
class ConstraintMatrix:
    """Laplacian of the generalized network (n x n, PSD)."""

    c: sparse.csr_array


def cosine_similarity(a, b) -> float:
    """Cosine of the angle between two vectors; 0 if either norm is 0."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise LengthMismatch(f"vector shapes differ: {a.shape} vs {b.shape}")
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.dot(a, b) / (na * nb))


def _cosine_matrix(v_matrix: StateMatrix) -> np.ndarray:
    """Exactly symmetric m x m cosine similarity matrix of the columns.

    Zero-norm columns get similarity 0 with everything.
    """
    v = v_matrix.matrix
    norms = np.linalg.norm(v, axis=0)
    scale = np.where(norms > 0.0, norms, 1.0)
    unit = v / scale
    unit[:, norms == 0.0] = 0.0
    sims = unit.T @ unit
    sims = (sims + sims.T) / 2.0
    np.fill_diagonal(sims, 0.0)
    return sims


def _neighbor_sets(sims: np.ndarray, k: int) -> list[frozenset[int]]:
    m = sims.shape[0]
    order_key = sims.copy()
    np.fill_diagonal(order_key, -np.inf)
    out = []
    for i in range(m):
        # descending similarity, ties broken by lower instance index
        order = np.lexsort((np.arange(m), -order_key[i]))
        out.append(frozenset(int(j) for j in order[:k]))
    return out


def knn_neighborhoods(v_matrix: StateMatrix, k: int) -> list[frozenset[int]]:
    """Indices of the k most cosine-similar other instances, per instance."""
    m = v_matrix.m_cols
    if not 1 <= k <= m - 1:
        raise KTooLarge(f"k={k} outside 1..{m - 1}")
    return _neighbor_sets(_cosine_matrix(v_matrix), k)


def _affinity_pair(sims: np.ndarray, labels, k: int) -> AffinityPair:
    m = sims.shape[0]
    neighbors = _neighbor_sets(sims, k)
    member = np.zeros((m, m), dtype=bool)
    for i, nb in enumerate(neighbors):
        member[i, list(nb)] = True
    linked = member | member.T
    labels = np.asarray(labels)
    same = labels[:, np.newaxis] == labels[np.newaxis, :]

    def as_csr(pair_mask):
        rows, cols = np.nonzero(np.triu(pair_mask, 1))
        vals = sims[rows, cols]
        # mirrored entries; explicit zeros survive the coo -> csr conversion
        return sparse.csr_array(
            sparse.coo_array(
                (
                    np.concatenate([vals, vals]),
                    (np.concatenate([rows, cols]), np.concatenate([cols, rows])),
                ),
                shape=(m, m),
            )
        )

    return AffinityPair(a_plus=as_csr(linked & same), a_minus=as_csr(linked & ~same))


def build_affinities(
    db: NetworkDatabase, v_matrix: StateMatrix, cfg: MetaGraphConfig
) -> AffinityPair:
    """Split the symmetric kNN relation by label agreement.

    Entry (i, j) carries the raw cosine similarity when j is in kNN(i) or
    i is in kNN(j); it lands in A+ when the global states agree and in A-
    otherwise.  Entries are stored explicitly even when the cosine happens
    to be exactly 0, so the sparsity pattern equals the kNN relation.
    """
    m = db.m
    if v_matrix.m_cols != m:
        raise DimensionMismatch(
            f"state matrix has {v_matrix.m_cols} columns, database has {m} instances"
        )
    if not 1 <= cfg.k <= m - 1:
        raise KTooLarge(f"k={cfg.k} outside 1..{m - 1}")
    return _affinity_pair(_cosine_matrix(v_matrix), db.labels(), cfg.k)


def laplacian(a: sparse.csr_array) -> tuple[np.ndarray, sparse.csr_array]:
    """Degree diagonal and Laplacian L = D - A of a symmetric affinity."""
    a = sparse.csr_array(a)
    diff = (a - a.T).tocoo()
    if diff.nnz and np.max(np.abs(diff.data)) != 0.0:
        raise AsymmetricInput("affinity matrix is not symmetric")
    if np.any(a.diagonal() != 0.0):
        raise ValueError("affinity matrix must have a zero diagonal")
    degrees = np.asarray(a.sum(axis=1)).ravel()
    lap = sparse.csr_array(sparse.diags_array(degrees) - a)
    return degrees, lap


def build_laplacian_set(aff: AffinityPair) -> LaplacianSet:
    d_plus, l_plus = laplacian(aff.a_plus)
    _, l_minus = laplacian(aff.a_minus)
    return LaplacianSet(
        d_plus=d_plus,
        l_plus=l_plus,
        l_minus=l_minus,
        l_tilde=sparse.csr_array(l_minus - l_plus),
    )


def build_constraint_matrix(g: GeneralizedNetwork) -> ConstraintMatrix:
    """Laplacian of the generalized network: diagonal holds weighted degrees,
    off-diagonal entries are minus the shared-edge weights."""
    rows, cols, vals = [], [], []
    for p, q, w in g.edges:
        rows.extend((p, q))
        cols.extend((q, p))
        vals.extend((-w, -w))
        rows.extend((p, q))
        cols.extend((p, q))
        vals.extend((w, w))
    c = sparse.csr_array(sparse.coo_array((vals, (rows, cols)), shape=(g.n, g.n)))
    return ConstraintMatrix(c=c)
