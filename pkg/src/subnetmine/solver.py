"""Constrained spectral subspace solver.

Maximizes u' (V Ltilde V' - alpha C) u subject to u' (V D+ V') u = 1.
The right-hand matrix is rank deficient (rank at most min(n, m)), so it is
inverted through a truncated SVD of V (D+)^{1/2}: with V (D+)^{1/2} = P S Q',
the working space is the span of the retained left singular vectors and the
problem reduces to an ordinary symmetric eigenproblem

    M = S^{-1} P' A P S^{-1},    u = P S^{-1} w,

whose top eigenpairs give the optimal transformation columns.  Solving the
symmetric reduced form instead of the non-symmetric product keeps the
spectrum real and the normalization u'Bu = ||w||^2 = 1 exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .data import StateMatrix
from .errors import DimensionMismatch, ParseError, RankDeficient, ZeroMatrix
from .metagraph import ConstraintMatrix, LaplacianSet

# singular values below this fraction of the largest are discarded outright
_SIGMA_RTOL = 1e-12
# relative gap under which two eigenvalues count as tied
_EIG_TIE_RTOL = 1e-12


@dataclass(frozen=True)
class SolverConfig:
    """alpha weights the topology constraint; energy_fraction controls the
    SVD truncation; d is the subspace dimension (None = number of distinct
    global states)."""

    alpha: float
    energy_fraction: float = 0.95
    d: int | None = None

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError(f"alpha must be nonnegative, got {self.alpha}")
        if not 0.0 < self.energy_fraction <= 1.0:
            raise ValueError(f"energy_fraction must be in (0, 1], got {self.energy_fraction}")


@dataclass(frozen=True)
class TruncatedBasis:
    """Retained left singular vectors and singular values of V (D+)^{1/2}."""

    p_r: np.ndarray
    sigma_r: np.ndarray
    r: int


@dataclass(frozen=True)
class SpectralModel:
    """Transformation matrix U (n x d), its eigenvalues, and the basis used."""

    u_matrix: np.ndarray
    eigenvalues: np.ndarray
    basis: TruncatedBasis
    alpha: float

    @property
    def n(self) -> int:
        return self.u_matrix.shape[0]

    @property
    def d(self) -> int:
        return self.u_matrix.shape[1]


def assemble_objective_matrix(
    v: StateMatrix, lap: LaplacianSet, c: ConstraintMatrix, alpha: float
) -> np.ndarray:
    """A = V Ltilde V' - alpha C, symmetrized to kill roundoff."""
    if lap.l_tilde.shape[0] != v.m_cols:
        raise DimensionMismatch(
            f"Laplacians are {lap.l_tilde.shape[0]}x{lap.l_tilde.shape[0]}, "
            f"state matrix has {v.m_cols} columns"
        )
    if c.c.shape[0] != v.n_rows:
        raise DimensionMismatch(
            f"constraint matrix is {c.c.shape[0]}x{c.c.shape[0]}, "
            f"state matrix has {v.n_rows} rows"
        )
    mat = v.matrix @ (lap.l_tilde @ v.matrix.T)
    if alpha != 0.0:
        mat = mat - alpha * c.c.toarray()
    return (mat + mat.T) / 2.0


def truncated_svd_basis(
    v: StateMatrix, d_plus: np.ndarray, energy_fraction: float
) -> TruncatedBasis:
    """SVD of V (D+)^{1/2}, truncated to the smallest rank whose singular
    values sum to at least ``energy_fraction`` of the total.

    Two noise guards tighten the cut further: components whose squared
    singular value falls below the average squared singular value are
    dropped (Kaiser rule; keeps the basis clear of the noise bulk), and so
    are values below 1e-12 of the largest.
    """
    d_plus = np.asarray(d_plus, dtype=np.float64)
    if d_plus.shape != (v.m_cols,):
        raise DimensionMismatch(
            f"degree diagonal has length {d_plus.shape}, expected ({v.m_cols},)"
        )
    if np.any(d_plus < 0.0):
        raise ValueError(
            "D+ has negative diagonal entries; same-state affinity row sums "
            "must be >= 0 (reduce k or use more training instances)"
        )
    scaled = v.matrix * np.sqrt(d_plus)[np.newaxis, :]
    p, sigma, _ = np.linalg.svd(scaled, full_matrices=False)
    if sigma.size == 0 or sigma[0] <= 0.0:
        raise ZeroMatrix("all singular values vanish; affinity graph is degenerate")

    n_above = int(np.count_nonzero(sigma > _SIGMA_RTOL * sigma[0]))
    total = sigma.sum()
    cumulative = np.cumsum(sigma)
    target = energy_fraction * total
    r_energy = int(np.argmax(cumulative >= target - _SIGMA_RTOL * total)) + 1
    # Kaiser guard: sigma is descending, so this is a prefix count
    power = sigma**2
    n_kaiser = int(np.count_nonzero(power >= power.mean() - _SIGMA_RTOL * power[0]))
    r = min(r_energy, n_kaiser, n_above)
    return TruncatedBasis(p_r=p[:, :r].copy(), sigma_r=sigma[:r].copy(), r=r)


def _order_ties(eigenvalues: np.ndarray, u_columns: np.ndarray) -> np.ndarray:
    """Permutation stabilizing the descending eigenvalue order: within a tied
    group, columns are ordered by the row index of their largest-magnitude
    entry."""
    order = list(range(len(eigenvalues)))
    anchor = np.argmax(np.abs(u_columns), axis=0)
    start = 0
    while start < len(order):
        stop = start + 1
        scale = 1.0 + abs(eigenvalues[start])
        while (
            stop < len(order)
            and abs(eigenvalues[stop] - eigenvalues[start]) <= _EIG_TIE_RTOL * scale
        ):
            stop += 1
        if stop - start > 1:
            order[start:stop] = sorted(order[start:stop], key=lambda i: anchor[i])
        start = stop
    return np.array(order)


def solve_spectral(
    a: np.ndarray, basis: TruncatedBasis, d: int, alpha: float = 0.0
) -> SpectralModel:
    """Top-d eigenpairs of the reduced problem, mapped back to node space.

    Eigenvalues come out in descending order; each returned column u
    satisfies u' (V D+ V') u = 1 on the retained subspace and has its
    largest-magnitude entry made positive.  ``alpha`` is only recorded on
    the model; it must match the one used to assemble ``a``.
    """
    if d > basis.r:
        raise RankDeficient(f"requested d={d} exceeds retained rank r={basis.r}")
    if d < 1:
        raise ValueError(f"d must be positive, got {d}")
    inv_sigma = 1.0 / basis.sigma_r
    half = a @ (basis.p_r * inv_sigma[np.newaxis, :])
    reduced = (basis.p_r * inv_sigma[np.newaxis, :]).T @ half
    reduced = (reduced + reduced.T) / 2.0
    eigvals, eigvecs = np.linalg.eigh(reduced)
    eigvals = eigvals[::-1]
    eigvecs = eigvecs[:, ::-1]

    u_all = basis.p_r @ (eigvecs * inv_sigma[:, np.newaxis])
    order = _order_ties(eigvals, u_all)
    eigvals = eigvals[order][:d].copy()
    u = u_all[:, order][:, :d].copy()

    flip = np.take_along_axis(
        u, np.argmax(np.abs(u), axis=0)[np.newaxis, :], axis=0
    ).ravel()
    u[:, flip < 0] *= -1.0

    return SpectralModel(u_matrix=u, eigenvalues=eigvals, basis=basis, alpha=alpha)


def transform(model: SpectralModel, v: StateMatrix) -> np.ndarray:
    """Project instance columns into the learned subspace: U' V, d x m."""
    if model.n != v.n_rows:
        raise DimensionMismatch(
            f"model has {model.n} nodes, state matrix has {v.n_rows} rows"
        )
    return model.u_matrix.T @ v.matrix


# ---------------------------------------------------------------------------
# model serialization


def model_meta_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".meta.json")


def save_model(model: SpectralModel, node_ids: list[str], path) -> None:
    """TSV of per-node transformation coefficients plus a JSON sidecar."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = "node_id\t" + "\t".join(f"u_{j + 1}" for j in range(model.d))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header + "\n")
        for node_id, row in zip(node_ids, model.u_matrix):
            cells = "\t".join(f"{x:.17g}" for x in row)
            fh.write(f"{node_id}\t{cells}\n")
    meta = {
        "alpha": float(model.alpha),
        "d": model.d,
        "r": model.basis.r,
        "eigenvalues": [float(x) for x in model.eigenvalues],
    }
    with open(model_meta_path(path), "w", encoding="utf-8", newline="\n") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_model(path) -> tuple[list[str], np.ndarray, dict]:
    """Read a saved model; returns (node_ids, U, metadata)."""
    path = Path(path)
    node_ids = []
    rows = []
    with open(path, encoding="utf-8", newline="") as fh:
        header = fh.readline().rstrip("\n").split("\t")
        if not header or header[0] != "node_id":
            raise ParseError(path, 1, "expected model header starting with node_id")
        width = len(header) - 1
        for lineno, line in enumerate(fh, start=2):
            fields = line.rstrip("\n").split("\t")
            if len(fields) != width + 1:
                raise ParseError(path, lineno, f"expected {width + 1} fields")
            node_ids.append(fields[0])
            rows.append([float(x) for x in fields[1:]])
    meta = {}
    meta_file = model_meta_path(path)
    if meta_file.is_file():
        with open(meta_file, encoding="utf-8") as fh:
            meta = json.load(fh)
    return node_ids, np.array(rows, dtype=np.float64), meta
