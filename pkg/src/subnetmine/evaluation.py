"""End-to-end pipeline: cross validation, alpha selection, AUC.

Every fold rebuilds the meta-graphs, the generalized network and the
spectral model from its training instances only, so no test information
leaks into the learned subspace.  Alpha is chosen per outer fold by an
inner cross validation over the remaining training folds (ties go to the
smaller alpha); node-ranking quality is scored as the area under the ROC
curve of the scores against a ground-truth node set.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from scipy.stats import rankdata

from .data import (
    NetworkDatabase,
    StateMatrix,
    assemble_state_matrix,
    build_generalized_network,
    GeneralizedNetwork,
)
from .errors import SingleClassFold, TooFewPerClass, DegenerateGroundTruth
from .metagraph import (
    MetaGraphConfig,
    _affinity_pair,
    _cosine_matrix,
    build_affinities,
    build_constraint_matrix,
    build_laplacian_set,
)
from .seeds import substream
from .selection import score_nodes
from .solver import (
    SolverConfig,
    SpectralModel,
    assemble_objective_matrix,
    solve_spectral,
    transform,
    truncated_svd_basis,
)

DEFAULT_ALPHA_GRID = (0.1, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 6.5)


@dataclass(frozen=True)
class EvalConfig:
    folds: int = 10
    alpha_grid: tuple[float, ...] = DEFAULT_ALPHA_GRID
    k: int = 10
    c: int = 50
    d: int | None = None
    seed: int = 0


@dataclass(frozen=True)
class LinearClassifier:
    """Linear decision rule sign(w.x + b) over embedded coordinates,
    mapped back to the two original labels."""

    weights: np.ndarray
    bias: float
    neg_label: int
    pos_label: int

    def decision(self, embedded: np.ndarray) -> np.ndarray:
        return self.weights @ embedded + self.bias

    def predict(self, embedded: np.ndarray) -> np.ndarray:
        side = self.decision(embedded) >= 0.0
        return np.where(side, self.pos_label, self.neg_label)


@dataclass(frozen=True)
class OneVsRestClassifier:
    """Minimal multi-class extension: one binary model per label."""

    labels: tuple[int, ...]
    models: tuple[LinearClassifier, ...]

    def predict(self, embedded: np.ndarray) -> np.ndarray:
        scores = np.vstack([m.decision(embedded) for m in self.models])
        return np.asarray(self.labels)[np.argmax(scores, axis=0)]


@dataclass(frozen=True)
class EvalReport:
    fold_accuracies: tuple[float, ...]
    mean_accuracy: float
    sd_accuracy: float
    fold_alphas: tuple[float, ...]
    best_alpha: float
    auc: float | None = None
    roc: tuple[tuple[float, float], ...] | None = None


# ---------------------------------------------------------------------------
# folds and classifier


def stratified_folds(labels, folds: int, seed: int) -> np.ndarray:
    """Fold id per instance, class-balanced within +-1 member.

    folds == m degenerates to leave-one-out (one instance per fold); below
    that every class must have at least ``folds`` members.
    """
    labels = np.asarray(labels)
    m = labels.shape[0]
    if folds < 2:
        raise ValueError(f"folds must be >= 2, got {folds}")
    if folds > m:
        raise ValueError(f"folds={folds} exceeds instance count {m}")
    if folds == m:
        return np.arange(m)
    rng = substream(seed, "folds")
    assignment = np.empty(m, dtype=int)
    for cls in np.unique(labels):
        idx = np.flatnonzero(labels == cls)
        if idx.size < folds:
            raise TooFewPerClass(
                f"class {cls} has {idx.size} members, need >= {folds}"
            )
        idx = idx[rng.permutation(idx.size)]
        assignment[idx] = np.arange(idx.size) % folds
    return assignment


def _hinge_objective(x, y, w, b, reg):
    margins = 1.0 - y * (w @ x + b)
    return 0.5 * reg * float(w @ w) + float(np.mean(np.maximum(margins, 0.0)))


def train_linear_classifier(
    embedded: np.ndarray, labels, epochs: int = 150, reg: float = 1e-3
) -> LinearClassifier:
    """Deterministic full-batch subgradient descent on the regularized hinge
    loss.

    Coordinates are standardized internally (folded back into the returned
    weights), the step schedule is 1/(reg*(t+2)), iterates are projected
    onto the ball of radius 1/sqrt(reg), and the returned model is the
    epoch-end iterate (raw or running average) with the lowest training
    objective, so longer training never yields a worse loss.
    """
    embedded = np.atleast_2d(np.asarray(embedded, dtype=np.float64))
    labels = np.asarray(labels)
    classes = np.unique(labels)
    if classes.size < 2:
        raise SingleClassFold(f"single class {classes} in training labels")
    if classes.size > 2:
        models = tuple(
            train_linear_classifier(embedded, np.where(labels == cls, 1, 0), epochs, reg)
            for cls in classes
        )
        return OneVsRestClassifier(labels=tuple(int(c) for c in classes), models=models)
    neg, pos = int(classes[0]), int(classes[1])
    y = np.where(labels == pos, 1.0, -1.0)

    mean = embedded.mean(axis=1)
    sd = embedded.std(axis=1)
    sd = np.where(sd > 0.0, sd, 1.0)
    x = (embedded - mean[:, np.newaxis]) / sd[:, np.newaxis]

    dim = x.shape[0]
    w = np.zeros(dim)
    b = 0.0
    w_avg = np.zeros(dim)
    b_avg = 0.0
    radius = 1.0 / np.sqrt(reg)
    best = (_hinge_objective(x, y, w, b, reg), w.copy(), b)
    for t in range(epochs):
        active = (1.0 - y * (w @ x + b)) > 0.0
        grad_w = reg * w - (x[:, active] * y[active]).sum(axis=1) / y.size
        grad_b = -y[active].sum() / y.size
        step = 1.0 / (reg * (t + 2))
        w = w - step * grad_w
        b = b - step * grad_b
        norm = np.linalg.norm(w)
        if norm > radius:
            w *= radius / norm
        w_avg += (w - w_avg) / (t + 1)
        b_avg += (b - b_avg) / (t + 1)
        for cand_w, cand_b in ((w, b), (w_avg, b_avg)):
            obj = _hinge_objective(x, y, cand_w, cand_b, reg)
            if obj < best[0]:
                best = (obj, cand_w.copy(), float(cand_b))

    _, w_std, b_std = best
    w_orig = w_std / sd
    b_orig = b_std - float(w_std @ (mean / sd))
    return LinearClassifier(weights=w_orig, bias=b_orig, neg_label=neg, pos_label=pos)


# ---------------------------------------------------------------------------
# model fitting


def fit_model(
    db: NetworkDatabase,
    k: int = 10,
    alpha: float = 1.0,
    energy_fraction: float = 0.95,
    d: int | None = None,
) -> SpectralModel:
    """Full pipeline on one database: affinities, Laplacians, constraint,
    objective, truncated basis, eigenvectors.

    k is clamped to m - 1 so fold-restricted databases keep working; d
    defaults to the number of distinct global states.
    """
    v = assemble_state_matrix(db)
    cfg = MetaGraphConfig(k=min(k, db.m - 1))
    aff = build_affinities(db, v, cfg)
    lap = build_laplacian_set(aff)
    g = build_generalized_network(db)
    c = build_constraint_matrix(g)
    a = assemble_objective_matrix(v, lap, c, alpha)
    basis = truncated_svd_basis(v, lap.d_plus, energy_fraction)
    d_eff = d if d is not None else len(db.states())
    return solve_spectral(a, basis, d_eff, alpha=alpha)


@dataclass(frozen=True)
class _CvContext:
    """Precomputed full-database arrays shared by all fold fits."""

    v: np.ndarray            # n x m state matrix
    labels: np.ndarray       # m
    edge_pairs: np.ndarray   # E x 2 union edge list
    presence: np.ndarray     # m x E boolean
    k: int
    d: int
    energy_fraction: float


def _make_context(db: NetworkDatabase, k: int, d: int | None, energy: float) -> _CvContext:
    v = assemble_state_matrix(db).matrix
    labels = db.labels()
    edge_id: dict[tuple[int, int], int] = {}
    for edges in db.instance_edges:
        for edge in edges:
            if edge not in edge_id:
                edge_id[edge] = len(edge_id)
    presence = np.zeros((db.m, max(len(edge_id), 1)), dtype=bool)
    for i, edges in enumerate(db.instance_edges):
        for edge in edges:
            presence[i, edge_id[edge]] = True
    pairs = np.zeros((max(len(edge_id), 1), 2), dtype=int)
    for edge, j in edge_id.items():
        pairs[j] = edge
    n = v.shape[0]
    d_eff = d if d is not None else len(np.unique(labels))
    return _CvContext(
        v=v,
        labels=labels,
        edge_pairs=pairs,
        presence=presence if len(edge_id) else np.zeros((db.m, 0), dtype=bool),
        k=k,
        d=d_eff,
        energy_fraction=energy,
    )


def _subset_network(ctx: _CvContext, train_idx: np.ndarray, n: int) -> GeneralizedNetwork:
    counts = ctx.presence[train_idx].sum(axis=0)
    kept = np.flatnonzero(counts > 0)
    m_train = len(train_idx)
    edges = tuple(
        (int(ctx.edge_pairs[j, 0]), int(ctx.edge_pairs[j, 1]), counts[j] / m_train)
        for j in kept
    )
    return GeneralizedNetwork(n=n, edges=edges)


def _fit_subset(ctx: _CvContext, train_idx: np.ndarray, alpha: float) -> SpectralModel:
    v_train = StateMatrix(ctx.v[:, train_idx].copy())
    labels_train = ctx.labels[train_idx]
    k = min(ctx.k, len(train_idx) - 1)
    aff = _affinity_pair(_cosine_matrix(v_train), labels_train, k)
    lap = build_laplacian_set(aff)
    c = build_constraint_matrix(_subset_network(ctx, train_idx, ctx.v.shape[0]))
    a = assemble_objective_matrix(v_train, lap, c, alpha)
    basis = truncated_svd_basis(v_train, lap.d_plus, ctx.energy_fraction)
    return solve_spectral(a, basis, ctx.d, alpha=alpha)


def _fit_and_score(
    ctx: _CvContext, train_idx: np.ndarray, eval_idx: np.ndarray, alpha: float
) -> float:
    model = _fit_subset(ctx, train_idx, alpha)
    emb_train = model.u_matrix.T @ ctx.v[:, train_idx]
    emb_eval = model.u_matrix.T @ ctx.v[:, eval_idx]
    clf = train_linear_classifier(emb_train, ctx.labels[train_idx])
    predicted = clf.predict(emb_eval)
    return float(np.mean(predicted == ctx.labels[eval_idx]))


def _parallel_map(fn, items, threads: int):
    if threads <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def run_cv(
    db: NetworkDatabase,
    eval_cfg: EvalConfig,
    solver_cfg: SolverConfig,
    threads: int = 1,
) -> EvalReport:
    """Outer cross validation with nested alpha selection.

    With two or more grid points, each outer fold picks its alpha by
    leave-one-fold-out validation over its training folds; a single-point
    grid (or an empty one, falling back to solver_cfg.alpha) skips the
    inner loop.  The overall best_alpha is the most frequently selected
    one, ties to the smaller value.
    """
    grid = tuple(sorted(eval_cfg.alpha_grid)) if eval_cfg.alpha_grid else ()
    d = eval_cfg.d if eval_cfg.d is not None else solver_cfg.d
    ctx = _make_context(db, eval_cfg.k, d, solver_cfg.energy_fraction)
    assignment = stratified_folds(ctx.labels, eval_cfg.folds, eval_cfg.seed)
    folds = int(assignment.max()) + 1

    def run_fold(fold: int) -> tuple[float, float]:
        test_idx = np.flatnonzero(assignment == fold)
        train_idx = np.flatnonzero(assignment != fold)
        if len(grid) > 1:
            inner_folds = [g for g in range(folds) if g != fold]
            means = []
            for alpha in grid:
                accs = []
                for g in inner_folds:
                    val_idx = np.flatnonzero(assignment == g)
                    fit_idx = np.flatnonzero((assignment != fold) & (assignment != g))
                    accs.append(_fit_and_score(ctx, fit_idx, val_idx, alpha))
                means.append(float(np.mean(accs)))
            alpha_f = grid[int(np.argmax(means))]  # argmax keeps the smaller alpha on ties
        elif len(grid) == 1:
            alpha_f = grid[0]
        else:
            alpha_f = solver_cfg.alpha
        return _fit_and_score(ctx, train_idx, test_idx, alpha_f), alpha_f

    results = _parallel_map(run_fold, range(folds), threads)
    accuracies = tuple(acc for acc, _ in results)
    alphas = tuple(alpha for _, alpha in results)
    counts: dict[float, int] = {}
    for alpha in alphas:
        counts[alpha] = counts.get(alpha, 0) + 1
    best_alpha = min(counts, key=lambda a: (-counts[a], a))
    mean = float(np.mean(accuracies))
    sd = float(np.std(accuracies, ddof=1)) if len(accuracies) > 1 else 0.0
    return EvalReport(
        fold_accuracies=accuracies,
        mean_accuracy=mean,
        sd_accuracy=sd,
        fold_alphas=alphas,
        best_alpha=best_alpha,
    )


# ---------------------------------------------------------------------------
# node-ranking AUC


def ranking_auc(scores, gt_nodes) -> tuple[float, list[tuple[float, float]]]:
    """Mann-Whitney AUC (ties count one half) of a node score vector against
    a positive set, plus the ROC polyline from (0,0) to (1,1)."""
    scores = np.asarray(scores, dtype=np.float64)
    n = scores.shape[0]
    positive = np.zeros(n, dtype=bool)
    for p in gt_nodes:
        if not 0 <= int(p) < n:
            raise DegenerateGroundTruth(f"ground-truth ordinal {p} out of range")
        positive[int(p)] = True
    n_pos = int(positive.sum())
    n_neg = n - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DegenerateGroundTruth(
            f"need 0 < |ground truth| < n, got {n_pos} of {n}"
        )
    ranks = rankdata(scores)
    auc = float((ranks[positive].sum() - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg))

    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    cum_tp = np.cumsum(positive[order])
    cum_fp = np.cumsum(~positive[order])
    ends = np.flatnonzero(np.diff(sorted_scores) != 0.0)
    ends = np.append(ends, n - 1)
    roc = [(0.0, 0.0)]
    roc.extend((float(cum_fp[e] / n_neg), float(cum_tp[e] / n_pos)) for e in ends)
    return auc, roc


def evaluate_dataset(
    db: NetworkDatabase,
    eval_cfg: EvalConfig,
    solver_cfg: SolverConfig,
    gt_nodes=None,
    threads: int = 1,
) -> EvalReport:
    """run_cv plus, when ground truth is supplied, the node-ranking AUC of a
    full-database model fitted at the selected alpha."""
    report = run_cv(db, eval_cfg, solver_cfg, threads=threads)
    if gt_nodes is None:
        return report
    model = fit_model(
        db,
        k=eval_cfg.k,
        alpha=report.best_alpha,
        energy_fraction=solver_cfg.energy_fraction,
        d=eval_cfg.d if eval_cfg.d is not None else solver_cfg.d,
    )
    auc, roc = ranking_auc(score_nodes(model.u_matrix), gt_nodes)
    return replace(report, auc=auc, roc=tuple(roc))


@dataclass(frozen=True)
class SweepRow:
    alpha: float
    mean_accuracy: float
    sd_accuracy: float
    auc: float | None


def sweep_alpha(
    db: NetworkDatabase,
    eval_cfg: EvalConfig,
    solver_cfg: SolverConfig,
    gt_nodes=None,
    threads: int = 1,
) -> list[SweepRow]:
    """Fixed-alpha cross validation for every grid point, with the AUC of a
    full-database model at that alpha when ground truth is available."""
    grid = tuple(sorted(eval_cfg.alpha_grid)) if eval_cfg.alpha_grid else (solver_cfg.alpha,)

    def run_point(alpha: float) -> SweepRow:
        point_cfg = replace(eval_cfg, alpha_grid=(alpha,))
        report = run_cv(db, point_cfg, solver_cfg)
        auc = None
        if gt_nodes is not None:
            model = fit_model(
                db,
                k=eval_cfg.k,
                alpha=alpha,
                energy_fraction=solver_cfg.energy_fraction,
                d=eval_cfg.d if eval_cfg.d is not None else solver_cfg.d,
            )
            auc, _ = ranking_auc(score_nodes(model.u_matrix), gt_nodes)
        return SweepRow(
            alpha=alpha,
            mean_accuracy=report.mean_accuracy,
            sd_accuracy=report.sd_accuracy,
            auc=auc,
        )

    return _parallel_map(run_point, grid, threads)


# ---------------------------------------------------------------------------
# report files


def write_eval_report(report: EvalReport, out_dir) -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    payload = {
        "fold_accuracies": list(report.fold_accuracies),
        "mean_accuracy": report.mean_accuracy,
        "sd_accuracy": report.sd_accuracy,
        "fold_alphas": list(report.fold_alphas),
        "best_alpha": report.best_alpha,
        "auc": report.auc,
    }
    with open(out_dir / "report.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(out_dir / "fold_accuracies.tsv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write("fold\taccuracy\tselected_alpha\n")
        for fold, (acc, alpha) in enumerate(
            zip(report.fold_accuracies, report.fold_alphas)
        ):
            fh.write(f"{fold}\t{acc!r}\t{alpha!r}\n")
    if report.roc is not None:
        with open(out_dir / "roc.tsv", "w", encoding="utf-8", newline="\n") as fh:
            fh.write("fpr\ttpr\n")
            for fpr, tpr in report.roc:
                fh.write(f"{fpr!r}\t{tpr!r}\n")


def write_sweep(rows: list[SweepRow], path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("alpha\tmean_accuracy\tsd_accuracy\tauc\n")
        for row in rows:
            auc = "" if row.auc is None else repr(row.auc)
            fh.write(f"{row.alpha!r}\t{row.mean_accuracy!r}\t{row.sd_accuracy!r}\t{auc}\n")
