"""Command-line front end for batch use.

Subcommands: generate, fit, transform, select, evaluate, sweep-alpha.
Exit codes: 0 success, 2 usage error (bad flags or invalid configuration),
1 runtime error (bad files, degenerate inputs).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import evaluation, selection, solver, synth
from .data import assemble_state_matrix, build_generalized_network, load_database
from .errors import ConfigInvalid, SubnetmineError, UnknownNode


def _alpha_list(text: str) -> tuple[float, ...]:
    try:
        values = tuple(float(part) for part in text.split(",") if part.strip() != "")
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad alpha list: {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("alpha list is empty")
    return values


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--k", type=int, default=10,
                   help="neighbors per instance (default: %(default)s)")
    p.add_argument("--dim", type=int, default=None,
                   help="subspace dimension (default: number of distinct global states)")
    p.add_argument("--energy", type=float, default=0.95,
                   help="singular-value energy fraction kept (default: %(default)s)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="subnetmine",
        description="Mine discriminative subnetworks from global-state network databases.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic dataset directory")
    p.add_argument("--nodes", type=int, required=True, help="shared node count")
    p.add_argument("--instances", type=int, required=True, help="instance count")
    p.add_argument("--gt", type=int, required=True, help="ground-truth node count")
    p.add_argument("--edges-per-node", type=int, default=20,
                   help="attachment edges per new backbone node (default: %(default)s)")
    p.add_argument("--global-noise", type=float, default=0.10,
                   help="label flip probability (default: %(default)s)")
    p.add_argument("--local-noise", type=float, default=0.30,
                   help="ground-truth value replacement probability (default: %(default)s)")
    p.add_argument("--effect-size", type=float, default=1.5,
                   help="class mean shift on ground-truth nodes (default: %(default)s)")
    p.add_argument("--seed", type=int, default=0, help="seed (default: %(default)s)")
    p.add_argument("--out", required=True, help="output dataset directory")

    p = sub.add_parser("fit", help="fit a spectral model on a dataset")
    p.add_argument("dataset", help="dataset directory")
    _add_solver_flags(p)
    p.add_argument("--alpha", type=float, default=1.0,
                   help="topology constraint weight (default: %(default)s)")
    p.add_argument("--out", required=True, help="model TSV path")

    p = sub.add_parser("transform", help="project instances into model coordinates")
    p.add_argument("dataset", help="dataset directory")
    p.add_argument("--model", required=True, help="model TSV path")
    p.add_argument("--out", required=True, help="embedded coordinates TSV path")

    p = sub.add_parser("select", help="rank nodes and extract connected subnetworks")
    p.add_argument("dataset", help="dataset directory")
    p.add_argument("--model", required=True, help="model TSV path")
    p.add_argument("--top-c", type=int, default=50,
                   help="nodes to keep (default: %(default)s)")
    p.add_argument("--min-edge-weight", type=float, default=0.0,
                   help="keep induced edges with weight >= this (default: %(default)s)")
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("evaluate", help="cross-validated accuracy and node-ranking AUC")
    p.add_argument("dataset", help="dataset directory")
    _add_solver_flags(p)
    p.add_argument("--alpha", type=float, default=None,
                   help="fixed alpha (skips grid search)")
    p.add_argument("--alpha-grid", type=_alpha_list, default=None,
                   help="comma-separated alpha grid (default: 0.1,0.5,1,2,3,4,5,6.5)")
    p.add_argument("--folds", type=int, default=10,
                   help="cross-validation folds (default: %(default)s)")
    p.add_argument("--seed", type=int, default=0,
                   help="fold-shuffle seed (default: %(default)s)")
    p.add_argument("--threads", type=int, default=1,
                   help="parallel fold workers (default: %(default)s)")
    p.add_argument("--ground-truth", default=None,
                   help="ground-truth node TSV (default: dataset's ground_truth.tsv if present)")
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("sweep-alpha", help="fixed-alpha cross validation over a grid")
    p.add_argument("dataset", help="dataset directory")
    _add_solver_flags(p)
    p.add_argument("--alpha-grid", type=_alpha_list, default=None,
                   help="comma-separated alpha grid (default: 0.1,0.5,1,2,3,4,5,6.5)")
    p.add_argument("--folds", type=int, default=10,
                   help="cross-validation folds (default: %(default)s)")
    p.add_argument("--seed", type=int, default=0,
                   help="fold-shuffle seed (default: %(default)s)")
    p.add_argument("--threads", type=int, default=1,
                   help="parallel grid workers (default: %(default)s)")
    p.add_argument("--ground-truth", default=None,
                   help="ground-truth node TSV (default: dataset's ground_truth.tsv if present)")
    p.add_argument("--out", required=True, help="output TSV path")

    return parser


def _gt_ordinals(args, db):
    path = args.ground_truth
    if path is None:
        candidate = Path(args.dataset) / "ground_truth.tsv"
        if not candidate.is_file():
            return None
        path = candidate
    return synth.read_ground_truth(path, db.node_ids)


def _cmd_generate(args) -> int:
    cfg = synth.SynthConfig(
        n=args.nodes,
        m=args.instances,
        n_gt=args.gt,
        edges_per_node=args.edges_per_node,
        global_noise=args.global_noise,
        local_noise=args.local_noise,
        class_mean_shift=args.effect_size,
        seed=args.seed,
    )
    db, gt = synth.generate_dataset(cfg, args.out)
    print(
        f"nodes={db.n} instances={db.m} gt={len(gt.gt_nodes)} "
        f"backbone_edges={len(gt.backbone)}"
    )
    return 0


def _cmd_fit(args) -> int:
    db = load_database(args.dataset)
    model = evaluation.fit_model(
        db, k=args.k, alpha=args.alpha, energy_fraction=args.energy, d=args.dim
    )
    solver.save_model(model, db.node_ids, args.out)
    print(f"model: d={model.d} r={model.basis.r} alpha={model.alpha!r}")
    return 0


def _cmd_transform(args) -> int:
    db = load_database(args.dataset)
    node_ids, u_matrix, _ = solver.load_model(args.model)
    if node_ids != db.node_ids:
        raise UnknownNode("model nodes do not match the dataset")
    embedded = u_matrix.T @ assemble_state_matrix(db).matrix
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    d = embedded.shape[0]
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("instance_id\t" + "\t".join(f"x_{i + 1}" for i in range(d)) + "\n")
        for j, inst in enumerate(db.instances):
            cells = "\t".join("%.17g" % embedded[i, j] for i in range(d))
            fh.write(f"{inst.instance_id}\t{cells}\n")
    print(f"wrote {out}")
    return 0


def _cmd_select(args) -> int:
    db = load_database(args.dataset)
    node_ids, u_matrix, _ = solver.load_model(args.model)
    if node_ids != db.node_ids:
        raise UnknownNode("model nodes do not match the dataset")
    g = build_generalized_network(db)
    report = selection.build_report(
        u_matrix, g, args.top_c, min_edge_weight=args.min_edge_weight
    )
    selection.write_report(report, db.node_ids, args.out)
    sizes = [comp.size for comp in report.components]
    print(f"selected={len(report.selected)} components={len(sizes)} sizes={sizes}")
    return 0


def _eval_configs(args, db):
    if args.alpha is not None and args.alpha_grid is not None:
        raise ConfigInvalid("--alpha conflicts with --alpha-grid")
    if args.alpha is not None:
        grid = (args.alpha,)
    elif args.alpha_grid is not None:
        grid = args.alpha_grid
    else:
        grid = evaluation.DEFAULT_ALPHA_GRID
    eval_cfg = evaluation.EvalConfig(
        folds=args.folds, alpha_grid=grid, k=args.k, d=args.dim, seed=args.seed
    )
    solver_cfg = solver.SolverConfig(
        alpha=grid[0], energy_fraction=args.energy, d=args.dim
    )
    return eval_cfg, solver_cfg


def _cmd_evaluate(args) -> int:
    db = load_database(args.dataset)
    eval_cfg, solver_cfg = _eval_configs(args, db)
    gt = _gt_ordinals(args, db)
    report = evaluation.evaluate_dataset(
        db, eval_cfg, solver_cfg, gt_nodes=gt, threads=args.threads
    )
    evaluation.write_eval_report(report, args.out)
    line = (
        f"accuracy mean={report.mean_accuracy:.4f} sd={report.sd_accuracy:.4f} "
        f"best_alpha={report.best_alpha!r}"
    )
    if report.auc is not None:
        line += f" auc={report.auc:.4f}"
    print(line)
    return 0


def _cmd_sweep_alpha(args) -> int:
    db = load_database(args.dataset)
    args.alpha = None  # sweep has no fixed-alpha flag
    eval_cfg, solver_cfg = _eval_configs(args, db)
    gt = _gt_ordinals(args, db)
    rows = evaluation.sweep_alpha(
        db, eval_cfg, solver_cfg, gt_nodes=gt, threads=args.threads
    )
    evaluation.write_sweep(rows, args.out)
    best = max(rows, key=lambda r: r.mean_accuracy)
    print(f"wrote {args.out}; best alpha={best.alpha!r} mean={best.mean_accuracy:.4f}")
    return 0


_COMMANDS = {
    "generate": _cmd_generate,
    "fit": _cmd_fit,
    "transform": _cmd_transform,
    "select": _cmd_select,
    "evaluate": _cmd_evaluate,
    "sweep-alpha": _cmd_sweep_alpha,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigInvalid as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (SubnetmineError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
