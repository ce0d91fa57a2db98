"""Node scoring and discriminative subnetwork extraction.

A node's score is the largest absolute coefficient it receives across the
learned transformation columns.  The top-c nodes are matched back onto the
generalized network and split into connected components, which are the
reported subnetworks.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .data import GeneralizedNetwork
from .errors import CTooLarge


@dataclass(frozen=True)
class SelectionConfig:
    """Number of top-scoring nodes to keep."""

    c: int = 50


@dataclass(frozen=True)
class Component:
    """One connected subnetwork: node ordinals plus induced weighted edges."""

    nodes: tuple[int, ...]
    edges: tuple[tuple[int, int, float], ...]

    @property
    def size(self) -> int:
        return len(self.nodes)


@dataclass(frozen=True)
class SubnetworkReport:
    scores: np.ndarray
    selected: tuple[int, ...]
    components: tuple[Component, ...]


def score_nodes(u_matrix: np.ndarray) -> np.ndarray:
    """score[p] = max over columns of |u[p, column]|."""
    u_matrix = np.asarray(u_matrix, dtype=np.float64)
    if u_matrix.ndim != 2 or u_matrix.shape[1] < 1:
        raise ValueError("u_matrix must be n x d with d >= 1")
    return np.max(np.abs(u_matrix), axis=1)


def select_top_nodes(scores: np.ndarray, c: int) -> list[int]:
    """The c highest-scoring node ordinals, descending; ties keep the lower
    ordinal first."""
    scores = np.asarray(scores, dtype=np.float64)
    n = scores.shape[0]
    if c > n:
        raise CTooLarge(f"c={c} exceeds node count {n}")
    if c < 1:
        raise ValueError(f"c must be positive, got {c}")
    order = np.lexsort((np.arange(n), -scores))
    return [int(p) for p in order[:c]]


def extract_subnetworks(
    selected, g: GeneralizedNetwork, min_edge_weight: float = 0.0
) -> list[Component]:
    """Connected components of the generalized network induced on the
    selected nodes.

    Edges with weight below ``min_edge_weight`` are ignored (default keeps
    everything).  Components are ordered by size descending, then by their
    smallest node ordinal; isolated selected nodes come out as singletons.
    """
    chosen = set(int(p) for p in selected)
    if any(not 0 <= p < g.n for p in chosen):
        raise ValueError("selected node ordinal out of range")
    adjacency: dict[int, list[int]] = {p: [] for p in chosen}
    induced_edges: dict[int, list[tuple[int, int, float]]] = {p: [] for p in chosen}
    for p, q, w in g.edges:
        if p in chosen and q in chosen and w >= min_edge_weight:
            adjacency[p].append(q)
            adjacency[q].append(p)
            induced_edges[p].append((p, q, w))

    components = []
    visited: set[int] = set()
    for start in sorted(chosen):
        if start in visited:
            continue
        stack = [start]
        members = []
        visited.add(start)
        while stack:
            node = stack.pop()
            members.append(node)
            for other in adjacency[node]:
                if other not in visited:
                    visited.add(other)
                    stack.append(other)
        members.sort()
        edges = sorted(e for node in members for e in induced_edges[node])
        components.append(Component(nodes=tuple(members), edges=tuple(edges)))
    components.sort(key=lambda comp: (-comp.size, comp.nodes[0]))
    return components


def build_report(
    u_matrix: np.ndarray,
    g: GeneralizedNetwork,
    c: int,
    min_edge_weight: float = 0.0,
) -> SubnetworkReport:
    scores = score_nodes(u_matrix)
    selected = select_top_nodes(scores, c)
    components = extract_subnetworks(selected, g, min_edge_weight)
    return SubnetworkReport(
        scores=scores, selected=tuple(selected), components=tuple(components)
    )


def write_report(report: SubnetworkReport, node_ids: list[str], out_dir) -> None:
    """Per-node ranking TSV plus a component summary TSV."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    component_of = {}
    for comp_id, comp in enumerate(report.components):
        for node in comp.nodes:
            component_of[node] = comp_id

    with open(out_dir / "report.tsv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write("rank\tnode_id\tscore\tcomponent_id\n")
        for rank, node in enumerate(report.selected, start=1):
            fh.write(
                f"{rank}\t{node_ids[node]}\t{report.scores[node]:.17g}\t{component_of[node]}\n"
            )

    with open(out_dir / "components.tsv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write("component_id\tsize\tedge_count\n")
        for comp_id, comp in enumerate(report.components):
            fh.write(f"{comp_id}\t{comp.size}\t{len(comp.edges)}\n")
