"""Small builders shared across the test modules."""

from __future__ import annotations

import numpy as np

from subnetmine.data import NetworkDatabase, NetworkInstance, NodeIndex


def build_db(values, labels, edge_lists, valid=None, node_ids=None) -> NetworkDatabase:
    """Assemble a database from plain arrays.

    values is n x m (column per instance), labels has length m, and
    edge_lists holds one iterable of (p, q) pairs per instance.  Pairs are
    canonicalized (p < q, deduplicated, sorted) the same way the loader
    does it.
    """
    values = np.asarray(values, dtype=np.float64)
    n, m = values.shape
    if valid is None:
        valid = np.ones((n, m), dtype=bool)
    else:
        valid = np.asarray(valid, dtype=bool)
    if node_ids is None:
        node_ids = [f"g{p}" for p in range(n)]
    nodes = tuple(NodeIndex(id=node_ids[p], ordinal=p) for p in range(n))
    instances = tuple(
        NetworkInstance(
            instance_id=f"s{i}",
            valid=valid[:, i].copy(),
            values=np.where(valid[:, i], values[:, i], 0.0),
            global_state=int(labels[i]),
        )
        for i in range(m)
    )
    edges = tuple(
        tuple(sorted({(min(p, q), max(p, q)) for p, q in pairs}))
        for pairs in edge_lists
    )
    return NetworkDatabase(nodes=nodes, instances=instances, instance_edges=edges)


def template_db(rng, n=8, m=16, edge_prob=0.35) -> NetworkDatabase:
    """Two positive class templates, raised by 7 on opposite node halves.

    Every pairwise cosine stays positive (so affinity row sums do too)
    while the class split contributes a second strong singular direction,
    which a two-column model needs.
    """
    labels = np.tile([0, 1], m // 2 + 1)[:m]
    labels = labels[rng.permutation(m)]
    half = n // 2
    templates = 1.0 + rng.random((n, 2))
    templates[:half, 0] += 7.0
    templates[half:, 1] += 7.0
    values = templates[:, labels] + rng.normal(0.0, 0.4, size=(n, m))
    edge_lists = []
    for i in range(m):
        pairs = [
            (p, q)
            for p in range(n)
            for q in range(p + 1, n)
            if rng.random() < edge_prob
        ]
        edge_lists.append(pairs)
    return build_db(values, labels, edge_lists)


def random_db(rng, n=6, m=10, edge_prob=0.4, null_prob=0.15, value_loc=0.0) -> NetworkDatabase:
    """Random balanced two-class database with null nodes and random edges.

    A positive value_loc pushes all values above zero, which keeps every
    pairwise cosine (and hence every affinity row sum) positive.
    """
    values = rng.normal(loc=value_loc, size=(n, m))
    labels = np.zeros(m, dtype=int)
    labels[m // 2 :] = 1
    labels = labels[rng.permutation(m)]
    valid = rng.random((n, m)) > null_prob
    valid[int(rng.integers(n)), :] = True  # at least one node valid everywhere
    edge_lists = []
    for i in range(m):
        pairs = []
        for p in range(n):
            for q in range(p + 1, n):
                if valid[p, i] and valid[q, i] and rng.random() < edge_prob:
                    pairs.append((p, q))
        edge_lists.append(pairs)
    return build_db(values, labels, edge_lists, valid=valid)
