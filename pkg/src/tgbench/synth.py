"""Deterministic synthetic interaction streams for tests and demos.

Every generator is seeded and produces strictly increasing timestamps, so
chronological-split arithmetic on these streams is exact.  Raw node ids
follow the usual convention of 0-based ids per side; pass ``item_offset`` to
keep the two sides numerically disjoint.
"""

from __future__ import annotations

import numpy as np

from .graph import TemporalGraph
from .rng import SeededRng


def _timestamps(n, t0=1.0, dt=1.0):
    return t0 + dt * np.arange(n, dtype=np.float64)


def bipartite_stream(n_users, n_items, n_edges, seed=0, item_offset=0,
                     label_rate=0.0) -> TemporalGraph:
    """Uniform user→item stream in which every user and item appears."""
    if n_edges < max(n_users, n_items):
        raise ValueError("need at least max(n_users, n_items) edges for coverage")
    rng = SeededRng(seed)
    head = max(n_users, n_items)
    src = np.concatenate([np.arange(head) % n_users,
                          rng.integers(0, n_users, size=n_edges - head)])
    dst = np.concatenate([np.arange(head) % n_items,
                          rng.integers(0, n_items, size=n_edges - head)])
    labels = np.zeros(n_edges, dtype=np.int64)
    if label_rate > 0:
        labels = (rng.uniform(size=n_edges) < label_rate).astype(np.int64)
    return TemporalGraph(src, dst + item_offset, _timestamps(n_edges),
                         labels, bipartite=True)


def homogeneous_stream(n_nodes, n_edges, seed=0) -> TemporalGraph:
    """Uniform node→node stream covering all `n_nodes` ids."""
    if n_edges < n_nodes:
        raise ValueError("need at least n_nodes edges for coverage")
    rng = SeededRng(seed)
    src = np.concatenate([np.arange(n_nodes),
                          rng.integers(0, n_nodes, size=n_edges - n_nodes)])
    dst = np.concatenate([(np.arange(n_nodes) + 1) % n_nodes,
                          rng.integers(0, n_nodes, size=n_edges - n_nodes)])
    return TemporalGraph(src, dst, _timestamps(n_edges), bipartite=False)


def replay_stream(n_pairs, n_edges, fresh_every=0, fresh_until=0.6) -> TemporalGraph:
    """Round-robin replay of `n_pairs` fixed (user k, item k) pairs.

    Core pairs recur throughout the stream, so a memorizing scorer that has
    seen one full cycle recognises every later core edge.  With
    ``fresh_every`` > 0, each ``fresh_every``-th position in the first
    ``fresh_until`` fraction of the stream emits a one-off pair between a
    brand-new user and a brand-new item instead; these widen the destination
    pool for negative sampling while the tail of the stream stays core-only.
    """
    if n_edges < n_pairs:
        raise ValueError("need at least n_pairs edges for one full cycle")
    src = np.empty(n_edges, dtype=np.int64)
    dst = np.empty(n_edges, dtype=np.int64)
    fresh_cutoff = int(fresh_until * n_edges)
    core_next = 0
    fresh_next = n_pairs
    for i in range(n_edges):
        if fresh_every and i < fresh_cutoff and i % fresh_every == fresh_every - 1:
            src[i] = dst[i] = fresh_next
            fresh_next += 1
        else:
            src[i] = dst[i] = core_next % n_pairs
            core_next += 1
    return TemporalGraph(src, dst, _timestamps(n_edges), bipartite=True)


def labeled_stream(n_core_pairs, n_edges, seed=0, fresh_rate=0.5,
                   n_classes=2) -> TemporalGraph:
    """Stream whose state label counts how often the pair occurred before.

    A fresh, never-repeated pair is emitted with probability ``fresh_rate``
    (label 0); otherwise the next core pair recurs and its label is the
    number of previous occurrences capped at ``n_classes - 1``.  The label
    is therefore a deterministic function of the pair history, which a
    classifier over recency/recurrence features can recover.
    """
    rng = SeededRng(seed)
    src = np.empty(n_edges, dtype=np.int64)
    dst = np.empty(n_edges, dtype=np.int64)
    labels = np.empty(n_edges, dtype=np.int64)
    fresh = rng.uniform(size=n_edges) < fresh_rate
    core_picks = rng.integers(0, n_core_pairs, size=n_edges)
    pair_seen = {}
    next_fresh = n_core_pairs
    for i in range(n_edges):
        if fresh[i] and i >= n_core_pairs:
            src[i] = dst[i] = next_fresh
            next_fresh += 1
            labels[i] = 0
        else:
            k = int(core_picks[i]) if i >= n_core_pairs else i % n_core_pairs
            src[i] = dst[i] = k
            seen = pair_seen.get(k, 0)
            labels[i] = min(seen, n_classes - 1)
            pair_seen[k] = seen + 1
    return TemporalGraph(src, dst, _timestamps(n_edges), labels, bipartite=True)


def write_raw_csv(graph: TemporalGraph, path, feature_dim=None) -> None:
    """Write a graph as a raw ``user_id,item_id,timestamp,state_label,f...`` file."""
    feats = graph.edge_features
    if feature_dim is not None and feats.shape[1] != feature_dim:
        feats = np.zeros((graph.n_edges, feature_dim))
    header = "user_id,item_id,timestamp,state_label"
    if feats.shape[1]:
        header += "," + ",".join(f"f{i}" for i in range(feats.shape[1]))
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for i in range(graph.n_edges):
            row = [str(graph.src[i]), str(graph.dst[i]),
                   repr(float(graph.timestamps[i])), str(graph.labels[i])]
            row.extend(repr(float(v)) for v in feats[i])
            fh.write(",".join(row) + "\n")
