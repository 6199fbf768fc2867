"""Chronological train/val/test splitting with optional inductive masking.

Boundaries are empirical quantiles of the timestamp multiset (linear
interpolation at index ``q * (n - 1)``, i.e. the numpy default), and
membership is decided by comparing each interaction's timestamp against them:
``train`` takes ``t <= t_val``, ``val`` takes ``t_val < t <= t_test`` and
``test`` the rest.  For link prediction a seeded fraction of nodes is hidden
from training to measure inductive generalisation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import SplitError
from .graph import TemporalGraph
from .rng import SeededRng

TRAIN_QUANTILE = 0.70
VAL_QUANTILE = 0.85
UNSEEN_RATIO = 0.10


@dataclass(frozen=True)
class SplitBoundaries:
    """Timestamp thresholds separating train | val | test."""

    t_val: float
    t_test: float
    quantiles: tuple = (TRAIN_QUANTILE, VAL_QUANTILE)

    def __post_init__(self):
        if not self.t_val <= self.t_test:
            raise SplitError("t_val must not exceed t_test")


@dataclass(frozen=True)
class UnseenNodeSet:
    """Nodes masked out of training for the inductive setting."""

    nodes: np.ndarray
    seed: int
    ratio: float

    @classmethod
    def empty(cls) -> "UnseenNodeSet":
        return cls(np.empty(0, dtype=np.int64), seed=0, ratio=0.0)

    def __len__(self):
        return len(self.nodes)


def _partition_array(values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.int64)
    if arr.size and (np.any(np.diff(arr) <= 0)):
        raise SplitError("partition edge indices must be strictly increasing")
    return arr


@dataclass(frozen=True)
class LinkPredSplits:
    """Edge-index partitions for link prediction.

    ``train`` excludes every edge touching an unseen node.  The inductive
    sets are filtered from ``val``/``test``: ``ind_*`` requires at least one
    unseen endpoint, ``no_*`` ("new-old") exactly one, and ``nn_*``
    ("new-new") both, so ``ind = no ∪ nn`` disjointly.
    """

    boundaries: SplitBoundaries
    unseen: UnseenNodeSet
    train: np.ndarray
    val: np.ndarray
    test: np.ndarray
    ind_val: np.ndarray
    ind_test: np.ndarray
    no_val: np.ndarray
    no_test: np.ndarray
    nn_val: np.ndarray
    nn_test: np.ndarray

    def __post_init__(self):
        for name in ("train", "val", "test", "ind_val", "ind_test",
                     "no_val", "no_test", "nn_val", "nn_test"):
            object.__setattr__(self, name, _partition_array(getattr(self, name)))

    def partitions(self) -> dict:
        return {name: getattr(self, name)
                for name in ("train", "val", "test", "ind_val", "ind_test",
                             "no_val", "no_test", "nn_val", "nn_test")}


@dataclass(frozen=True)
class NodeClassSplits:
    """Edge-index partitions for dynamic node classification (no masking)."""

    boundaries: SplitBoundaries
    train: np.ndarray
    val: np.ndarray
    test: np.ndarray

    def __post_init__(self):
        for name in ("train", "val", "test"):
            object.__setattr__(self, name, _partition_array(getattr(self, name)))

    def partitions(self) -> dict:
        return {name: getattr(self, name) for name in ("train", "val", "test")}


def chronological_boundaries(graph: TemporalGraph,
                             q1: float = TRAIN_QUANTILE,
                             q2: float = VAL_QUANTILE) -> SplitBoundaries:
    """Compute the two timestamp thresholds for a (q1, q2) chronological split."""
    if graph.n_edges < 3:
        raise SplitError("need at least 3 interactions to split")
    if not (0.0 < q1 < q2 < 1.0):
        raise SplitError(f"quantiles must satisfy 0 < q1 < q2 < 1, got ({q1}, {q2})")
    t_val, t_test = np.quantile(graph.timestamps, [q1, q2])
    return SplitBoundaries(float(t_val), float(t_test), quantiles=(q1, q2))


def _span_masks(graph, boundaries):
    ts = graph.timestamps
    train = ts <= boundaries.t_val
    val = (ts > boundaries.t_val) & (ts <= boundaries.t_test)
    test = ts > boundaries.t_test
    return train, val, test


def select_unseen_nodes(graph: TemporalGraph, boundaries: SplitBoundaries,
                        seed: int, ratio: float = UNSEEN_RATIO) -> UnseenNodeSet:
    """Uniformly pick ``floor(ratio * n_nodes)`` nodes to hide from training.

    Candidates are the nodes that appear in the validation or test span; the
    draw is without replacement and fully determined by ``seed``.  A ratio
    that floors to zero disables masking.
    """
    if not 0.0 <= ratio < 1.0:
        raise SplitError(f"unseen ratio must lie in [0, 1), got {ratio}")
    target = int(np.floor(ratio * graph.n_nodes))
    if target == 0:
        return UnseenNodeSet.empty()
    _, val_mask, test_mask = _span_masks(graph, boundaries)
    later = val_mask | test_mask
    pool = np.union1d(graph.src[later], graph.dst[later])
    if target > len(pool):
        raise SplitError(
            f"cannot mask {target} nodes: only {len(pool)} appear after t_val")
    rng = SeededRng(seed)
    chosen = np.sort(rng.choice_without_replacement(pool, target))
    return UnseenNodeSet(chosen.astype(np.int64), seed=int(seed), ratio=float(ratio))


def build_link_pred_splits(graph: TemporalGraph, boundaries: SplitBoundaries,
                           unseen: UnseenNodeSet) -> LinkPredSplits:
    """Partition edge indices for link prediction under inductive masking."""
    train_span, val_mask, test_mask = _span_masks(graph, boundaries)
    src_unseen = np.isin(graph.src, unseen.nodes)
    dst_unseen = np.isin(graph.dst, unseen.nodes)
    touching = src_unseen | dst_unseen
    both = src_unseen & dst_unseen
    exactly_one = touching & ~both

    def idx(mask):
        return np.where(mask)[0].astype(np.int64)

    return LinkPredSplits(
        boundaries=boundaries,
        unseen=unseen,
        train=idx(train_span & ~touching),
        val=idx(val_mask),
        test=idx(test_mask),
        ind_val=idx(val_mask & touching),
        ind_test=idx(test_mask & touching),
        no_val=idx(val_mask & exactly_one),
        no_test=idx(test_mask & exactly_one),
        nn_val=idx(val_mask & both),
        nn_test=idx(test_mask & both),
    )


def build_node_class_splits(graph: TemporalGraph,
                            boundaries: SplitBoundaries) -> NodeClassSplits:
    """Partition edge indices chronologically for node classification."""
    train_mask, val_mask, test_mask = _span_masks(graph, boundaries)
    return NodeClassSplits(
        boundaries=boundaries,
        train=np.where(train_mask)[0].astype(np.int64),
        val=np.where(val_mask)[0].astype(np.int64),
        test=np.where(test_mask)[0].astype(np.int64),
    )


# -- serialization ---------------------------------------------------------

def splits_to_json(splits) -> dict:
    if isinstance(splits, LinkPredSplits):
        obj = {
            "task": "lp",
            "quantiles": list(splits.boundaries.quantiles),
            "t_val": splits.boundaries.t_val,
            "t_test": splits.boundaries.t_test,
            "mask_seed": splits.unseen.seed,
            "unseen_ratio": splits.unseen.ratio,
            "unseen_nodes": [int(v) for v in splits.unseen.nodes],
        }
    elif isinstance(splits, NodeClassSplits):
        obj = {
            "task": "nc",
            "quantiles": list(splits.boundaries.quantiles),
            "t_val": splits.boundaries.t_val,
            "t_test": splits.boundaries.t_test,
        }
    else:
        raise SplitError(f"cannot serialize object of type {type(splits).__name__}")
    obj["partitions"] = {name: [int(i) for i in arr]
                         for name, arr in splits.partitions().items()}
    return obj


def splits_from_json(obj: dict):
    bounds = SplitBoundaries(float(obj["t_val"]), float(obj["t_test"]),
                             quantiles=tuple(obj["quantiles"]))
    parts = {name: np.asarray(vals, dtype=np.int64)
             for name, vals in obj["partitions"].items()}
    if obj["task"] == "lp":
        unseen = UnseenNodeSet(np.asarray(obj["unseen_nodes"], dtype=np.int64),
                               seed=int(obj["mask_seed"]),
                               ratio=float(obj["unseen_ratio"]))
        return LinkPredSplits(boundaries=bounds, unseen=unseen, **parts)
    if obj["task"] == "nc":
        return NodeClassSplits(boundaries=bounds, **parts)
    raise SplitError(f"unknown split task: {obj['task']!r}")


def write_splits(path, splits):
    """Write `<name>.splits.json`; byte-identical for identical inputs."""
    with open(path, "w") as fh:
        json.dump(splits_to_json(splits), fh, sort_keys=True,
                  separators=(",", ":"))
        fh.write("\n")


def read_splits(path):
    with open(path) as fh:
        return splits_from_json(json.load(fh))
