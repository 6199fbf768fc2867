"""Temporal interaction graphs: ingestion, reindexing, features, statistics.

The central object is :class:`TemporalGraph`, an immutable stream of
timestamped ``source -> destination`` interactions held as column arrays and
sorted chronologically (stable in the original row order for tied
timestamps).  Raw datasets enter through :func:`load_dataset`, get their node
ids compacted with :func:`reindex`, and are then described by
:func:`compute_stats` / :func:`temporal_histogram`.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np
import pandas as pd

from .errors import DatasetFormatError, EmptyGraphError, SharedNodeIdWarning

DEFAULT_FEATURE_DIM = 172

HETEROGENEOUS = "heterogeneous"
HOMOGENEOUS = "homogeneous"


@dataclass(frozen=True)
class Interaction:
    """A single event ``(src, dst, timestamp, edge_features, state_label)``.

    ``edge_index`` is the position of the event in the chronologically sorted
    stream it came from.
    """

    src: int
    dst: int
    timestamp: float
    edge_features: np.ndarray
    state_label: int
    edge_index: int


class TemporalGraph:
    """An ordered stream of interactions stored as column arrays.

    The constructor stable-sorts rows by timestamp, so ties keep their input
    order and ``edge_index`` equals the row position after sorting.  Node
    counts are derived from the endpoints actually present in the stream.
    """

    def __init__(self, src, dst, timestamps, labels=None, edge_features=None,
                 bipartite=False):
        src = np.asarray(src, dtype=np.int64)
        dst = np.asarray(dst, dtype=np.int64)
        timestamps = np.asarray(timestamps, dtype=np.float64)
        n = len(src)
        if len(dst) != n or len(timestamps) != n:
            raise DatasetFormatError("src, dst and timestamps must have equal length")
        if labels is None:
            labels = np.zeros(n, dtype=np.int64)
        else:
            labels = np.asarray(labels, dtype=np.int64)
            if len(labels) != n:
                raise DatasetFormatError("labels length does not match edges")
        if edge_features is None:
            edge_features = np.zeros((n, 0), dtype=np.float64)
        else:
            edge_features = np.asarray(edge_features, dtype=np.float64)
            if edge_features.ndim != 2 or len(edge_features) != n:
                raise DatasetFormatError("edge_features must be a (n_edges, d_e) matrix")
            if n and not np.all(np.isfinite(edge_features)):
                raise DatasetFormatError("edge features must be finite")
        if n:
            if np.any(src < 0) or np.any(dst < 0):
                raise DatasetFormatError("node ids must be non-negative integers")
            if np.any(~np.isfinite(timestamps)) or np.any(timestamps < 0):
                raise DatasetFormatError("timestamps must be finite and non-negative")
            if np.any(labels < 0):
                raise DatasetFormatError("state labels must be non-negative integers")

        order = np.argsort(timestamps, kind="stable")
        self.src = np.ascontiguousarray(src[order])
        self.dst = np.ascontiguousarray(dst[order])
        self.timestamps = np.ascontiguousarray(timestamps[order])
        self.labels = np.ascontiguousarray(labels[order])
        self.edge_features = np.ascontiguousarray(edge_features[order])
        self.bipartite = bool(bipartite)

        self._src_ids = np.unique(self.src)
        self._dst_ids = np.unique(self.dst)

    # -- derived sizes ----------------------------------------------------

    @property
    def n_edges(self) -> int:
        return len(self.src)

    @property
    def n_src_distinct(self) -> int:
        return len(self._src_ids)

    @property
    def n_dst_distinct(self) -> int:
        return len(self._dst_ids)

    @property
    def n_nodes(self) -> int:
        """Number of distinct node ids observed as an endpoint."""
        return len(np.union1d(self._src_ids, self._dst_ids))

    @property
    def d_e(self) -> int:
        return self.edge_features.shape[1]

    def interaction(self, edge_index: int) -> Interaction:
        i = int(edge_index)
        if not 0 <= i < self.n_edges:
            raise IndexError(f"edge_index {i} out of range [0, {self.n_edges})")
        return Interaction(int(self.src[i]), int(self.dst[i]),
                           float(self.timestamps[i]), self.edge_features[i],
                           int(self.labels[i]), i)

    def __len__(self) -> int:
        return self.n_edges

    def __iter__(self):
        return (self.interaction(i) for i in range(self.n_edges))

    def __repr__(self):
        kind = "bipartite" if self.bipartite else "homogeneous"
        return (f"TemporalGraph({kind}, n_nodes={self.n_nodes}, "
                f"n_edges={self.n_edges}, d_e={self.d_e})")


@dataclass(frozen=True)
class NodeIndexMap:
    """Bijection from original node ids onto a contiguous 1-based range.

    For ``kind="heterogeneous"`` sources and destinations live in separate
    namespaces: sources map onto ``1..n_users`` and destinations onto
    ``n_users+1..n_users+n_items``, and the same raw id may legitimately
    appear in both maps.  For ``kind="homogeneous"`` both maps are the same
    dictionary.
    """

    kind: str
    user_map: dict
    item_map: dict
    n_users: int
    n_items: int

    @property
    def n_nodes(self) -> int:
        return self.n_users + self.n_items if self.kind == HETEROGENEOUS \
            else len(self.user_map)

    def inverse(self):
        """Return (user, item) inverse dictionaries, contiguous id -> raw id."""
        return ({v: k for k, v in self.user_map.items()},
                {v: k for k, v in self.item_map.items()})

    def to_json(self) -> dict:
        return {"kind": self.kind,
                "n_users": self.n_users,
                "n_items": self.n_items,
                "user_map": {str(k): v for k, v in self.user_map.items()},
                "item_map": {str(k): v for k, v in self.item_map.items()}}

    @classmethod
    def from_json(cls, obj: dict) -> "NodeIndexMap":
        user_map = {int(k): int(v) for k, v in obj["user_map"].items()}
        if obj["kind"] == HOMOGENEOUS:
            item_map = user_map
        else:
            item_map = {int(k): int(v) for k, v in obj["item_map"].items()}
        return cls(obj["kind"], user_map, item_map,
                   int(obj["n_users"]), int(obj["n_items"]))


@dataclass(frozen=True)
class DatasetStats:
    n_nodes: int
    n_edges: int
    avg_degree: float
    edge_density: float
    time_min: float
    time_max: float

    def to_json(self) -> dict:
        return {"n_nodes": self.n_nodes, "n_edges": self.n_edges,
                "avg_degree": self.avg_degree, "edge_density": self.edge_density,
                "time_min": self.time_min, "time_max": self.time_max}


@dataclass(frozen=True)
class Histogram:
    """Equal-width temporal histogram; the last bin is closed on the right."""

    bin_edges: np.ndarray
    counts: np.ndarray

    def to_csv(self) -> str:
        lines = ["bin_start,bin_end,count"]
        for i, c in enumerate(self.counts):
            lines.append(f"{float(self.bin_edges[i])!r},"
                         f"{float(self.bin_edges[i + 1])!r},{int(c)}")
        return "\n".join(lines) + "\n"


class FeatureMatrix:
    """A dense float feature table with one row per entity."""

    def __init__(self, values):
        values = np.asarray(values, dtype=np.float64)
        if values.ndim != 2:
            raise DatasetFormatError("feature matrix must be 2-dimensional")
        if values.size and not np.all(np.isfinite(values)):
            raise DatasetFormatError("feature matrix must be finite")
        self.values = values

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]


def _first_appearance(ids: np.ndarray) -> np.ndarray:
    """Distinct values of `ids` ordered by first occurrence."""
    _, first = np.unique(ids, return_index=True)
    return ids[np.sort(first)]


def load_dataset(path, format="jodie-csv", bipartite=False, columns=None):
    """Parse a raw interaction file into a :class:`TemporalGraph`.

    The default layout is a header line followed by rows
    ``user_id,item_id,timestamp,state_label,f1,...,fk``; the edge feature
    dimension is inferred from the width of the first row.  ``columns`` may
    remap the four role columns for other sources, as a dict with keys
    ``src``, ``dst``, ``time``, ``label`` giving 0-based column positions
    (all remaining columns are taken as edge features).

    Original node ids are preserved; rows are sorted by (timestamp, row
    order).  Identical input bytes always produce an identical graph.
    """
    if format != "jodie-csv":
        raise DatasetFormatError(f"unknown dataset format: {format!r}")
    roles = {"src": 0, "dst": 1, "time": 2, "label": 3}
    if columns:
        roles.update(columns)

    try:
        df = pd.read_csv(path, header=0, dtype=np.float64)
    except ValueError as exc:
        raise DatasetFormatError(f"malformed row or non-numeric field: {exc}") from exc
    except pd.errors.ParserError as exc:
        raise DatasetFormatError(f"malformed row: {exc}") from exc

    n_cols = df.shape[1]
    for role, col in roles.items():
        if not 0 <= col < n_cols:
            raise DatasetFormatError(
                f"column {col} for {role!r} out of range for {n_cols}-column file")

    data = df.to_numpy(dtype=np.float64)
    # A short row is padded with NaN by the csv reader; surface it (or any
    # empty/unparseable field) with the first offending data line.  Line
    # numbers are 1-based and count the header.
    bad = np.where(~np.isfinite(data).all(axis=1))[0]
    if bad.size:
        raise DatasetFormatError("malformed row with missing or non-numeric fields",
                                 line=int(bad[0]) + 2)

    def integral(col, what):
        vals = data[:, col]
        bad = np.where((vals != np.floor(vals)) | (vals < 0))[0]
        if bad.size:
            raise DatasetFormatError(f"{what} must be a non-negative integer",
                                     line=int(bad[0]) + 2)
        return vals.astype(np.int64)

    src = integral(roles["src"], "node id")
    dst = integral(roles["dst"], "node id")
    labels = integral(roles["label"], "state label")
    ts = data[:, roles["time"]]
    if np.any(ts < 0):
        line = int(np.where(ts < 0)[0][0]) + 2
        raise DatasetFormatError("timestamp must be non-negative", line=line)

    feat_cols = [c for c in range(n_cols) if c not in roles.values()]
    # Edge features are carried at single precision throughout (the on-disk
    # bundle stores float32), so quantise here for an exact roundtrip.
    feats = data[:, feat_cols].astype(np.float32).astype(np.float64)
    return TemporalGraph(src, dst, ts, labels, feats, bipartite=bipartite)


def reindex(graph: TemporalGraph, kind: str = HETEROGENEOUS):
    """Compact node ids onto a contiguous range starting at 1.

    ``heterogeneous`` keeps the two sides of a bipartite graph apart: sources
    take ``1..n_users`` and destinations continue from the largest source id,
    each side ordered by first appearance in the stream.  ``homogeneous``
    assigns ids by first appearance in the concatenated sources-then-
    destinations sequence, so an id used on both sides becomes one node.

    Returns ``(graph, NodeIndexMap)``; the map inverts the rewrite exactly.
    """
    if graph.n_edges == 0:
        raise EmptyGraphError("cannot reindex a graph with no interactions")
    if kind == HETEROGENEOUS:
        if not graph.bipartite:
            raise DatasetFormatError(
                "heterogeneous reindexing requires a bipartite graph")
        users = _first_appearance(graph.src)
        items = _first_appearance(graph.dst)
        shared = np.intersect1d(users, items)
        if shared.size:
            warnings.warn(
                f"{shared.size} raw id(s) appear as both source and destination "
                "and were mapped to distinct nodes; use kind='homogeneous' if "
                "they denote one entity", SharedNodeIdWarning, stacklevel=2)
        user_map = {int(u): i + 1 for i, u in enumerate(users)}
        item_map = {int(v): len(users) + i + 1 for i, v in enumerate(items)}
        index_map = NodeIndexMap(HETEROGENEOUS, user_map, item_map,
                                 len(users), len(items))
    elif kind == HOMOGENEOUS:
        seen = _first_appearance(np.concatenate([graph.src, graph.dst]))
        user_map = {int(u): i + 1 for i, u in enumerate(seen)}
        item_map = user_map
        index_map = NodeIndexMap(HOMOGENEOUS, user_map, item_map, len(seen), 0)
    else:
        raise DatasetFormatError(f"unknown reindex kind: {kind!r}")

    new_src = np.array([user_map[int(u)] for u in graph.src], dtype=np.int64)
    new_dst = np.array([item_map[int(v)] for v in graph.dst], dtype=np.int64)
    out = TemporalGraph(new_src, new_dst, graph.timestamps, graph.labels,
                        graph.edge_features,
                        bipartite=(kind == HETEROGENEOUS))
    return out, index_map


def init_node_features(graph: TemporalGraph, dim: int = DEFAULT_FEATURE_DIM,
                       scheme: str = "zeros") -> FeatureMatrix:
    """Allocate node features for a reindexed graph.

    The matrix has ``n_nodes + 1`` rows so row 0 can serve as padding for
    "no neighbour" slots; node ``k`` owns row ``k``.
    """
    if dim <= 0:
        raise DatasetFormatError("node feature dimension must be positive")
    if scheme != "zeros":
        raise DatasetFormatError(f"unknown node feature scheme: {scheme!r}")
    return FeatureMatrix(np.zeros((graph.n_nodes + 1, dim), dtype=np.float64))


def compute_stats(graph: TemporalGraph) -> DatasetStats:
    """Dataset summary used by tables and the `stats` CLI command.

    ``avg_degree`` is edges per node; ``edge_density`` divides the edge count
    by ``n_src_distinct * n_dst_distinct`` and may exceed 1 when pairs repeat.
    """
    if graph.n_edges == 0:
        raise EmptyGraphError("stats are undefined for an empty graph")
    return DatasetStats(
        n_nodes=graph.n_nodes,
        n_edges=graph.n_edges,
        avg_degree=graph.n_edges / graph.n_nodes,
        edge_density=graph.n_edges / (graph.n_src_distinct * graph.n_dst_distinct),
        time_min=float(graph.timestamps[0]),
        time_max=float(graph.timestamps[-1]),
    )


def temporal_histogram(graph: TemporalGraph, bins: int) -> Histogram:
    """Count interactions in `bins` equal-width intervals over the time span.

    Every bin is half-open ``[start, end)`` except the last, which also
    includes the right edge, so the counts always sum to ``n_edges``.  A
    stream whose timestamps are all equal has a zero-width span; it puts all
    mass in bin 0 and uses unit-width placeholder edges.
    """
    if bins <= 0:
        raise ValueError("bins must be a positive integer")
    if graph.n_edges == 0:
        raise EmptyGraphError("histogram is undefined for an empty graph")
    t0, t1 = float(graph.timestamps[0]), float(graph.timestamps[-1])
    if t0 == t1:
        counts = np.zeros(bins, dtype=np.int64)
        counts[0] = graph.n_edges
        edges = t0 + np.arange(bins + 1, dtype=np.float64)
        return Histogram(edges, counts)
    counts, edges = np.histogram(graph.timestamps, bins=bins, range=(t0, t1))
    return Histogram(edges, counts.astype(np.int64))
