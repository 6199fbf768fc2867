"""Processed dataset bundles: edge list CSV, binary feature matrices, metadata.

A bundle for dataset ``name`` consists of:

* ``<name>.edges.csv`` — header ``src,dst,timestamp,label,edge_index``
* ``<name>.edgefeat.f32`` / ``<name>.nodefeat.f32`` — row-major float32
  little-endian matrices with an 8-byte header of two little-endian uint32
  counts (rows, cols)
* ``<name>.meta.json`` — sizes, bipartiteness, dimensions and a pointer to
  the node-id map file (``<name>.nodemap.json``)

Writing then reading a bundle reproduces the graph and features exactly.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np
import pandas as pd

from .errors import DatasetFormatError
from .graph import FeatureMatrix, NodeIndexMap, TemporalGraph

_HEADER_DTYPE = np.dtype("<u4")
_VALUE_DTYPE = np.dtype("<f4")


def write_feature_matrix(path, matrix: FeatureMatrix) -> None:
    values = matrix.values.astype(_VALUE_DTYPE)
    with open(path, "wb") as fh:
        fh.write(np.asarray(values.shape, dtype=_HEADER_DTYPE).tobytes())
        fh.write(np.ascontiguousarray(values).tobytes())


def read_feature_matrix(path) -> FeatureMatrix:
    with open(path, "rb") as fh:
        header = fh.read(8)
        if len(header) != 8:
            raise DatasetFormatError(f"{path}: truncated feature header")
        rows, cols = np.frombuffer(header, dtype=_HEADER_DTYPE)
        data = fh.read()
    expected = int(rows) * int(cols) * _VALUE_DTYPE.itemsize
    if len(data) != expected:
        raise DatasetFormatError(
            f"{path}: expected {expected} payload bytes, found {len(data)}")
    values = np.frombuffer(data, dtype=_VALUE_DTYPE).reshape(int(rows), int(cols))
    return FeatureMatrix(values.astype(np.float64))


@dataclass
class Bundle:
    name: str
    graph: TemporalGraph
    node_features: FeatureMatrix
    index_map: NodeIndexMap
    meta: dict


def _paths(directory, name):
    join = lambda suffix: os.path.join(directory, f"{name}.{suffix}")
    return {"edges": join("edges.csv"), "edgefeat": join("edgefeat.f32"),
            "nodefeat": join("nodefeat.f32"), "meta": join("meta.json"),
            "nodemap": join("nodemap.json")}


def write_bundle(directory, name, graph: TemporalGraph,
                 node_features: FeatureMatrix, index_map: NodeIndexMap) -> dict:
    """Write all bundle files for `name` into `directory`; returns the paths."""
    os.makedirs(directory, exist_ok=True)
    paths = _paths(directory, name)

    frame = pd.DataFrame({"src": graph.src, "dst": graph.dst,
                          "timestamp": graph.timestamps, "label": graph.labels,
                          "edge_index": np.arange(graph.n_edges, dtype=np.int64)})
    frame.to_csv(paths["edges"], index=False)

    write_feature_matrix(paths["edgefeat"], FeatureMatrix(graph.edge_features))
    write_feature_matrix(paths["nodefeat"], node_features)

    with open(paths["nodemap"], "w") as fh:
        json.dump(index_map.to_json(), fh, sort_keys=True, separators=(",", ":"))

    meta = {"name": name, "n_nodes": graph.n_nodes, "n_edges": graph.n_edges,
            "n_users": index_map.n_users, "n_items": index_map.n_items,
            "bipartite": graph.bipartite, "kind": index_map.kind,
            "d_e": graph.d_e, "node_feature_dim": node_features.dim,
            "node_map_file": os.path.basename(paths["nodemap"])}
    with open(paths["meta"], "w") as fh:
        json.dump(meta, fh, sort_keys=True, indent=2)
        fh.write("\n")
    return paths


def read_bundle(directory, name) -> Bundle:
    paths = _paths(directory, name)
    for role in ("edges", "edgefeat", "nodefeat", "meta", "nodemap"):
        if not os.path.exists(paths[role]):
            raise DatasetFormatError(f"bundle file missing: {paths[role]}")

    with open(paths["meta"]) as fh:
        meta = json.load(fh)
    with open(paths["nodemap"]) as fh:
        index_map = NodeIndexMap.from_json(json.load(fh))

    frame = pd.read_csv(paths["edges"])
    expected_cols = ["src", "dst", "timestamp", "label", "edge_index"]
    if list(frame.columns) != expected_cols:
        raise DatasetFormatError(
            f"{paths['edges']}: expected columns {expected_cols}")
    if not np.array_equal(frame["edge_index"].to_numpy(),
                          np.arange(len(frame))):
        raise DatasetFormatError(
            f"{paths['edges']}: edge_index must be 0..n_edges-1 in order")

    edge_features = read_feature_matrix(paths["edgefeat"])
    if edge_features.n_rows != len(frame):
        raise DatasetFormatError("edge feature rows do not match edge count")
    node_features = read_feature_matrix(paths["nodefeat"])

    graph = TemporalGraph(frame["src"].to_numpy(), frame["dst"].to_numpy(),
                          frame["timestamp"].to_numpy(),
                          frame["label"].to_numpy(), edge_features.values,
                          bipartite=bool(meta["bipartite"]))
    if graph.n_edges != int(meta["n_edges"]):
        raise DatasetFormatError("meta n_edges does not match the edge file")
    return Bundle(name=name, graph=graph, node_features=node_features,
                  index_map=index_map, meta=meta)
