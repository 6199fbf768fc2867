"""tgbench: a benchmark harness for temporal graph learning.

Pipeline: ingest raw interaction logs into :class:`~tgbench.graph.TemporalGraph`
bundles, split them chronologically (with optional inductive node masking),
sample seeded negatives, run reference predictors under a fixed training
protocol, and collect results into a ranked leaderboard.
"""

__version__ = "0.1.0"

from .graph import (DatasetStats, FeatureMatrix, Histogram, Interaction,
                    NodeIndexMap, TemporalGraph, compute_stats,
                    init_node_features, load_dataset, reindex,
                    temporal_histogram)
from .metrics import (BinaryScores, MetricReport, average_precision,
                      average_ranks, roc_auc, weighted_prf)
from .rng import SeededRng
from .sampling import (NegativePool, SampledNegatives, SubgraphSample, density,
                       historical_negatives, inductive_negatives,
                       neighbor_weights, random_negatives, random_subgraph)
from .splits import (LinkPredSplits, NodeClassSplits, SplitBoundaries,
                     UnseenNodeSet, build_link_pred_splits,
                     build_node_class_splits, chronological_boundaries,
                     read_splits, select_unseen_nodes, write_splits)
from .training import (AdamState, AttentionDimConfig, EarlyStopMonitor,
                       bce_loss, validate_attention_dims)

__all__ = [
    "__version__",
    "TemporalGraph", "Interaction", "NodeIndexMap", "DatasetStats",
    "FeatureMatrix", "Histogram", "load_dataset", "reindex",
    "init_node_features", "compute_stats", "temporal_histogram",
    "SplitBoundaries", "UnseenNodeSet", "LinkPredSplits", "NodeClassSplits",
    "chronological_boundaries", "select_unseen_nodes",
    "build_link_pred_splits", "build_node_class_splits", "write_splits",
    "read_splits",
    "SeededRng", "NegativePool", "SampledNegatives", "random_negatives",
    "historical_negatives", "inductive_negatives", "neighbor_weights",
    "random_subgraph", "SubgraphSample", "density",
    "roc_auc", "average_precision", "average_ranks", "weighted_prf",
    "BinaryScores", "MetricReport",
    "bce_loss", "AdamState", "EarlyStopMonitor", "AttentionDimConfig",
    "validate_attention_dims",
]
