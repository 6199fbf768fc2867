"""Seeded negative edge sampling, temporal walk weights, subgraph probes.

Negative candidates for link prediction come in three flavours: ``random``
corrupts the destination uniformly, ``historical`` replays pairs that were
seen during training, and ``inductive`` draws pairs that exist in the full
stream but never appeared in training.  Every sampler is driven by a
:class:`~tgbench.rng.SeededRng`, so a (seed, pool, positives) triple always
yields the same batch.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SamplingError, WeightOverflowError
from .graph import TemporalGraph
from .rng import SeededRng

HISTORICAL_REDRAW_LIMIT = 20
_EXP_OVERFLOW = 709.0  # |x| above this makes exp(x) overflow or vanish in float64


def _pair_codes(src, dst, base):
    return src.astype(np.int64) * base + dst.astype(np.int64)


class NegativePool:
    """Candidate material for one sampler kind.

    ``dst_pool`` always holds the destinations used for random corruption
    (item ids on bipartite graphs, every observed node id otherwise); the
    pair-based kinds additionally carry their distinct (src, dst) pairs.
    """

    def __init__(self, kind, dst_pool, pairs=None, pair_base=None):
        if kind not in ("random", "historical", "inductive"):
            raise SamplingError(f"unknown negative sampler kind: {kind!r}")
        self.kind = kind
        self.dst_pool = np.asarray(dst_pool, dtype=np.int64)
        if self.dst_pool.size == 0:
            raise SamplingError("destination pool is empty")
        self.pairs = None if pairs is None else np.asarray(pairs, dtype=np.int64)
        self.pair_base = pair_base

    # -- constructors -------------------------------------------------------

    @staticmethod
    def _dst_pool(graph: TemporalGraph) -> np.ndarray:
        if graph.bipartite:
            return np.unique(graph.dst)
        return np.union1d(np.unique(graph.src), np.unique(graph.dst))

    @classmethod
    def random_for(cls, graph: TemporalGraph) -> "NegativePool":
        return cls("random", cls._dst_pool(graph))

    @classmethod
    def historical_for(cls, graph: TemporalGraph, train_edges) -> "NegativePool":
        """Pool of distinct (src, dst) pairs observed in the training span."""
        train_edges = np.asarray(train_edges, dtype=np.int64)
        base = int(max(graph.src.max(initial=0), graph.dst.max(initial=0))) + 1
        codes = np.unique(_pair_codes(graph.src[train_edges],
                                      graph.dst[train_edges], base))
        pairs = np.stack([codes // base, codes % base], axis=1)
        return cls("historical", cls._dst_pool(graph), pairs, base)

    @classmethod
    def inductive_for(cls, graph: TemporalGraph, train_edges) -> "NegativePool":
        """Pool of distinct pairs present in the stream but absent from training."""
        train_edges = np.asarray(train_edges, dtype=np.int64)
        base = int(max(graph.src.max(initial=0), graph.dst.max(initial=0))) + 1
        all_codes = np.unique(_pair_codes(graph.src, graph.dst, base))
        train_codes = np.unique(_pair_codes(graph.src[train_edges],
                                            graph.dst[train_edges], base))
        codes = np.setdiff1d(all_codes, train_codes, assume_unique=True)
        pairs = np.stack([codes // base, codes % base], axis=1)
        return cls("inductive", cls._dst_pool(graph), pairs, base)


@dataclass(frozen=True)
class SampledNegatives:
    """One negative per positive, plus how many fell back to random draws."""

    src: np.ndarray
    dst: np.ndarray
    timestamps: np.ndarray
    fallbacks: int = 0

    def __len__(self):
        return len(self.src)


def random_negatives(src, dst, timestamps, pool: NegativePool,
                     rng: SeededRng) -> SampledNegatives:
    """Corrupt each positive's destination with a uniform draw from the pool.

    Source and timestamp are kept; collisions with real edges are not
    rejected, matching the usual random evaluation protocol.
    """
    src = np.asarray(src, dtype=np.int64)
    timestamps = np.asarray(timestamps, dtype=np.float64)
    if len(src) == 0:
        raise SamplingError("cannot sample negatives for an empty batch")
    picks = rng.integers(0, len(pool.dst_pool), size=len(src))
    return SampledNegatives(src.copy(), pool.dst_pool[picks], timestamps.copy())


def _pair_negatives(src, dst, timestamps, pool, rng):
    src = np.asarray(src, dtype=np.int64)
    dst = np.asarray(dst, dtype=np.int64)
    timestamps = np.asarray(timestamps, dtype=np.float64)
    n = len(src)
    if n == 0:
        raise SamplingError("cannot sample negatives for an empty batch")

    if pool.pairs is None or len(pool.pairs) == 0:
        fallback = random_negatives(src, dst, timestamps, pool, rng)
        return SampledNegatives(fallback.src, fallback.dst, fallback.timestamps,
                                fallbacks=n)

    batch_codes = np.unique(_pair_codes(src, dst, pool.pair_base))
    out_src = np.empty(n, dtype=np.int64)
    out_dst = np.empty(n, dtype=np.int64)
    pending = np.arange(n)
    for _ in range(HISTORICAL_REDRAW_LIMIT):
        picks = rng.integers(0, len(pool.pairs), size=len(pending))
        cand = pool.pairs[picks]
        out_src[pending] = cand[:, 0]
        out_dst[pending] = cand[:, 1]
        codes = _pair_codes(cand[:, 0], cand[:, 1], pool.pair_base)
        clash = np.isin(codes, batch_codes)
        pending = pending[clash]
        if len(pending) == 0:
            break

    fallbacks = len(pending)
    if fallbacks:
        repl = random_negatives(src[pending], dst[pending], timestamps[pending],
                                pool, rng)
        out_src[pending] = repl.src
        out_dst[pending] = repl.dst
    return SampledNegatives(out_src, out_dst, timestamps.copy(), fallbacks=fallbacks)


def historical_negatives(src, dst, timestamps, pool: NegativePool,
                         rng: SeededRng) -> SampledNegatives:
    """Draw negatives uniformly from pairs seen during training.

    A drawn pair equal to any positive pair of the current batch is re-drawn
    (at most 20 rounds); leftovers fall back to random destination
    corruption, and the number of fallbacks is reported on the result.
    Timestamps are copied from the aligned positives.
    """
    if pool.kind != "historical":
        raise SamplingError(f"pool kind {pool.kind!r} is not 'historical'")
    return _pair_negatives(src, dst, timestamps, pool, rng)


def inductive_negatives(src, dst, timestamps, pool: NegativePool,
                        rng: SeededRng) -> SampledNegatives:
    """Like historical sampling, but from pairs never observed in training."""
    if pool.kind != "inductive":
        raise SamplingError(f"pool kind {pool.kind!r} is not 'inductive'")
    return _pair_negatives(src, dst, timestamps, pool, rng)


def sampler_for(kind: str):
    try:
        return {"random": random_negatives,
                "historical": historical_negatives,
                "inductive": inductive_negatives}[kind]
    except KeyError:
        raise SamplingError(f"unknown negative sampler kind: {kind!r}") from None


# -- temporal walk weights ---------------------------------------------------

def neighbor_weights(deltas, alpha: float, mode: str = "exponential") -> np.ndarray:
    """Turn time deltas of candidate neighbours into selection probabilities.

    ``exponential`` uses ``w = exp(alpha * delta)`` and refuses inputs whose
    magnitude would overflow or vanish in float64.  ``overflow_safe``
    replaces the exponential with the piecewise form

        W = delta          if delta > 0
        W = 1              if delta == 0
        W = -1 / delta     if delta < 0

    and normalises ``alpha * W`` over the candidates, so the result does not
    depend on ``alpha`` and stays finite for any finite delta.
    """
    deltas = np.asarray(deltas, dtype=np.float64)
    if deltas.size == 0:
        raise SamplingError("need at least one neighbour")
    if not np.all(np.isfinite(deltas)):
        raise SamplingError("time deltas must be finite")
    if not alpha > 0:
        raise SamplingError(f"alpha must be positive, got {alpha}")

    if mode == "exponential":
        scaled = alpha * deltas
        if np.any(np.abs(scaled) > _EXP_OVERFLOW):
            raise WeightOverflowError(
                "alpha * delta exceeds the float64 exponent range; "
                "use mode='overflow_safe'")
        weights = np.exp(scaled)
        total = weights.sum()
        if not np.isfinite(total):
            raise WeightOverflowError(
                "sum of exponential weights overflowed; use mode='overflow_safe'")
    elif mode == "overflow_safe":
        weights = np.where(deltas > 0, deltas,
                           np.where(deltas == 0, 1.0,
                                    -1.0 / np.where(deltas < 0, deltas, 1.0)))
        weights = alpha * weights
        total = weights.sum()
    else:
        raise SamplingError(f"unknown weight mode: {mode!r}")

    probs = weights / total
    return probs


# -- random subgraph probes ---------------------------------------------------

def density(n_edges: int, n_users: int, n_items: int) -> float:
    """Edge density of a (sub)graph: edges over distinct-source × distinct-dst."""
    if n_edges <= 0 or n_users <= 0 or n_items <= 0:
        raise SamplingError("density needs positive edge and node counts")
    return n_edges / (n_users * n_items)


@dataclass(frozen=True)
class SubgraphSample:
    """A uniform edge sample together with its local density."""

    edge_indices: np.ndarray
    n_users: int
    n_items: int

    @property
    def n_edges(self) -> int:
        return len(self.edge_indices)

    @property
    def sigma(self) -> float:
        return density(self.n_edges, self.n_users, self.n_items)


def random_subgraph(graph: TemporalGraph, n_edges: int,
                    rng: SeededRng) -> SubgraphSample:
    """Sample `n_edges` distinct edges uniformly and report the induced density."""
    if n_edges <= 0:
        raise SamplingError("subgraph size must be positive")
    if n_edges > graph.n_edges:
        raise SamplingError(
            f"cannot sample {n_edges} edges from a graph with {graph.n_edges}")
    picked = np.sort(rng.choice_without_replacement(
        np.arange(graph.n_edges, dtype=np.int64), n_edges))
    n_users = len(np.unique(graph.src[picked]))
    n_items = len(np.unique(graph.dst[picked]))
    return SubgraphSample(picked, n_users, n_items)
