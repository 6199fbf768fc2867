"""Benchmark runs: seeded training/evaluation loops with profiling.

A run repeats the train → validate → test protocol ``repeats`` times with
different initialisation streams, early-stops on the validation metric
(average precision for link prediction, AUC/accuracy for node
classification), restores the best epoch, and reports each metric as
mean ± std together with wall-clock and memory figures.  Every random draw
comes from a seeded counter-based generator, so identical configurations
reproduce identical metrics.
"""

from __future__ import annotations

import resource
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import MetricError, RunTimeoutError, TrainingError
from .graph import TemporalGraph
from .metrics import MetricReport, average_precision, roc_auc, weighted_prf
from .models import create_link_predictor, create_node_classifier
from .rng import SeededRng
from .sampling import NegativePool, random_negatives, sampler_for
from .splits import LinkPredSplits, NodeClassSplits
from .training import AdamState, EarlyStopMonitor

LP_SETTINGS = ("transductive", "inductive", "new_old", "new_new")
DEFAULT_VAL_SEED = 0
DEFAULT_TEST_SEED = 2


@dataclass
class RunConfig:
    """Everything needed to reproduce a run, seeds included."""

    dataset: str
    task: str = "lp"
    model: str = "edgebank"
    setting: str = "all"
    sampler: str = "random"
    mask_seed: int = 0
    val_seed: int = DEFAULT_VAL_SEED
    test_seed: int = DEFAULT_TEST_SEED
    init_seed: int = 0
    batch_size: int = 200
    max_epochs: int = 50
    repeats: int = 3
    lr: float = 1e-4
    patience: int = 3
    tolerance: float = 1e-3
    reseed_val_each_epoch: bool = False
    background_classes: tuple = ()
    exclude_background: bool = True
    timeout_seconds: float = 48 * 3600.0
    model_params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.task not in ("lp", "nc"):
            raise TrainingError(f"unknown task: {self.task!r}")
        if self.task == "nc" and self.setting not in ("transductive", "all"):
            raise TrainingError("node classification is transductive only")
        if self.setting not in LP_SETTINGS + ("all",):
            raise TrainingError(f"unknown setting: {self.setting!r}")
        if self.sampler not in ("random", "historical", "inductive"):
            raise TrainingError(f"unknown sampler: {self.sampler!r}")
        if self.batch_size <= 0 or self.max_epochs <= 0 or self.repeats <= 0:
            raise TrainingError("batch_size, max_epochs and repeats must be positive")
        if self.timeout_seconds <= 0:
            raise TrainingError("timeout must be positive")

    def seeds(self) -> dict:
        return {"mask": self.mask_seed, "val": self.val_seed,
                "test": self.test_seed, "init": self.init_seed}


@dataclass
class RunResult:
    """Aggregated metrics and efficiency figures for one configuration."""

    config: RunConfig
    metrics: dict                 # setting -> metric -> {"mean","std","values"}
    epochs_used: float
    seconds_per_epoch: float
    peak_memory_bytes: int
    inference_seconds_per_100k: float
    fallback_negatives: int = 0

    def metric_values(self) -> dict:
        """The seed-independent part, used by the determinism checks."""
        return {s: None if by_metric is None
                else {m: dict(v) for m, v in by_metric.items()}
                for s, by_metric in self.metrics.items()}


def _peak_memory_bytes() -> int:
    # ru_maxrss is reported in KiB on Linux
    return resource.getrusage(resource.RUSAGE_SELF).ru_maxrss * 1024


class _Deadline:
    def __init__(self, seconds):
        self.t_end = time.perf_counter() + seconds

    def check(self):
        if time.perf_counter() > self.t_end:
            raise RunTimeoutError("run exceeded its wall-clock budget")


def _batches(edge_ids, batch_size):
    for lo in range(0, len(edge_ids), batch_size):
        yield edge_ids[lo:lo + batch_size]


def _edge_arrays(graph, edge_ids):
    return graph.src[edge_ids], graph.dst[edge_ids], graph.timestamps[edge_ids]


def _stream_observe(model, graph, edge_ids, batch_size):
    for batch in _batches(edge_ids, batch_size):
        model.observe(*_edge_arrays(graph, batch))


def _eval_link_batches(model, graph, edge_ids, pool, sampler, rng, batch_size):
    """Score a split with one negative per positive, observing as it goes.

    The model state is snapshotted and restored so evaluating one split never
    leaks observations into the next.  Returns (scores, labels, fallbacks).
    """
    snap = model.snapshot()
    scores, labels = [], []
    fallbacks = 0
    for batch in _batches(edge_ids, batch_size):
        src, dst, ts = _edge_arrays(graph, batch)
        neg = sampler(src, dst, ts, pool, rng)
        fallbacks += neg.fallbacks
        scores.append(model.score_edges(src, dst, ts))
        scores.append(model.score_edges(neg.src, neg.dst, neg.timestamps))
        labels.append(np.ones(len(batch)))
        labels.append(np.zeros(len(batch)))
        model.observe(src, dst, ts)
    model.restore(snap)
    return np.concatenate(scores), np.concatenate(labels), fallbacks


def _train_epoch(model, graph, train_ids, pool, rng, adam, batch_size):
    for batch in _batches(train_ids, batch_size):
        src, dst, ts = _edge_arrays(graph, batch)
        if model.trainable:
            neg = random_negatives(src, dst, ts, pool, rng)
            feats = np.vstack([model.featurize(src, dst, ts),
                               model.featurize(neg.src, neg.dst, neg.timestamps)])
            y = np.concatenate([np.ones(len(batch)), np.zeros(len(batch))])
            _, grads = model.loss_and_grads(feats, y)
            adam.step(model.parameters(), grads)
        model.observe(src, dst, ts)


def _aggregate(per_repeat):
    """per_repeat: list of dicts setting -> metric -> value (None = skipped)."""
    out = {}
    for setting in per_repeat[0]:
        if per_repeat[0][setting] is None:
            out[setting] = None
            continue
        out[setting] = {}
        for metric in per_repeat[0][setting]:
            vals = np.array([r[setting][metric] for r in per_repeat], dtype=np.float64)
            out[setting][metric] = {"mean": float(vals.mean()),
                                    "std": float(vals.std()),
                                    "values": [float(v) for v in vals]}
    return out


def run_link_prediction(graph: TemporalGraph, splits: LinkPredSplits,
                        config: RunConfig) -> RunResult:
    """Train/evaluate one link-prediction configuration.

    Training always corrupts destinations at random; the configured sampler
    kind applies to validation and test scoring.  The best-validation-epoch
    state is evaluated on the transductive, inductive, new-old and new-new
    partitions with the fixed test seed.
    """
    if config.task != "lp":
        raise TrainingError("run_link_prediction requires task='lp'")
    if len(splits.train) == 0 or len(splits.val) == 0 or len(splits.test) == 0:
        raise TrainingError("link prediction needs non-empty train/val/test")
    deadline = _Deadline(config.timeout_seconds)

    train_pool = NegativePool.random_for(graph)
    if config.sampler == "random":
        eval_pool = train_pool
    elif config.sampler == "historical":
        eval_pool = NegativePool.historical_for(graph, splits.train)
    else:
        eval_pool = NegativePool.inductive_for(graph, splits.train)
    sampler = sampler_for(config.sampler)

    test_sets = {"transductive": splits.test, "inductive": splits.ind_test,
                 "new_old": splits.no_test, "new_new": splits.nn_test}

    per_repeat = []
    epoch_seconds, epochs_used = [], []
    fallbacks = 0
    inference_elapsed, inference_edges = 0.0, 0

    for repeat in range(config.repeats):
        model = create_link_predictor(config.model, config.model_params)
        model.prepare_stream(graph.timestamps[splits.train])
        adam = AdamState(model.parameters(), lr=config.lr) if model.trainable else None
        monitor = EarlyStopMonitor(config.patience, config.tolerance)
        init_rng = SeededRng(config.init_seed).spawn(repeat)
        best_snap = None

        for epoch in range(config.max_epochs):
            deadline.check()
            t0 = time.perf_counter()
            model.reset_stream()
            _train_epoch(model, graph, splits.train, train_pool,
                         init_rng.spawn(epoch), adam, config.batch_size)
            epoch_seconds.append(time.perf_counter() - t0)

            val_seed = config.val_seed + epoch if config.reseed_val_each_epoch \
                else config.val_seed
            scores, labels, fb = _eval_link_batches(
                model, graph, splits.val, eval_pool, sampler,
                SeededRng(val_seed), config.batch_size)
            fallbacks += fb
            val_ap = average_precision(scores, labels)
            stop = monitor.update(val_ap)
            if monitor.best_epoch == monitor.epoch:
                best_snap = model.snapshot()
            if stop or not model.trainable:
                break
        epochs_used.append(monitor.epoch + 1)

        model.restore(best_snap)
        _stream_observe(model, graph, splits.val, config.batch_size)

        results = {}
        for setting, edge_ids in test_sets.items():
            deadline.check()
            if len(edge_ids) == 0:
                results[setting] = None
                continue
            scores, labels, fb = _eval_link_batches(
                model, graph, edge_ids, eval_pool, sampler,
                SeededRng(config.test_seed), config.batch_size)
            fallbacks += fb
            results[setting] = {"auc": roc_auc(scores, labels),
                                "ap": average_precision(scores, labels)}
        per_repeat.append(results)

        if repeat == config.repeats - 1:
            # pure scoring pass for the inference-throughput figure
            src, dst, ts = _edge_arrays(graph, splits.test)
            t0 = time.perf_counter()
            model.score_edges(src, dst, ts)
            inference_elapsed = time.perf_counter() - t0
            inference_edges = len(splits.test)

    return RunResult(
        config=config,
        metrics=_aggregate(per_repeat),
        epochs_used=float(np.mean(epochs_used)),
        seconds_per_epoch=float(np.mean(epoch_seconds)),
        peak_memory_bytes=_peak_memory_bytes(),
        inference_seconds_per_100k=inference_elapsed / inference_edges * 1e5,
        fallback_negatives=fallbacks,
    )


def _nc_eval(model, graph, edge_ids, batch_size, binary, background,
             exclude_background):
    """Stream a split, collecting class-1 probabilities and predictions."""
    snap = model.snapshot()
    p1, preds, truth = [], [], []
    for batch in _batches(edge_ids, batch_size):
        src, dst, ts = _edge_arrays(graph, batch)
        logits = model.node_logits(src, dst, ts)
        probs = model.probabilities(logits)
        p1.append(probs[:, 1] if probs.shape[1] > 1 else probs[:, 0])
        preds.append(np.argmax(logits, axis=1))
        truth.append(graph.labels[batch])
        model.observe(src, dst, ts)
    model.restore(snap)
    p1 = np.concatenate(p1)
    preds = np.concatenate(preds)
    truth = np.concatenate(truth)
    if binary and exclude_background and len(background):
        keep = ~np.isin(truth, np.asarray(background))
        p1, preds, truth = p1[keep], preds[keep], truth[keep]
    return p1, preds, truth


def run_node_classification(graph: TemporalGraph, splits: NodeClassSplits,
                            config: RunConfig) -> RunResult:
    """Train/evaluate a node-state classifier on the chronological split.

    Binary label sets are reported as AUC over the class-1 probability
    (optionally ignoring configured background classes); richer label sets
    get accuracy plus support-weighted precision/recall/F1.
    """
    if config.task != "nc":
        raise TrainingError("run_node_classification requires task='nc'")
    if len(splits.train) == 0 or len(splits.val) == 0 or len(splits.test) == 0:
        raise TrainingError("node classification needs non-empty train/val/test")
    deadline = _Deadline(config.timeout_seconds)

    classes = np.unique(graph.labels)
    if len(classes) < 2:
        raise TrainingError("state labels are constant; nothing to classify")
    background = tuple(int(c) for c in config.background_classes)
    effective = [c for c in classes if c not in background] \
        if config.exclude_background else list(classes)
    binary = len(effective) == 2 and set(int(c) for c in effective) <= {0, 1}
    n_classes = int(classes.max()) + 1

    per_repeat = []
    epoch_seconds, epochs_used = [], []
    inference_elapsed, inference_edges = 0.0, 0

    for repeat in range(config.repeats):
        model = create_node_classifier(config.model, n_classes, config.model_params)
        model.prepare_stream(graph.timestamps[splits.train])
        adam = AdamState(model.parameters(), lr=config.lr)
        monitor = EarlyStopMonitor(config.patience, config.tolerance)
        best_snap = None

        for epoch in range(config.max_epochs):
            deadline.check()
            t0 = time.perf_counter()
            model.reset_stream()
            for batch in _batches(splits.train, config.batch_size):
                src, dst, ts = _edge_arrays(graph, batch)
                feats = model.featurize(src, dst, ts)
                _, grads = model.loss_and_grads(feats, graph.labels[batch])
                adam.step(model.parameters(), grads)
                model.observe(src, dst, ts)
            epoch_seconds.append(time.perf_counter() - t0)

            p1, preds, truth = _nc_eval(model, graph, splits.val,
                                        config.batch_size, binary, background,
                                        config.exclude_background)
            if binary:
                val_metric = roc_auc(p1, truth)
            else:
                val_metric = float(np.mean(preds == truth))
            stop = monitor.update(val_metric)
            if monitor.best_epoch == monitor.epoch:
                best_snap = model.snapshot()
            if stop:
                break
        epochs_used.append(monitor.epoch + 1)

        model.restore(best_snap)
        _stream_observe(model, graph, splits.val, config.batch_size)
        deadline.check()

        p1, preds, truth = _nc_eval(model, graph, splits.test, config.batch_size,
                                    binary, background, config.exclude_background)
        if binary:
            results = {"transductive": {"auc": roc_auc(p1, truth)}}
        else:
            acc, p, r, f1, _, _ = weighted_prf(truth, preds)
            results = {"transductive": {
                "accuracy": acc, "weighted_precision": p,
                "weighted_recall": r, "weighted_f1": f1}}
        per_repeat.append(results)

        if repeat == config.repeats - 1:
            src, dst, ts = _edge_arrays(graph, splits.test)
            t0 = time.perf_counter()
            model.node_logits(src, dst, ts)
            inference_elapsed = time.perf_counter() - t0
            inference_edges = len(splits.test)

    return RunResult(
        config=config,
        metrics=_aggregate(per_repeat),
        epochs_used=float(np.mean(epochs_used)),
        seconds_per_epoch=float(np.mean(epoch_seconds)),
        peak_memory_bytes=_peak_memory_bytes(),
        inference_seconds_per_100k=inference_elapsed / inference_edges * 1e5,
    )


def run(graph, splits, config: RunConfig) -> RunResult:
    """Dispatch on the configured task."""
    if config.task == "lp":
        return run_link_prediction(graph, splits, config)
    return run_node_classification(graph, splits, config)


def evaluation_report(result: RunResult, setting: str) -> MetricReport:
    """Convenience view of one setting's means as a MetricReport."""
    block = result.metrics.get(setting)
    if block is None:
        raise MetricError(f"setting {setting!r} was not evaluated")
    means = {m: v["mean"] for m, v in block.items()}
    return MetricReport(auc=means.get("auc"), ap=means.get("ap"),
                        accuracy=means.get("accuracy"),
                        weighted_precision=means.get("weighted_precision"),
                        weighted_recall=means.get("weighted_recall"),
                        weighted_f1=means.get("weighted_f1"))
