"""Result store (JSONL) and leaderboard emission with average ranks.

Each record captures one (dataset, model, task, setting, sampler, seeds,
metric) cell.  Appends are serialized through an advisory file lock;
re-recording an existing identity replaces the old record and warns.  The
leaderboard renders datasets as rows and models as columns, flags the best
and second-best value per row, and footers each column with the model's
average rank across datasets (rank 1 is best, ties share the mean of their
positions).
"""

from __future__ import annotations

import datetime as _dt
import fcntl
import io
import json
import os
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .errors import DuplicateResultWarning, MissingValueWarning, StoreError
from .metrics import average_ranks
from .runner import RunResult

# direction registry: how to order each metric when ranking
METRIC_DIRECTIONS = {
    "auc": "max", "ap": "max", "accuracy": "max",
    "weighted_precision": "max", "weighted_recall": "max", "weighted_f1": "max",
    "epochs_used": "min", "seconds_per_epoch": "min",
    "peak_memory_bytes": "min", "inference_seconds_per_100k": "min",
}

SECOND_BEST_GAP = 0.05


def _direction(metric: str) -> str:
    try:
        return METRIC_DIRECTIONS[metric]
    except KeyError:
        known = ", ".join(sorted(METRIC_DIRECTIONS))
        raise StoreError(f"unknown metric {metric!r}; known metrics: {known}") \
            from None


@dataclass(frozen=True)
class ResultRecord:
    dataset: str
    model: str
    task: str
    setting: str
    sampler: str
    seeds: dict
    metric: str
    mean: float
    std: float
    epochs_used: float = 0.0
    seconds_per_epoch: float = 0.0
    peak_memory_bytes: int = 0
    inference_seconds_per_100k: float = 0.0
    harness_version: str = __version__
    created_at: str = field(default_factory=lambda: _dt.datetime.now(
        _dt.timezone.utc).isoformat(timespec="seconds"))

    def identity(self) -> tuple:
        return (self.dataset, self.model, self.task, self.setting, self.sampler,
                tuple(sorted((str(k), int(v)) for k, v in self.seeds.items())),
                self.metric)

    def to_json(self) -> dict:
        return {"dataset": self.dataset, "model": self.model, "task": self.task,
                "setting": self.setting, "sampler": self.sampler,
                "seeds": {str(k): int(v) for k, v in self.seeds.items()},
                "metric": self.metric, "mean": self.mean, "std": self.std,
                "epochs_used": self.epochs_used,
                "seconds_per_epoch": self.seconds_per_epoch,
                "peak_memory_bytes": self.peak_memory_bytes,
                "inference_seconds_per_100k": self.inference_seconds_per_100k,
                "harness_version": self.harness_version,
                "created_at": self.created_at}

    @classmethod
    def from_json(cls, obj: dict) -> "ResultRecord":
        try:
            return cls(**{k: obj[k] for k in (
                "dataset", "model", "task", "setting", "sampler", "seeds",
                "metric", "mean", "std", "epochs_used", "seconds_per_epoch",
                "peak_memory_bytes", "inference_seconds_per_100k",
                "harness_version", "created_at")})
        except KeyError as exc:
            raise StoreError(f"result record is missing field {exc}") from None


def records_from_run(result: RunResult) -> list:
    """Flatten one RunResult into per-(setting, metric) records."""
    cfg = result.config
    out = []
    for setting, by_metric in result.metrics.items():
        if by_metric is None:
            continue
        if cfg.setting != "all" and setting != cfg.setting:
            continue
        for metric, stats in by_metric.items():
            out.append(ResultRecord(
                dataset=cfg.dataset, model=cfg.model, task=cfg.task,
                setting=setting, sampler=cfg.sampler, seeds=cfg.seeds(),
                metric=metric, mean=stats["mean"], std=stats["std"],
                epochs_used=result.epochs_used,
                seconds_per_epoch=result.seconds_per_epoch,
                peak_memory_bytes=result.peak_memory_bytes,
                inference_seconds_per_100k=result.inference_seconds_per_100k))
    return out


def read_store(path) -> list:
    if not os.path.exists(path):
        return []
    records = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                records.append(ResultRecord.from_json(json.loads(line)))
            except (json.JSONDecodeError, TypeError) as exc:
                raise StoreError(f"unreadable store line {lineno}: {exc}") from None
    return records


def record_result(path, record: ResultRecord) -> None:
    """Append `record`, replacing any record with the same identity."""
    lock_path = str(path) + ".lock"
    with open(lock_path, "w") as lock:
        fcntl.flock(lock, fcntl.LOCK_EX)
        try:
            existing = read_store(path)
            replaced = [r for r in existing if r.identity() == record.identity()]
            if replaced:
                warnings.warn(
                    f"replacing existing result for {record.identity()}",
                    DuplicateResultWarning, stacklevel=2)
                kept = [r for r in existing if r.identity() != record.identity()]
                with open(path, "w") as fh:
                    for r in kept + [record]:
                        fh.write(json.dumps(r.to_json(), sort_keys=True) + "\n")
            else:
                with open(path, "a") as fh:
                    fh.write(json.dumps(record.to_json(), sort_keys=True) + "\n")
        finally:
            fcntl.flock(lock, fcntl.LOCK_UN)


def record_run(path, result: RunResult) -> list:
    records = records_from_run(result)
    for rec in records:
        record_result(path, rec)
    return records


def compute_average_rank(values: dict, higher_is_better: bool = True) -> dict:
    """Average per-dataset rank for each model.

    ``values`` maps model -> dataset -> metric value.  On each dataset the
    models holding a value are ranked (best = 1, ties share the mean of
    their positions); a model missing a dataset is excluded from that
    dataset's ranking, with a warning.  Returns model -> average rank.
    """
    models = sorted(values)
    if not models:
        raise StoreError("no models to rank")
    datasets = sorted({d for by_ds in values.values() for d in by_ds})
    if not datasets:
        raise StoreError("no datasets to rank on")

    sums = {m: 0.0 for m in models}
    counts = {m: 0 for m in models}
    for ds in datasets:
        present = [m for m in models if ds in values[m]]
        missing = [m for m in models if ds not in values[m]]
        if missing:
            warnings.warn(
                f"no value for {missing} on {ds!r}; excluded from that ranking",
                MissingValueWarning, stacklevel=2)
        if not present:
            continue
        col = np.array([values[m][ds] for m in present], dtype=np.float64)
        ranks = average_ranks(-col if higher_is_better else col)
        for m, r in zip(present, ranks):
            sums[m] += float(r)
            counts[m] += 1
    if all(c == 0 for c in counts.values()):
        raise StoreError("no rankable values")
    return {m: sums[m] / counts[m] for m in models if counts[m]}


def _select_cells(records, task, setting, metric):
    cells = {}
    for rec in records:
        if (rec.task, rec.setting, rec.metric) != (task, setting, metric):
            continue
        key = (rec.model, rec.dataset)
        prev = cells.get(key)
        if prev is None or rec.created_at >= prev.created_at:
            cells[key] = rec
    return cells


def emit_leaderboard(records, task, setting, metric, fmt="markdown",
                     hide_close_second=False) -> str:
    """Render a model × dataset table with best/second-best flags.

    Markdown bolds the best value per dataset row and italicises the second
    best; with ``hide_close_second`` the italics are dropped when the gap to
    the best exceeds 0.05.  CSV carries plain numbers only, so it re-parses
    to the same matrix, and both formats end with the average-rank footer.
    """
    direction = _direction(metric)
    cells = _select_cells(records, task, setting, metric)
    if not cells:
        raise StoreError(
            f"no records match task={task!r} setting={setting!r} metric={metric!r}")
    models = sorted({m for m, _ in cells})
    datasets = sorted({d for _, d in cells})

    values = {m: {d: cells[(m, d)].mean for d in datasets if (m, d) in cells}
              for m in models}
    avg_rank = compute_average_rank(values, higher_is_better=direction == "max")

    def row_flags(ds):
        present = [(m, values[m][ds]) for m in models if ds in values[m]]
        ordered = sorted(present, key=lambda kv: kv[1],
                         reverse=direction == "max")
        best = ordered[0][0] if ordered else None
        second = ordered[1][0] if len(ordered) > 1 else None
        if second is not None and hide_close_second:
            gap = abs(ordered[0][1] - ordered[1][1])
            if gap > SECOND_BEST_GAP:
                second = None
        return best, second

    if fmt == "markdown":
        buf = ["| dataset | " + " | ".join(models) + " |",
               "|" + "---|" * (len(models) + 1)]
        for ds in datasets:
            best, second = row_flags(ds)
            row = [ds]
            for m in models:
                if ds not in values[m]:
                    row.append("—")
                    continue
                text = f"{values[m][ds]:.4f}"
                if m == best:
                    text = f"**{text}**"
                elif m == second:
                    text = f"*{text}*"
                row.append(text)
            buf.append("| " + " | ".join(row) + " |")
        footer = ["avg rank"] + [f"{avg_rank[m]:.2f}" if m in avg_rank else "—"
                                 for m in models]
        buf.append("| " + " | ".join(footer) + " |")
        return "\n".join(buf) + "\n"

    if fmt == "csv":
        buf = io.StringIO()
        buf.write("dataset," + ",".join(models) + "\n")
        for ds in datasets:
            row = [ds] + [repr(values[m][ds]) if ds in values[m] else ""
                          for m in models]
            buf.write(",".join(row) + "\n")
        footer = ["avg_rank"] + [repr(avg_rank[m]) if m in avg_rank else ""
                                 for m in models]
        buf.write(",".join(footer) + "\n")
        return buf.getvalue()

    raise StoreError(f"unknown leaderboard format: {fmt!r}")
