"""Exception and warning types shared across the harness."""


class TGBenchError(Exception):
    """Base class for all harness errors."""

    code = "error"

    def payload(self) -> dict:
        """Machine-readable form used by the CLI error line."""
        return {"code": self.code, "message": str(self)}


class DatasetFormatError(TGBenchError):
    """Raw input or bundle file violates the expected format."""

    code = "dataset-format"

    def __init__(self, message, line=None):
        if line is not None:
            message = f"{message} (line {line})"
        super().__init__(message)
        self.line = line


class EmptyGraphError(TGBenchError):
    """Operation requires at least one interaction."""

    code = "empty-graph"


class SplitError(TGBenchError):
    """Split request cannot be satisfied (bad quantiles, pool too small, ...)."""

    code = "split"


class SamplingError(TGBenchError):
    """Negative/subgraph sampling request cannot be satisfied."""

    code = "sampling"


class WeightOverflowError(TGBenchError):
    """Exponential walk weights left the representable range."""

    code = "weight-overflow"


class MetricError(TGBenchError):
    """Score set does not admit the requested metric."""

    code = "metric"


class TrainingError(TGBenchError):
    """Training protocol violation (bad gradients, shapes, unsupported task)."""

    code = "training"


class RunTimeoutError(TGBenchError):
    """Run exceeded its wall-clock budget."""

    code = "timeout"


class StoreError(TGBenchError):
    """Result store is unreadable or a query cannot be answered."""

    code = "store"


class SharedNodeIdWarning(UserWarning):
    """A raw id appears on both sides of a graph reindexed as two-sided.

    The two occurrences are treated as distinct nodes; callers that intended a
    single entity should reindex with ``kind="homogeneous"`` instead.
    """


class DuplicateResultWarning(UserWarning):
    """A result record replaced an existing record with the same identity."""


class MissingValueWarning(UserWarning):
    """A leaderboard cell was absent and the dataset was dropped from ranking."""


class ZeroDivisionMetricWarning(UserWarning):
    """A metric denominator was zero; the affected value was reported as 0."""
