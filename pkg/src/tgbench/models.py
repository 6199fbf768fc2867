"""Reference predictors that exercise the harness end to end.

Four cheap baselines share one streaming interface: a pure memorization
scorer (``edgebank``), its sliding-window variant (``edgebank-window``), an
exponential recency scorer (``time-decay``) and a trainable logistic model
over hand-crafted temporal features (``logistic``).  They observe the
interaction stream strictly in order; scoring a batch never looks at events
at later timestamps.
"""

from __future__ import annotations

import numpy as np

from .errors import TrainingError

PROB_EPS = 1e-7
WINDOW_TRAIN_FRACTION = 0.15  # default window: duration of the last 15% of train

FEATURE_NAMES = ("log_dt_src", "log_dt_dst", "log_deg_src", "log_deg_dst",
                 "log_pair_count", "seen")


def sigmoid(z):
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


class Predictor:
    """Streaming predictor interface shared by every baseline."""

    model_id = "?"
    trainable = False

    def reset_stream(self):
        """Forget all observed interactions (parameters survive)."""
        raise NotImplementedError

    def prepare_stream(self, train_timestamps):
        """Resolve data-dependent defaults before the first epoch."""

    def observe(self, src, dst, ts):
        raise NotImplementedError

    def score_edges(self, src, dst, ts) -> np.ndarray:
        raise NotImplementedError

    def node_logits(self, src, dst, ts) -> np.ndarray:
        raise TrainingError(
            f"model {self.model_id!r} does not support node classification")

    def parameters(self) -> list:
        return []

    def snapshot(self):
        raise NotImplementedError

    def restore(self, snap):
        raise NotImplementedError


class EdgeMemory:
    """Last-seen time and count per (src, dst) pair, updated in stream order."""

    def __init__(self):
        self.pairs = {}
        self.latest_time = -np.inf

    def update(self, src, dst, ts):
        ts = np.asarray(ts, dtype=np.float64)
        if ts.size and float(ts.min()) < self.latest_time:
            raise TrainingError(
                "out-of-order update: batch starts before the memory's "
                f"latest timestamp {self.latest_time}")
        for u, v, t in zip(np.asarray(src), np.asarray(dst), ts):
            key = (int(u), int(v))
            last, count = self.pairs.get(key, (None, 0))
            self.pairs[key] = (float(t), count + 1)
        if ts.size:
            self.latest_time = float(ts.max())

    def last_seen(self, src, dst):
        key = (int(src), int(dst))
        entry = self.pairs.get(key)
        return None if entry is None else entry[0]

    def copy(self):
        dup = EdgeMemory()
        dup.pairs = dict(self.pairs)
        dup.latest_time = self.latest_time
        return dup


class EdgeBankPredictor(Predictor):
    """Score 1 for remembered pairs, 0 otherwise.

    In ``window`` mode a pair only counts as remembered while its last
    occurrence lies inside ``[t - window, t)``.  When no window is given it
    defaults to the duration of the final 15% of the training span.
    """

    def __init__(self, mode="unlimited", window=None):
        if mode not in ("unlimited", "window"):
            raise TrainingError(f"unknown edgebank mode: {mode!r}")
        self.model_id = "edgebank" if mode == "unlimited" else "edgebank-window"
        self.mode = mode
        self.window = window
        self.memory = EdgeMemory()

    def reset_stream(self):
        self.memory = EdgeMemory()

    def prepare_stream(self, train_timestamps):
        if self.mode == "window" and self.window is None:
            ts = np.asarray(train_timestamps, dtype=np.float64)
            self.window = WINDOW_TRAIN_FRACTION * float(ts.max() - ts.min())

    def observe(self, src, dst, ts):
        self.memory.update(src, dst, ts)

    def score_edges(self, src, dst, ts):
        if self.mode == "window" and self.window is None:
            raise TrainingError("window mode needs a window; call prepare_stream")
        scores = np.zeros(len(np.asarray(src)), dtype=np.float64)
        for i, (u, v, t) in enumerate(zip(src, dst, np.asarray(ts, dtype=np.float64))):
            last = self.memory.last_seen(u, v)
            if last is None:
                continue
            if self.mode == "unlimited":
                scores[i] = 1.0
            elif t - self.window <= last < t:
                scores[i] = 1.0
        return scores

    def snapshot(self):
        return (self.memory.copy(), self.window)

    def restore(self, snap):
        self.memory, self.window = snap[0].copy(), snap[1]


class TimeDecayPredictor(Predictor):
    """Recency scorer: ``exp(-(t - last_seen) / tau)`` for remembered pairs."""

    model_id = "time-decay"

    def __init__(self, tau=None):
        if tau is not None and tau <= 0:
            raise TrainingError("tau must be positive")
        self.tau = tau
        self.memory = EdgeMemory()

    def reset_stream(self):
        self.memory = EdgeMemory()

    def prepare_stream(self, train_timestamps):
        if self.tau is None:
            ts = np.asarray(train_timestamps, dtype=np.float64)
            self.tau = max(WINDOW_TRAIN_FRACTION * float(ts.max() - ts.min()), 1e-9)

    def observe(self, src, dst, ts):
        self.memory.update(src, dst, ts)

    def score_edges(self, src, dst, ts):
        if self.tau is None:
            raise TrainingError("tau is unset; call prepare_stream first")
        scores = np.zeros(len(np.asarray(src)), dtype=np.float64)
        for i, (u, v, t) in enumerate(zip(src, dst, np.asarray(ts, dtype=np.float64))):
            last = self.memory.last_seen(u, v)
            if last is not None:
                scores[i] = float(np.exp(-max(t - last, 0.0) / self.tau))
        return scores

    def snapshot(self):
        return (self.memory.copy(), self.tau)

    def restore(self, snap):
        self.memory, self.tau = snap[0].copy(), snap[1]


class TemporalFeatureState:
    """Per-node / per-pair counters backing the hand-crafted edge features.

    A node that has never interacted uses the elapsed time since the stream
    start as its recency delta, so the cold-start feature stays finite.
    """

    def __init__(self, stream_start=0.0):
        self.stream_start = float(stream_start)
        self.node_last = {}
        self.node_deg = {}
        self.pair_count = {}

    def featurize(self, src, dst, ts) -> np.ndarray:
        src = np.asarray(src)
        dst = np.asarray(dst)
        ts = np.asarray(ts, dtype=np.float64)
        out = np.empty((len(src), len(FEATURE_NAMES)), dtype=np.float64)
        for i, (u, v, t) in enumerate(zip(src, dst, ts)):
            u, v = int(u), int(v)
            dt_u = t - self.node_last.get(u, self.stream_start)
            dt_v = t - self.node_last.get(v, self.stream_start)
            count = self.pair_count.get((u, v), 0)
            out[i, 0] = np.log1p(max(dt_u, 0.0))
            out[i, 1] = np.log1p(max(dt_v, 0.0))
            out[i, 2] = np.log1p(self.node_deg.get(u, 0))
            out[i, 3] = np.log1p(self.node_deg.get(v, 0))
            out[i, 4] = np.log1p(count)
            out[i, 5] = 1.0 if count > 0 else 0.0
        return out

    def update(self, src, dst, ts):
        for u, v, t in zip(np.asarray(src), np.asarray(dst),
                           np.asarray(ts, dtype=np.float64)):
            u, v = int(u), int(v)
            self.node_last[u] = float(t)
            self.node_last[v] = float(t)
            self.node_deg[u] = self.node_deg.get(u, 0) + 1
            self.node_deg[v] = self.node_deg.get(v, 0) + 1
            self.pair_count[(u, v)] = self.pair_count.get((u, v), 0) + 1

    def copy(self):
        dup = TemporalFeatureState(self.stream_start)
        dup.node_last = dict(self.node_last)
        dup.node_deg = dict(self.node_deg)
        dup.pair_count = dict(self.pair_count)
        return dup


class LogisticLinkPredictor(Predictor):
    """Logistic regression over the six streaming edge features."""

    model_id = "logistic"
    trainable = True

    def __init__(self, stream_start=0.0):
        self.stream_start = float(stream_start)
        self.state = TemporalFeatureState(stream_start)
        self.w = np.zeros(len(FEATURE_NAMES), dtype=np.float64)
        self.b = np.zeros(1, dtype=np.float64)

    def reset_stream(self):
        self.state = TemporalFeatureState(self.stream_start)

    def observe(self, src, dst, ts):
        self.state.update(src, dst, ts)

    def featurize(self, src, dst, ts):
        return self.state.featurize(src, dst, ts)

    def score_features(self, features):
        return sigmoid(features @ self.w + self.b[0])

    def score_edges(self, src, dst, ts):
        return self.score_features(self.featurize(src, dst, ts))

    def loss_and_grads(self, features, y):
        """Mean BCE over the batch and its gradients w.r.t. (w, b)."""
        y = np.asarray(y, dtype=np.float64)
        p = np.clip(self.score_features(features), PROB_EPS, 1.0 - PROB_EPS)
        loss = float(np.mean(-(y * np.log(p) + (1.0 - y) * np.log1p(-p))))
        dz = (p - y) / len(y)
        return loss, [features.T @ dz, np.array([dz.sum()])]

    def parameters(self):
        return [self.w, self.b]

    def snapshot(self):
        return (self.state.copy(), self.w.copy(), self.b.copy())

    def restore(self, snap):
        self.state = snap[0].copy()
        self.w = snap[1].copy()
        self.b = snap[2].copy()


class SoftmaxNodeClassifier(Predictor):
    """Multinomial head over the same streaming features, for state labels."""

    model_id = "logistic"
    trainable = True

    def __init__(self, n_classes, stream_start=0.0):
        if n_classes < 2:
            raise TrainingError("node classification needs at least 2 classes")
        self.n_classes = int(n_classes)
        self.stream_start = float(stream_start)
        self.state = TemporalFeatureState(stream_start)
        self.W = np.zeros((self.n_classes, len(FEATURE_NAMES)), dtype=np.float64)
        self.b = np.zeros(self.n_classes, dtype=np.float64)

    def reset_stream(self):
        self.state = TemporalFeatureState(self.stream_start)

    def observe(self, src, dst, ts):
        self.state.update(src, dst, ts)

    def featurize(self, src, dst, ts):
        return self.state.featurize(src, dst, ts)

    def logits_from_features(self, features):
        return features @ self.W.T + self.b

    def node_logits(self, src, dst, ts):
        return self.logits_from_features(self.featurize(src, dst, ts))

    def probabilities(self, logits):
        z = logits - logits.max(axis=1, keepdims=True)
        e = np.exp(z)
        return e / e.sum(axis=1, keepdims=True)

    def score_edges(self, src, dst, ts):
        # probability of class 1; lets binary node labels reuse ranking metrics
        return self.probabilities(self.node_logits(src, dst, ts))[:, 1]

    def loss_and_grads(self, features, y):
        """Mean cross-entropy over the batch and gradients w.r.t. (W, b)."""
        y = np.asarray(y, dtype=np.int64)
        if np.any(y < 0) or np.any(y >= self.n_classes):
            raise TrainingError("state label outside the configured class range")
        probs = self.probabilities(self.logits_from_features(features))
        n = len(y)
        picked = np.clip(probs[np.arange(n), y], PROB_EPS, 1.0)
        loss = float(np.mean(-np.log(picked)))
        dlogits = probs
        dlogits[np.arange(n), y] -= 1.0
        dlogits /= n
        return loss, [dlogits.T @ features, dlogits.sum(axis=0)]

    def parameters(self):
        return [self.W, self.b]

    def snapshot(self):
        return (self.state.copy(), self.W.copy(), self.b.copy())

    def restore(self, snap):
        self.state = snap[0].copy()
        self.W = snap[1].copy()
        self.b = snap[2].copy()


LINK_MODELS = ("edgebank", "edgebank-window", "time-decay", "logistic")


def create_link_predictor(model_id: str, params: dict | None = None) -> Predictor:
    params = dict(params or {})
    if model_id == "edgebank":
        return EdgeBankPredictor(mode="unlimited")
    if model_id == "edgebank-window":
        return EdgeBankPredictor(mode="window", window=params.get("window"))
    if model_id == "time-decay":
        return TimeDecayPredictor(tau=params.get("tau"))
    if model_id == "logistic":
        return LogisticLinkPredictor(stream_start=params.get("stream_start", 0.0))
    raise TrainingError(f"unknown model id: {model_id!r} (known: {LINK_MODELS})")


def create_node_classifier(model_id: str, n_classes: int,
                           params: dict | None = None) -> Predictor:
    params = dict(params or {})
    if model_id == "logistic":
        return SoftmaxNodeClassifier(n_classes,
                                     stream_start=params.get("stream_start", 0.0))
    if model_id in LINK_MODELS:
        raise TrainingError(
            f"model {model_id!r} does not support node classification")
    raise TrainingError(f"unknown model id: {model_id!r} (known: {LINK_MODELS})")
