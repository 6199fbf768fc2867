"""Training primitives: BCE loss, Adam, early stopping, dimension checks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import TrainingError

PROB_CLAMP = 1e-7


def bce_loss(p_hat, y):
    """Mean binary cross-entropy and its gradient w.r.t. each probability.

    Probabilities are clamped to ``[1e-7, 1 - 1e-7]`` before taking logs and
    the gradient is evaluated at the clamped value, so saturated predictions
    never produce infinities.
    """
    p_hat = np.asarray(p_hat, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if p_hat.shape != y.shape or p_hat.ndim != 1:
        raise TrainingError("p_hat and y must be 1-d arrays of equal length")
    if len(y) == 0:
        raise TrainingError("empty batch")
    if not np.all(np.isfinite(p_hat)):
        raise TrainingError("predicted probabilities must be finite")
    if not np.isin(y, (0.0, 1.0)).all():
        raise TrainingError("targets must be 0 or 1")
    p = np.clip(p_hat, PROB_CLAMP, 1.0 - PROB_CLAMP)
    n = len(y)
    loss = float(np.mean(-(y * np.log(p) + (1.0 - y) * np.log1p(-p))))
    dloss_dp = (-(y / p) + (1.0 - y) / (1.0 - p)) / n
    return loss, dloss_dp


class AdamState:
    """Adam with bias correction over a list of parameter arrays."""

    def __init__(self, params, lr=1e-4, beta1=0.9, beta2=0.999, eps=1e-8):
        if lr <= 0:
            raise TrainingError("learning rate must be positive")
        self.lr = float(lr)
        self.beta1 = float(beta1)
        self.beta2 = float(beta2)
        self.eps = float(eps)
        self.step_count = 0
        self.m = [np.zeros_like(p, dtype=np.float64) for p in params]
        self.v = [np.zeros_like(p, dtype=np.float64) for p in params]

    def step(self, params, grads):
        """Update `params` in place from `grads`; returns the params list."""
        if len(params) != len(self.m) or len(grads) != len(self.m):
            raise TrainingError("parameter/gradient list length mismatch")
        for p, g, m in zip(params, grads, self.m):
            if p.shape != g.shape or p.shape != m.shape:
                raise TrainingError(
                    f"gradient shape {g.shape} does not match parameter {p.shape}")
            if not np.all(np.isfinite(g)):
                raise TrainingError("non-finite gradient rejected")
        self.step_count += 1
        t = self.step_count
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            m_hat = m / (1.0 - self.beta1 ** t)
            v_hat = v / (1.0 - self.beta2 ** t)
            p -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)
        return params


class EarlyStopMonitor:
    """Stop when the validation metric fails to improve for `patience` rounds.

    Improvement is relative: ``(value - best) / max(|best|, 1e-12)`` must
    exceed `tolerance`.  The first value always counts as an improvement.
    """

    def __init__(self, patience: int = 3, tolerance: float = 1e-3):
        if patience < 0:
            raise TrainingError("patience must be non-negative")
        if tolerance < 0:
            raise TrainingError("tolerance must be non-negative")
        self.patience = patience
        self.tolerance = tolerance
        self.best = None
        self.best_epoch = -1
        self.counter = 0
        self.epoch = -1

    def update(self, value: float) -> bool:
        """Record one epoch's metric; True means training should stop."""
        value = float(value)
        if not np.isfinite(value):
            raise TrainingError("validation metric must be finite")
        self.epoch += 1
        if self.best is None:
            improved = True
        else:
            gain = (value - self.best) / max(abs(self.best), 1e-12)
            improved = gain > self.tolerance
        if improved:
            self.best = value
            self.best_epoch = self.epoch
            self.counter = 0
        else:
            self.counter += 1
        return self.counter > self.patience


@dataclass(frozen=True)
class AttentionDimConfig:
    """Dimensions that an attention layer concatenates per head."""

    d_node: int
    d_edge: int
    d_time: int
    d_pos: int
    n_head: int

    @property
    def total(self) -> int:
        return self.d_node + self.d_edge + self.d_time + self.d_pos


def validate_attention_dims(config: AttentionDimConfig) -> int:
    """Remainder of the concatenated width modulo head count; 0 means valid."""
    if config.n_head <= 0:
        raise TrainingError("head count must be a positive integer")
    return config.total % config.n_head
