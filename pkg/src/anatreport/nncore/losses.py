"""Cross-entropy and binary cross-entropy, numerically stable forms.

Both return ``(loss, gradient_wrt_logits)`` so callers can hand-wire the
backward pass without an autodiff graph.
"""

from __future__ import annotations

import numpy as np

from .tensor import as_vector, require_finite
from .layers import sigmoid


def softmax(logits: np.ndarray, axis: int = -1) -> np.ndarray:
    """Max-subtracted softmax; safe for large logits."""
    shifted = logits - logits.max(axis=axis, keepdims=True)
    ex = np.exp(shifted)
    return ex / ex.sum(axis=axis, keepdims=True)


def log_softmax(logits: np.ndarray, axis: int = -1) -> np.ndarray:
    shifted = logits - logits.max(axis=axis, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=axis, keepdims=True))


def cross_entropy(logits, target: int) -> tuple[float, np.ndarray]:
    """Negative log-softmax of the target class.

    Returns the loss and its gradient ``softmax(logits) - onehot(target)``.
    """
    logits = as_vector(logits, "logits")
    v = logits.shape[0]
    target = int(target)
    if not 0 <= target < v:
        raise IndexError(f"target {target} out of range for {v} classes")
    logp = log_softmax(logits)
    loss = -logp[target]
    grad = np.exp(logp)
    grad[target] -= 1.0
    return float(loss), grad


def cross_entropy_rows(
    logits: np.ndarray, targets: np.ndarray, mask: np.ndarray | None = None
) -> tuple[float, np.ndarray]:
    """Mean cross-entropy over rows, skipping rows where ``mask`` is False.

    Used for teacher-forced sequence training: each row is one token
    position, the mean runs over unmasked positions only, and the returned
    gradient is already divided by that count.
    """
    logits = np.asarray(logits, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.int64)
    if logits.ndim != 2 or targets.shape != (logits.shape[0],):
        raise ValueError(
            f"logits {logits.shape} and targets {targets.shape} do not align"
        )
    if targets.size and (targets.min() < 0 or targets.max() >= logits.shape[1]):
        raise IndexError("target id out of vocabulary range")
    if mask is None:
        mask = np.ones(logits.shape[0], dtype=bool)
    else:
        mask = np.asarray(mask, dtype=bool)
    count = int(mask.sum())
    if count == 0:
        return 0.0, np.zeros_like(logits)
    logp = log_softmax(logits, axis=1)
    rows = np.arange(logits.shape[0])
    loss = -logp[rows, targets][mask].sum() / count
    grad = np.exp(logp)
    grad[rows, targets] -= 1.0
    grad[~mask] = 0.0
    grad /= count
    require_finite(grad, "cross-entropy gradient")
    return float(loss), grad


def binary_cross_entropy(logit: float, label: int) -> tuple[float, float]:
    """BCE on a single logit via the log1p(exp(-|z|)) form.

    Gradient is ``sigmoid(logit) - label``.
    """
    if label not in (0, 1):
        raise ValueError(f"label must be 0 or 1, got {label!r}")
    z = float(logit)
    loss = max(z, 0.0) - z * label + np.log1p(np.exp(-abs(z)))
    grad = float(sigmoid(np.array([z]))[0]) - label
    return float(loss), grad


def binary_cross_entropy_rows(
    logits: np.ndarray, labels: np.ndarray
) -> tuple[float, np.ndarray]:
    """Mean BCE over a vector of logits; gradient divided by the count."""
    logits = np.asarray(logits, dtype=np.float64).reshape(-1)
    labels = np.asarray(labels, dtype=np.float64).reshape(-1)
    if logits.shape != labels.shape:
        raise ValueError(f"logits {logits.shape} and labels {labels.shape} do not align")
    if not np.all((labels == 0.0) | (labels == 1.0)):
        raise ValueError("labels must be binary")
    if logits.size == 0:
        return 0.0, np.zeros(0)
    losses = np.maximum(logits, 0.0) - logits * labels + np.log1p(np.exp(-np.abs(logits)))
    grad = (sigmoid(logits) - labels) / logits.size
    return float(losses.mean()), grad
