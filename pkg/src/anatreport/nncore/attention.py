"""Scaled dot-product attention and a trainable multi-head block.

The functional form works on plain 2-D arrays; the module form wires the
q/k/v/output projections and keeps per-head caches for backward.
"""

from __future__ import annotations

import math

import numpy as np

from .layers import DenseLayer, Module, Parameter
from .losses import softmax
from .tensor import ShapeError, as_matrix, require_finite


def causal_mask(n: int) -> np.ndarray:
    """Boolean [n, n] mask; True marks positions a query may attend to."""
    return np.tril(np.ones((n, n), dtype=bool))


def attention(q, k, v, causal: bool = False):
    """Scaled dot-product attention over 2-D arrays.

    ``q`` is [n, d], ``k`` is [m, d], ``v`` is [m, d_v]. With ``causal=True``
    (requires n == m) position i only attends to positions <= i. Returns
    ``(output, weights)``; weight rows sum to 1 and masked entries are 0.
    """
    q = as_matrix(q, "q")
    k = as_matrix(k, "k")
    v = as_matrix(v, "v")
    if q.shape[1] != k.shape[1]:
        raise ShapeError(f"q {q.shape} and k {k.shape} disagree on key dim")
    if k.shape[0] != v.shape[0]:
        raise ShapeError(f"k {k.shape} and v {v.shape} disagree on length")
    scores = q @ k.T / math.sqrt(q.shape[1])
    if causal:
        if q.shape[0] != k.shape[0]:
            raise ShapeError("causal attention requires square score matrix")
        scores = np.where(causal_mask(q.shape[0]), scores, -np.inf)
    weights = softmax(scores, axis=1)
    out = weights @ v
    require_finite(out, "attention output")
    return out, weights


def attention_backward(d_out, weights, q, k, v):
    """Gradients of :func:`attention` given the upstream ``d_out``."""
    scale = 1.0 / math.sqrt(q.shape[1])
    d_weights = d_out @ v.T
    d_v = weights.T @ d_out
    # Softmax backward per row; masked cells have weight 0 and stay 0.
    d_scores = weights * (d_weights - (d_weights * weights).sum(axis=1, keepdims=True))
    d_q = d_scores @ k * scale
    d_k = d_scores.T @ q * scale
    return d_q, d_k, d_v


class MultiHeadSelfAttention(Module):
    """Causal multi-head self-attention over a single [L, d] sequence."""

    def __init__(self, dim: int, heads: int, rng: np.random.Generator,
                 causal: bool = True, name: str = "attn"):
        if dim % heads != 0:
            raise ValueError(f"dim {dim} not divisible by heads {heads}")
        self.dim = dim
        self.heads = heads
        self.head_dim = dim // heads
        self.causal = causal
        self.name = name
        self.wq = DenseLayer(dim, dim, "identity", rng, name=f"{name}.wq")
        self.wk = DenseLayer(dim, dim, "identity", rng, name=f"{name}.wk")
        self.wv = DenseLayer(dim, dim, "identity", rng, name=f"{name}.wv")
        self.wo = DenseLayer(dim, dim, "identity", rng, name=f"{name}.wo")
        self._cache: list | None = None

    def parameters(self) -> dict[str, Parameter]:
        out: dict[str, Parameter] = {}
        for layer in (self.wq, self.wk, self.wv, self.wo):
            out.update(layer.parameters())
        return out

    def _split(self, x: np.ndarray) -> list[np.ndarray]:
        return [x[:, h * self.head_dim:(h + 1) * self.head_dim] for h in range(self.heads)]

    def forward(self, x: np.ndarray) -> np.ndarray:
        q = self.wq.forward(x)
        k = self.wk.forward(x)
        v = self.wv.forward(x)
        heads_out = []
        cache = []
        for qh, kh, vh in zip(self._split(q), self._split(k), self._split(v)):
            out_h, weights = attention(qh, kh, vh, causal=self.causal)
            heads_out.append(out_h)
            cache.append((weights, qh, kh, vh))
        self._cache = cache
        concat = np.concatenate(heads_out, axis=1)
        return self.wo.forward(concat)

    def backward(self, d_out: np.ndarray) -> np.ndarray:
        if self._cache is None:
            raise RuntimeError(f"{self.name}: backward called before forward")
        d_concat = self.wo.backward(d_out)
        dq_parts, dk_parts, dv_parts = [], [], []
        for h, (weights, qh, kh, vh) in enumerate(self._cache):
            d_head = d_concat[:, h * self.head_dim:(h + 1) * self.head_dim]
            d_qh, d_kh, d_vh = attention_backward(d_head, weights, qh, kh, vh)
            dq_parts.append(d_qh)
            dk_parts.append(d_kh)
            dv_parts.append(d_vh)
        dx = self.wq.backward(np.concatenate(dq_parts, axis=1))
        dx += self.wk.backward(np.concatenate(dk_parts, axis=1))
        dx += self.wv.backward(np.concatenate(dv_parts, axis=1))
        return dx
