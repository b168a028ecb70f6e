"""Trainable layers with hand-derived backward passes.

No autodiff graph: each layer caches what its backward needs during
forward and exposes ``parameters()`` so the optimizer and checkpoint
writer can walk every weight by name.
"""

from __future__ import annotations

import math

import numpy as np

from .tensor import ShapeError, as_matrix, require_finite

ACTIVATIONS = ("relu", "identity", "sigmoid")


class Parameter:
    """A weight array paired with its gradient accumulator."""

    __slots__ = ("value", "grad")

    def __init__(self, value: np.ndarray):
        self.value = np.asarray(value, dtype=np.float64)
        self.grad = np.zeros_like(self.value)

    @property
    def shape(self):
        return self.value.shape


def glorot_uniform(d_in: int, d_out: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform(+-sqrt(6/(d_in+d_out))) initialization."""
    limit = math.sqrt(6.0 / (d_in + d_out))
    return rng.uniform(-limit, limit, size=(d_in, d_out))


def sigmoid(x: np.ndarray) -> np.ndarray:
    # Split by sign so exp never overflows.
    out = np.empty_like(x, dtype=np.float64)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


class Module:
    """Minimal base: named parameters plus gradient reset."""

    def parameters(self) -> dict[str, Parameter]:
        raise NotImplementedError

    def zero_grad(self) -> None:
        for p in self.parameters().values():
            p.grad[...] = 0.0


class DenseLayer(Module):
    """Fully connected map ``y = act(x W + b)``.

    Args:
        d_in, d_out: input/output widths.
        activation: one of {"relu", "identity", "sigmoid"}.
        rng: seeded generator for the Glorot init; biases start at zero.
    """

    def __init__(self, d_in: int, d_out: int, activation: str = "identity",
                 rng: np.random.Generator | None = None, name: str = "dense"):
        if activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {activation!r}, expected one of {ACTIVATIONS}")
        rng = rng if rng is not None else np.random.default_rng(0)
        self.weight = Parameter(glorot_uniform(d_in, d_out, rng))
        self.bias = Parameter(np.zeros(d_out))
        self.activation = activation
        self.name = name
        self._cache: tuple | None = None

    @property
    def d_in(self) -> int:
        return self.weight.shape[0]

    @property
    def d_out(self) -> int:
        return self.weight.shape[1]

    def parameters(self) -> dict[str, Parameter]:
        return {f"{self.name}.weight": self.weight, f"{self.name}.bias": self.bias}

    def forward(self, x: np.ndarray) -> np.ndarray:
        x = as_matrix(x, f"{self.name} input")
        if x.shape[1] != self.d_in:
            raise ShapeError(
                f"{self.name}: input shape {x.shape} does not match weight shape "
                f"{self.weight.shape}"
            )
        z = x @ self.weight.value + self.bias.value
        if self.activation == "relu":
            y = np.maximum(z, 0.0)
        elif self.activation == "sigmoid":
            y = sigmoid(z)
        else:
            y = z
        require_finite(y, f"{self.name} output")
        self._cache = (x, z, y)
        return y

    def backward(self, dy: np.ndarray) -> np.ndarray:
        """Accumulate parameter grads and return the input gradient."""
        if self._cache is None:
            raise RuntimeError(f"{self.name}: backward called before forward")
        x, z, y = self._cache
        dy = np.asarray(dy, dtype=np.float64)
        if self.activation == "relu":
            dz = dy * (z > 0.0)
        elif self.activation == "sigmoid":
            dz = dy * y * (1.0 - y)
        else:
            dz = dy
        self.weight.grad += x.T @ dz
        self.bias.grad += dz.sum(axis=0)
        return dz @ self.weight.value.T


class Embedding(Module):
    """Token-id lookup table; backward scatter-adds into the weight grad."""

    def __init__(self, vocab_size: int, dim: int,
                 rng: np.random.Generator | None = None, name: str = "embedding"):
        rng = rng if rng is not None else np.random.default_rng(0)
        self.weight = Parameter(glorot_uniform(vocab_size, dim, rng))
        self.name = name
        self._ids: np.ndarray | None = None

    def parameters(self) -> dict[str, Parameter]:
        return {f"{self.name}.weight": self.weight}

    def forward(self, ids: np.ndarray) -> np.ndarray:
        ids = np.asarray(ids, dtype=np.int64)
        if ids.ndim != 1:
            raise ShapeError(f"{self.name}: ids must be 1-D, got shape {ids.shape}")
        if ids.size and (ids.min() < 0 or ids.max() >= self.weight.shape[0]):
            raise IndexError(f"{self.name}: token id out of range 0..{self.weight.shape[0] - 1}")
        self._ids = ids
        return self.weight.value[ids]

    def backward(self, dy: np.ndarray) -> None:
        if self._ids is None:
            raise RuntimeError(f"{self.name}: backward called before forward")
        np.add.at(self.weight.grad, self._ids, np.asarray(dy, dtype=np.float64))


class LayerNorm(Module):
    """Row-wise normalization with learned scale/shift."""

    def __init__(self, dim: int, eps: float = 1e-5, name: str = "ln"):
        self.gamma = Parameter(np.ones(dim))
        self.beta = Parameter(np.zeros(dim))
        self.eps = eps
        self.name = name
        self._cache: tuple | None = None

    def parameters(self) -> dict[str, Parameter]:
        return {f"{self.name}.gamma": self.gamma, f"{self.name}.beta": self.beta}

    def forward(self, x: np.ndarray) -> np.ndarray:
        x = as_matrix(x, f"{self.name} input")
        mean = x.mean(axis=1, keepdims=True)
        var = x.var(axis=1, keepdims=True)
        inv_std = 1.0 / np.sqrt(var + self.eps)
        xhat = (x - mean) * inv_std
        self._cache = (xhat, inv_std)
        return xhat * self.gamma.value + self.beta.value

    def backward(self, dy: np.ndarray) -> np.ndarray:
        if self._cache is None:
            raise RuntimeError(f"{self.name}: backward called before forward")
        xhat, inv_std = self._cache
        dy = np.asarray(dy, dtype=np.float64)
        self.gamma.grad += (dy * xhat).sum(axis=0)
        self.beta.grad += dy.sum(axis=0)
        dxhat = dy * self.gamma.value
        # d/dx of (x - mean)/std, folding the mean and variance paths together.
        n = xhat.shape[1]
        row_dot = (dxhat * xhat).sum(axis=1, keepdims=True)
        row_sum = dxhat.sum(axis=1, keepdims=True)
        return inv_std * (dxhat - row_sum / n - xhat * row_dot / n)
