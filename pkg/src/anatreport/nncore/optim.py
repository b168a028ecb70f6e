"""AdamW: bias-corrected Adam moments with decoupled weight decay."""

from __future__ import annotations

import numpy as np

from .layers import Parameter
from .tensor import ShapeError


class AdamW:
    """Per-parameter moment accumulators keyed by parameter name.

    The update is deterministic: identical parameter values, gradients and
    state produce bitwise-identical results. Weight decay is decoupled,
    ``p -= lr * decay * p``, applied alongside the Adam step.
    """

    def __init__(self, params: dict[str, Parameter], learning_rate: float = 1e-3,
                 betas: tuple[float, float] = (0.9, 0.999), eps: float = 1e-8,
                 weight_decay: float = 0.0):
        if learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if weight_decay < 0:
            raise ValueError("weight_decay must be non-negative")
        self.params = dict(params)
        self.learning_rate = float(learning_rate)
        self.betas = (float(betas[0]), float(betas[1]))
        self.eps = float(eps)
        self.weight_decay = float(weight_decay)
        self.step_count = 0
        self._m = {k: np.zeros_like(p.value) for k, p in self.params.items()}
        self._v = {k: np.zeros_like(p.value) for k, p in self.params.items()}

    def step(self) -> None:
        """Apply one update from the gradients currently stored on the params."""
        self.step_count += 1
        b1, b2 = self.betas
        bc1 = 1.0 - b1 ** self.step_count
        bc2 = 1.0 - b2 ** self.step_count
        for key, p in self.params.items():
            g = p.grad
            if g.shape != p.value.shape:
                raise ShapeError(f"{key}: grad shape {g.shape} != param shape {p.value.shape}")
            m = self._m[key]
            v = self._v[key]
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g * g
            update = (m / bc1) / (np.sqrt(v / bc2) + self.eps)
            if self.weight_decay:
                update = update + self.weight_decay * p.value
            p.value -= self.learning_rate * update

    def zero_grad(self) -> None:
        for p in self.params.values():
            p.grad[...] = 0.0
