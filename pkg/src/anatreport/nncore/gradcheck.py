"""Central finite-difference gradient checking.

The safety net for every hand-derived backward pass: perturb each
coordinate, compare the analytic gradient against (f(x+e) - f(x-e)) / 2e,
and report the worst relative error. Run in float64.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .layers import Parameter


def grad_check(
    fn: Callable[[], float],
    params: dict[str, Parameter],
    eps: float = 1e-5,
    atol: float = 1e-8,
) -> float:
    """Return the max relative error between analytic and numeric gradients.

    ``fn`` must run a full forward+backward pass and return the scalar loss,
    leaving fresh gradients on ``params`` (zeroing them first is its job).
    The relative error per coordinate is measured against the
    finite-difference estimate; coordinates where both gradients are below
    ``atol`` count as exact.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    for p in params.values():
        p.grad[...] = 0.0
    loss0 = float(fn())
    if not np.isfinite(loss0):
        raise FloatingPointError(f"loss is not finite: {loss0}")
    analytic = {k: p.grad.copy() for k, p in params.items()}

    max_rel = 0.0
    for key, p in params.items():
        flat = p.value.reshape(-1)
        gflat = analytic[key].reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + eps
            loss_plus = float(fn())
            flat[i] = orig - eps
            loss_minus = float(fn())
            flat[i] = orig
            if not (np.isfinite(loss_plus) and np.isfinite(loss_minus)):
                raise FloatingPointError(f"non-finite loss while perturbing {key}[{i}]")
            numeric = (loss_plus - loss_minus) / (2.0 * eps)
            a = gflat[i]
            if max(abs(a), abs(numeric)) < atol:
                continue
            rel = abs(a - numeric) / max(abs(numeric), atol)
            if rel > max_rel:
                max_rel = rel
    # Leave the analytic gradients of the unperturbed point in place.
    for key, p in params.items():
        p.grad[...] = analytic[key]
    return max_rel
