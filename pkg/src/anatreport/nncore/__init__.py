"""Minimal trainable tensor core: layers, losses, optimizer, grad checking."""

from .tensor import ShapeError, as_matrix, as_vector, require_finite, require_shape
from .layers import ACTIVATIONS, DenseLayer, Embedding, LayerNorm, Module, Parameter, glorot_uniform, sigmoid
from .losses import (
    binary_cross_entropy,
    binary_cross_entropy_rows,
    cross_entropy,
    cross_entropy_rows,
    log_softmax,
    softmax,
)
from .optim import AdamW
from .gradcheck import grad_check
from .attention import MultiHeadSelfAttention, attention, attention_backward, causal_mask
from .checkpoint import CheckpointError, read_fragment, write_fragment

__all__ = [
    "ACTIVATIONS",
    "AdamW",
    "CheckpointError",
    "DenseLayer",
    "Embedding",
    "LayerNorm",
    "Module",
    "MultiHeadSelfAttention",
    "Parameter",
    "ShapeError",
    "as_matrix",
    "as_vector",
    "attention",
    "attention_backward",
    "binary_cross_entropy",
    "binary_cross_entropy_rows",
    "causal_mask",
    "cross_entropy",
    "cross_entropy_rows",
    "glorot_uniform",
    "grad_check",
    "log_softmax",
    "read_fragment",
    "require_finite",
    "require_shape",
    "sigmoid",
    "softmax",
    "write_fragment",
]
