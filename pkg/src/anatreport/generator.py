"""Region-conditioned transformer decoder for per-region sentences.

GPT-2-flavored pre-norm decoder trained with teacher forcing. Conditioning
is a visual prefix token: the region's 1024-dim feature is mapped through a
learned dense layer into model space and placed at position 0, ahead of bos
and the gold tokens. Decoding is greedy and per-region independent.

Batches run through flattened 2-D dense/norm ops plus einsum-style batched
attention; the math is identical to the 2-D nncore primitives, and the full
decoder loss is finite-difference checked at a tiny configuration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .data.schema import FEATURE_DIM
from .data.tokenizer import BOS_ID, EOS_ID, PAD_ID, Vocabulary
from .nncore import (
    DenseLayer,
    Embedding,
    LayerNorm,
    Parameter,
    cross_entropy_rows,
    require_finite,
)


@dataclass
class DecoderConfig:
    layers: int = 3
    heads: int = 8
    model_dim: int = 512
    feedforward_dim: int = 2048
    max_len: int = 64
    vocab_size: int = 0
    feature_dim: int = FEATURE_DIM

    def __post_init__(self):
        if self.model_dim % self.heads != 0:
            raise ValueError(
                f"model_dim {self.model_dim} must be divisible by heads {self.heads}"
            )
        if self.max_len < 1:
            raise ValueError("max_len must be >= 1")

    def to_dict(self) -> dict:
        return {
            "layers": self.layers, "heads": self.heads, "model_dim": self.model_dim,
            "feedforward_dim": self.feedforward_dim, "max_len": self.max_len,
            "vocab_size": self.vocab_size, "feature_dim": self.feature_dim,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DecoderConfig":
        return cls(**d)


@dataclass
class RegionSentences:
    """One generated sentence per region, in region order."""

    token_ids: list[list[int]]
    texts: list[str] = field(default_factory=list)

    def __post_init__(self):
        for ids in self.token_ids:
            if EOS_ID in ids and ids.index(EOS_ID) != len(ids) - 1:
                raise ValueError("tokens found after eos")


def sinusoidal_positions(length: int, dim: int) -> np.ndarray:
    """Classic sin/cos position table, [length, dim]."""
    pos = np.arange(length)[:, None].astype(np.float64)
    idx = np.arange(dim // 2)[None, :].astype(np.float64)
    angle = pos / np.power(10000.0, 2.0 * idx / dim)
    table = np.zeros((length, dim))
    table[:, 0::2] = np.sin(angle)
    table[:, 1::2] = np.cos(angle[:, : dim - dim // 2])
    return table


class _Block:
    """Pre-norm decoder block: causal self-attention then feedforward."""

    def __init__(self, cfg: DecoderConfig, rng: np.random.Generator, name: str):
        d = cfg.model_dim
        self.heads = cfg.heads
        self.head_dim = d // cfg.heads
        self.ln1 = LayerNorm(d, name=f"{name}.ln1")
        self.wq = DenseLayer(d, d, "identity", rng, name=f"{name}.wq")
        self.wk = DenseLayer(d, d, "identity", rng, name=f"{name}.wk")
        self.wv = DenseLayer(d, d, "identity", rng, name=f"{name}.wv")
        self.wo = DenseLayer(d, d, "identity", rng, name=f"{name}.wo")
        self.ln2 = LayerNorm(d, name=f"{name}.ln2")
        self.ff1 = DenseLayer(d, cfg.feedforward_dim, "relu", rng, name=f"{name}.ff1")
        self.ff2 = DenseLayer(cfg.feedforward_dim, d, "identity", rng, name=f"{name}.ff2")
        self._cache = None

    def modules(self):
        return (self.ln1, self.wq, self.wk, self.wv, self.wo, self.ln2, self.ff1, self.ff2)

    def parameters(self) -> dict[str, Parameter]:
        out: dict[str, Parameter] = {}
        for m in self.modules():
            out.update(m.parameters())
        return out

    def _heads_view(self, x2d: np.ndarray, batch: int, length: int) -> np.ndarray:
        # [B*L, d] -> [B, heads, L, head_dim]
        return x2d.reshape(batch, length, self.heads, self.head_dim).transpose(0, 2, 1, 3)

    def _merge_heads(self, x4d: np.ndarray, batch: int, length: int) -> np.ndarray:
        return x4d.transpose(0, 2, 1, 3).reshape(batch * length, self.heads * self.head_dim)

    def forward(self, x: np.ndarray) -> np.ndarray:
        """x is [B, L, d]; returns the same shape."""
        batch, length, d = x.shape
        flat = x.reshape(batch * length, d)

        h = self.ln1.forward(flat)
        q = self._heads_view(self.wq.forward(h), batch, length)
        k = self._heads_view(self.wk.forward(h), batch, length)
        v = self._heads_view(self.wv.forward(h), batch, length)
        scores = q @ k.transpose(0, 1, 3, 2) / math.sqrt(self.head_dim)
        mask = np.tril(np.ones((length, length), dtype=bool))
        scores = np.where(mask, scores, -np.inf)
        shifted = scores - scores.max(axis=-1, keepdims=True)
        expw = np.exp(shifted)
        weights = expw / expw.sum(axis=-1, keepdims=True)
        attn = weights @ v
        attn_flat = self.wo.forward(self._merge_heads(attn, batch, length))
        x1 = flat + attn_flat

        h2 = self.ln2.forward(x1)
        ffn = self.ff2.forward(self.ff1.forward(h2))
        out = x1 + ffn

        self._cache = (batch, length, weights, q, k, v)
        return out.reshape(batch, length, d)

    def backward(self, d_out: np.ndarray) -> np.ndarray:
        batch, length, weights, q, k, v = self._cache
        d = d_out.shape[-1]
        d_flat = d_out.reshape(batch * length, d)

        d_x1 = d_flat + self.ln2.backward(self.ff1.backward(self.ff2.backward(d_flat)))

        d_attn = self._heads_view(self.wo.backward(d_x1), batch, length)
        d_weights = d_attn @ v.transpose(0, 1, 3, 2)
        d_v = weights.transpose(0, 1, 3, 2) @ d_attn
        d_scores = weights * (d_weights - (d_weights * weights).sum(axis=-1, keepdims=True))
        scale = 1.0 / math.sqrt(self.head_dim)
        d_q = d_scores @ k * scale
        d_k = d_scores.transpose(0, 1, 3, 2) @ q * scale

        d_h = self.wq.backward(self._merge_heads(d_q, batch, length))
        d_h += self.wk.backward(self._merge_heads(d_k, batch, length))
        d_h += self.wv.backward(self._merge_heads(d_v, batch, length))
        d_x = d_x1 + self.ln1.backward(d_h)
        return d_x.reshape(batch, length, d)


class SentenceDecoder:
    """The trainable generator: embedding, visual prefix, blocks, vocab head."""

    def __init__(self, config: DecoderConfig, rng: np.random.Generator | None = None):
        if config.vocab_size < 5:
            raise ValueError("vocab_size must cover the reserved tokens")
        rng = rng if rng is not None else np.random.default_rng(0)
        self.config = config
        d = config.model_dim
        self.embedding = Embedding(config.vocab_size, d, rng, name="decoder.embedding")
        self.visual_proj = DenseLayer(config.feature_dim, d, "identity", rng,
                                      name="decoder.visual_proj")
        self.blocks = [_Block(config, rng, name=f"decoder.block{i}")
                       for i in range(config.layers)]
        self.final_ln = LayerNorm(d, name="decoder.final_ln")
        self.lm_head = DenseLayer(d, config.vocab_size, "identity", rng,
                                  name="decoder.lm_head")
        self._positions = sinusoidal_positions(config.max_len + 2, d)
        self._cache = None

    def parameters(self) -> dict[str, Parameter]:
        out: dict[str, Parameter] = {}
        out.update(self.embedding.parameters())
        out.update(self.visual_proj.parameters())
        for block in self.blocks:
            out.update(block.parameters())
        out.update(self.final_ln.parameters())
        out.update(self.lm_head.parameters())
        return out

    def zero_grad(self) -> None:
        for p in self.parameters().values():
            p.grad[...] = 0.0

    def _forward(self, features: np.ndarray, tokens_in: np.ndarray) -> np.ndarray:
        """features [B, feature_dim], tokens_in [B, T] -> logits [B, T+1, V]."""
        batch, t = tokens_in.shape
        length = t + 1
        d = self.config.model_dim
        vis = self.visual_proj.forward(features)
        emb = self.embedding.forward(tokens_in.reshape(-1)).reshape(batch, t, d)
        x = np.concatenate([vis[:, None, :], emb], axis=1)
        x = x + self._positions[:length]
        for block in self.blocks:
            x = block.forward(x)
        flat = self.final_ln.forward(x.reshape(batch * length, d))
        logits = self.lm_head.forward(flat).reshape(batch, length, self.config.vocab_size)
        self._cache = (batch, t)
        return logits

    def _backward(self, d_logits: np.ndarray) -> None:
        batch, t = self._cache
        length = t + 1
        d = self.config.model_dim
        flat = self.lm_head.backward(d_logits.reshape(batch * length, -1))
        d_x = self.final_ln.backward(flat).reshape(batch, length, d)
        for block in reversed(self.blocks):
            d_x = block.backward(d_x)
        d_vis = d_x[:, 0, :]
        d_emb = d_x[:, 1:, :].reshape(batch * t, d)
        self.embedding.backward(d_emb)
        self.visual_proj.backward(d_vis)

    def prepare_batch(self, token_sequences: list[list[int]]):
        """Right-pad gold token ids; returns (tokens_in, targets, mask)."""
        capped = [ids[: self.config.max_len - 1] for ids in token_sequences]
        t = max(len(ids) for ids in capped) + 1  # +1 for the eos target slot
        batch = len(capped)
        tokens_in = np.full((batch, t), PAD_ID, dtype=np.int64)
        targets = np.full((batch, t), PAD_ID, dtype=np.int64)
        mask = np.zeros((batch, t), dtype=bool)
        for i, ids in enumerate(capped):
            row_in = [BOS_ID] + ids
            row_out = ids + [EOS_ID]
            tokens_in[i, : len(row_in)] = row_in
            targets[i, : len(row_out)] = row_out
            mask[i, : len(row_out)] = True
        return tokens_in, targets, mask

    def loss_and_backward(self, features, token_sequences: list[list[int]],
                          loss_scale: float = 1.0) -> float:
        """Teacher-forced mean CE over non-pad positions, with backprop.

        Gradients accumulate onto the parameters; callers zero them first.
        """
        loss, d_logits = self._loss_forward(features, token_sequences)
        if loss_scale != 1.0:
            d_logits = d_logits * loss_scale
        self._backward(d_logits)
        return loss

    def loss(self, features, token_sequences: list[list[int]]) -> float:
        return self._loss_forward(features, token_sequences)[0]

    def _loss_forward(self, features, token_sequences):
        if len(token_sequences) == 0:
            raise ValueError("empty batch")
        features = np.asarray(features, dtype=np.float64)
        tokens_in, targets, mask = self.prepare_batch(token_sequences)
        logits = self._forward(features, tokens_in)
        # Position j >= 1 of the input row predicts targets[j-1]; the visual
        # prefix at position 0 carries no loss.
        pred = logits[:, 1:, :].reshape(-1, self.config.vocab_size)
        loss, d_pred = cross_entropy_rows(pred, targets.reshape(-1), mask.reshape(-1))
        d_logits = np.zeros_like(logits)
        d_logits[:, 1:, :] = d_pred.reshape(logits.shape[0], -1, self.config.vocab_size)
        return loss, d_logits

    def position_losses(self, feature, token_sequence: list[int]) -> np.ndarray:
        """Per-position CE contributions for one sequence (causality probes)."""
        tokens_in, targets, mask = self.prepare_batch([token_sequence])
        logits = self._forward(np.asarray([feature], dtype=np.float64), tokens_in)
        pred = logits[0, 1:, :]
        shifted = pred - pred.max(axis=1, keepdims=True)
        logp = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
        rows = np.arange(pred.shape[0])
        return np.where(mask[0], -logp[rows, targets[0]], 0.0)

    def token_accuracy(self, features, token_sequences: list[list[int]]) -> float:
        """Teacher-forced next-token accuracy over non-pad positions."""
        features = np.asarray(features, dtype=np.float64)
        tokens_in, targets, mask = self.prepare_batch(token_sequences)
        logits = self._forward(features, tokens_in)
        pred = logits[:, 1:, :].argmax(axis=2)
        return float((pred == targets)[mask].mean())

    def decode_batch(self, features, max_len: int | None = None) -> list[list[int]]:
        """Greedy decoding for a batch of features; ties go to the lowest id.

        Deterministic: stops each row at eos (inclusive) or after ``max_len``
        generated tokens.
        """
        features = np.asarray(features, dtype=np.float64)
        if features.ndim == 1:
            features = features[None, :]
        limit = self.config.max_len if max_len is None else max_len
        if limit < 1:
            raise ValueError("max_len must be >= 1")
        limit = min(limit, self.config.max_len)
        batch = features.shape[0]
        tokens = np.full((batch, limit + 1), PAD_ID, dtype=np.int64)
        tokens[:, 0] = BOS_ID
        done = np.zeros(batch, dtype=bool)
        produced: list[list[int]] = [[] for _ in range(batch)]
        for step in range(limit):
            logits = self._forward(features, tokens[:, : step + 1])
            next_ids = logits[:, step + 1, :].argmax(axis=1)
            for i in range(batch):
                if done[i]:
                    continue
                nid = int(next_ids[i])
                produced[i].append(nid)
                if nid == EOS_ID:
                    done[i] = True
                else:
                    tokens[i, step + 1] = nid
            if done.all():
                break
        require_finite(logits, "decoder logits")
        return produced

    def decode_region(self, feature, vocab: Vocabulary, max_len: int | None = None) -> tuple[list[int], str]:
        ids = self.decode_batch(feature, max_len)[0]
        return ids, vocab.decode(ids)

    def generate_all(self, feature_matrix, vocab: Vocabulary,
                     max_len: int | None = None) -> RegionSentences:
        """Independently decode one sentence per region, in region order."""
        ids = self.decode_batch(np.asarray(feature_matrix, dtype=np.float64), max_len)
        return RegionSentences(token_ids=ids, texts=[vocab.decode(row) for row in ids])
