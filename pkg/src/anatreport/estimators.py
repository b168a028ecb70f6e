"""Scikit-learn style estimators over the trainable pipeline pieces.

These wrappers make the learnable components compose with the wider
ecosystem (clone, get_params/set_params, Pipeline): a transformer for the
feature projection, a binary classifier for the detection heads, and a
fit/predict sentence generator. The staged trainer in
:mod:`anatreport.training` remains the canonical way to produce pipeline
checkpoints; these estimators serve standalone experimentation.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.exceptions import NotFittedError
from sklearn.utils.validation import check_array, check_X_y

from .data.schema import FEATURE_DIM
from .data.tokenizer import Vocabulary
from .generator import DecoderConfig, SentenceDecoder
from .nncore import AdamW, DenseLayer, binary_cross_entropy_rows, sigmoid
from .prompts import ClassifierHead
from .training.loop import early_stop


class RegionFeatureProjector(TransformerMixin, BaseEstimator):
    """Seeded dense projection of raw pooled features into the 1024-dim space."""

    def __init__(self, input_dim: int = FEATURE_DIM, seed: int = 0):
        self.input_dim = input_dim
        self.seed = seed

    def fit(self, X=None, y=None):
        self.projection_ = DenseLayer(
            self.input_dim, FEATURE_DIM, "identity",
            np.random.default_rng(self.seed), name="projector",
        )
        return self

    def transform(self, X):
        if not hasattr(self, "projection_"):
            raise NotFittedError("RegionFeatureProjector is not fitted")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.input_dim:
            raise ValueError(f"X has {X.shape[1]} columns, expected {self.input_dim}")
        return self.projection_.forward(X)


class RegionFlagClassifier(ClassifierMixin, BaseEstimator):
    """Binary MLP head (1024-512-128-1, ReLU) trained with AdamW.

    fit/predict over per-region feature rows; probability threshold uses >=
    so a 0.5 output counts as positive.
    """

    def __init__(self, learning_rate: float = 1e-3, weight_decay: float = 0.01,
                 batch_size: int = 32, epochs: int = 20, patience: int = 5,
                 threshold: float = 0.5, seed: int = 0):
        self.learning_rate = learning_rate
        self.weight_decay = weight_decay
        self.batch_size = batch_size
        self.epochs = epochs
        self.patience = patience
        self.threshold = threshold
        self.seed = seed

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=np.float64)
        y = y.astype(float)
        if not np.all((y == 0.0) | (y == 1.0)):
            raise ValueError("labels must be binary")
        if X.shape[1] != FEATURE_DIM:
            raise ValueError(f"X has {X.shape[1]} columns, expected {FEATURE_DIM}")
        self.classes_ = np.array([0, 1])
        self.head_ = ClassifierHead(np.random.default_rng(self.seed), name="head")
        optimizer = AdamW(self.head_.parameters(), self.learning_rate,
                          weight_decay=self.weight_decay)
        rng = np.random.default_rng([self.seed, 1])
        history: list[float] = []
        for _ in range(self.epochs):
            perm = rng.permutation(X.shape[0])
            epoch_loss = 0.0
            batches = 0
            for start in range(0, len(perm), self.batch_size):
                idx = perm[start:start + self.batch_size]
                optimizer.zero_grad()
                logits = self.head_.logits(X[idx])
                loss, grad = binary_cross_entropy_rows(logits, y[idx])
                self.head_.backward(grad)
                optimizer.step()
                epoch_loss += loss
                batches += 1
            history.append(epoch_loss / max(batches, 1))
            if early_stop(history, self.patience):
                break
        self.n_iter_ = len(history)
        return self

    def _check_fitted(self):
        if not hasattr(self, "head_"):
            raise NotFittedError("RegionFlagClassifier is not fitted")

    def decision_function(self, X):
        self._check_fitted()
        X = check_array(X, dtype=np.float64)
        return self.head_.logits(X)

    def predict_proba(self, X):
        p = sigmoid(self.decision_function(X))
        return np.column_stack([1.0 - p, p])

    def predict(self, X):
        return (self.predict_proba(X)[:, 1] >= self.threshold).astype(int)


class RegionSentenceGenerator(BaseEstimator):
    """Feature-to-sentence estimator wrapping the transformer decoder.

    ``fit(X, y)`` takes one feature row and one gold sentence per example,
    builds the vocabulary from y, and trains with teacher forcing;
    ``predict(X)`` greedily decodes one sentence per row.
    """

    def __init__(self, layers: int = 2, heads: int = 4, model_dim: int = 128,
                 feedforward_dim: int = 256, max_len: int = 24,
                 learning_rate: float = 3e-4, weight_decay: float = 0.01,
                 batch_size: int = 32, epochs: int = 10, seed: int = 0):
        self.layers = layers
        self.heads = heads
        self.model_dim = model_dim
        self.feedforward_dim = feedforward_dim
        self.max_len = max_len
        self.learning_rate = learning_rate
        self.weight_decay = weight_decay
        self.batch_size = batch_size
        self.epochs = epochs
        self.seed = seed

    def fit(self, X, y):
        X = check_array(X, dtype=np.float64)
        sentences = list(y)
        if len(sentences) != X.shape[0]:
            raise ValueError("X and y are not aligned")
        self.vocab_ = Vocabulary.build(sentences)
        config = DecoderConfig(
            layers=self.layers, heads=self.heads, model_dim=self.model_dim,
            feedforward_dim=self.feedforward_dim, max_len=self.max_len,
            vocab_size=len(self.vocab_), feature_dim=X.shape[1],
        )
        self.decoder_ = SentenceDecoder(config, np.random.default_rng(self.seed))
        optimizer = AdamW(self.decoder_.parameters(), self.learning_rate,
                          weight_decay=self.weight_decay)
        rows = [self.vocab_.encode(s) for s in sentences]
        rng = np.random.default_rng([self.seed, 1])
        for _ in range(self.epochs):
            perm = rng.permutation(X.shape[0])
            for start in range(0, len(perm), self.batch_size):
                idx = perm[start:start + self.batch_size]
                optimizer.zero_grad()
                self.decoder_.loss_and_backward(X[idx], [rows[i] for i in idx])
                optimizer.step()
        return self

    def _check_fitted(self):
        if not hasattr(self, "decoder_"):
            raise NotFittedError("RegionSentenceGenerator is not fitted")

    def predict(self, X) -> list[str]:
        self._check_fitted()
        X = check_array(X, dtype=np.float64)
        ids = self.decoder_.decode_batch(X)
        return [self.vocab_.decode(row) for row in ids]

    def score(self, X, y) -> float:
        """Teacher-forced token accuracy against gold sentences."""
        self._check_fitted()
        X = check_array(X, dtype=np.float64)
        rows = [self.vocab_.encode(s) for s in y]
        return self.decoder_.token_accuracy(X, rows)
