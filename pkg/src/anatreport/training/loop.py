"""Staged training: heads at stage 2, decoder joined at stage 3.

Stage 1 (anatomy detection) is a fixture no-op at desk scale. Stage 2
trains the two classifier heads with BCE; stage 3 continues them jointly
with the sentence decoder (epoch objective = decoder CE + L1 + L2, unit
weights, separate optimizers per module). Learning rate halves on a
validation plateau; early stopping watches the same monitored loss; the
best-validation parameter snapshot is what a run returns.
"""

from __future__ import annotations

import logging

import numpy as np

from ..data.schema import DatasetSplit
from ..data.tokenizer import Vocabulary
from ..generator import DecoderConfig
from ..nncore import AdamW, binary_cross_entropy_rows
from ..prompts import ClassifierHead
from .config import EpochRecord, TrainConfig, TrainLog, TrainingError
from .state import PipelineState, init_state

logger = logging.getLogger(__name__)

STAGE1_NOTICE = (
    "stage 1 (anatomy detection) is replaced by the deterministic detector "
    "fixture; nothing to train"
)


def early_stop(history: list[float], patience: int, min_delta: float = 1e-5) -> bool:
    """True once `patience` consecutive epochs failed to improve.

    An epoch improves when its loss is below the prior best by at least
    ``min_delta`` (strict decrease).
    """
    if not history:
        raise ValueError("history must be nonempty")
    if patience < 1:
        raise ValueError("patience must be >= 1")
    best = float("inf")
    streak = 0
    for value in history:
        if value <= best - min_delta:
            streak = 0
        else:
            streak += 1
        best = min(best, value)
    return streak >= patience


def _head_arrays(split: DatasetSplit):
    features = np.concatenate([s.feature_matrix() for s in split.samples])
    has_sentence = np.array(
        [r.has_sentence for s in split.samples for r in s.regions_in_order()], dtype=float
    )
    is_abnormal = np.array(
        [r.is_abnormal for s in split.samples for r in s.regions_in_order()], dtype=float
    )
    return features, has_sentence, is_abnormal


def _decoder_pairs(split: DatasetSplit, vocab: Vocabulary):
    features, token_rows = [], []
    for sample in split.samples:
        for record in sample.regions_in_order():
            if record.gold_sentence:
                features.append(np.asarray(record.feature, dtype=np.float64))
                token_rows.append(vocab.encode(record.gold_sentence))
    return np.stack(features), token_rows


def _binary_f1(pred: np.ndarray, gold: np.ndarray) -> float:
    tp = int((pred & gold).sum())
    fp = int((pred & ~gold).sum())
    fn = int((~pred & gold).sum())
    if 2 * tp + fp + fn == 0:
        return 0.0
    return 2 * tp / (2 * tp + fp + fn)


def _head_loss(head: ClassifierHead, x: np.ndarray, y: np.ndarray,
               backward: bool = False) -> float:
    logits = head.logits(x)
    loss, grad = binary_cross_entropy_rows(logits, y)
    if backward:
        head.backward(grad)
    return loss


class _PlateauSchedule:
    """Halve the learning rate after `decay_patience` non-improving epochs."""

    def __init__(self, optimizers: list[AdamW], factor: float, decay_patience: int,
                 min_delta: float):
        self.optimizers = optimizers
        self.factor = factor
        self.decay_patience = max(1, decay_patience)
        self.min_delta = min_delta
        self.best = float("inf")
        self.streak = 0

    def observe(self, value: float) -> None:
        if value <= self.best - self.min_delta:
            self.streak = 0
        else:
            self.streak += 1
            if self.streak >= self.decay_patience:
                for opt in self.optimizers:
                    opt.learning_rate *= self.factor
                self.streak = 0
        self.best = min(self.best, value)


def run_stage(
    config: TrainConfig,
    train_split: DatasetSplit,
    val_split: DatasetSplit,
    state: PipelineState | None = None,
    decoder_config: DecoderConfig | None = None,
) -> tuple[PipelineState | None, TrainLog]:
    """Run one training stage; returns the best-validation state and its log."""
    if config.stage == 1:
        logger.info(STAGE1_NOTICE)
        return state, TrainLog(stage=1, epochs=[], stop_reason="fixture", notice=STAGE1_NOTICE)
    if config.stage == 2:
        return _run_stage2(config, train_split, val_split, state)
    return _run_stage3(config, train_split, val_split, state, decoder_config)


def _run_stage2(config, train_split, val_split, state):
    if not (config.train_l1 or config.train_l2):
        raise TrainingError("stage 2 with both detection losses ablated has nothing to train")
    if state is None:
        state = init_state(train_split, config.seed)

    x_train, sent_train, abn_train = _head_arrays(train_split)
    x_val, sent_val, abn_val = _head_arrays(val_split)

    active: list[tuple[ClassifierHead, np.ndarray, np.ndarray, AdamW]] = []
    if config.train_l1:
        active.append((state.sentence_head, sent_train, sent_val,
                       AdamW(state.sentence_head.parameters(), config.learning_rate,
                             weight_decay=config.weight_decay)))
    if config.train_l2:
        active.append((state.abnormal_head, abn_train, abn_val,
                       AdamW(state.abnormal_head.parameters(), config.learning_rate,
                             weight_decay=config.weight_decay)))

    schedule = _PlateauSchedule([opt for *_, opt in active], config.decay_factor,
                                config.decay_patience, config.min_delta)
    rng = np.random.default_rng([config.seed, 20])
    log = TrainLog(stage=2)
    best_val = float("inf")
    best_snapshot = state.snapshot()

    for epoch in range(1, config.epochs + 1):
        perm = rng.permutation(x_train.shape[0])
        train_loss = 0.0
        batches = 0
        for start in range(0, len(perm), config.batch_size):
            idx = perm[start:start + config.batch_size]
            for head, y, _, opt in active:
                opt.zero_grad()
                train_loss += _head_loss(head, x_train[idx], y[idx], backward=True)
                opt.step()
            batches += 1
        train_loss /= max(batches, 1)

        val_loss = sum(_head_loss(head, x_val, y_val) for head, _, y_val, _ in active)
        record = EpochRecord(
            epoch=epoch, train_loss=train_loss, val_loss=val_loss,
            learning_rate=active[0][3].learning_rate,
            f1_sentence=_binary_f1(state.sentence_head.probabilities(x_val) >= 0.5,
                                   sent_val.astype(bool)),
            f1_abnormal=_binary_f1(state.abnormal_head.probabilities(x_val) >= 0.5,
                                   abn_val.astype(bool)),
        )
        log.epochs.append(record)
        if val_loss <= best_val - config.min_delta:
            best_val = val_loss
            best_snapshot = state.snapshot()
        schedule.observe(val_loss)
        if early_stop(log.val_losses(), config.patience, config.min_delta):
            log.stop_reason = "early_stop"
            break
    state.restore(best_snapshot)
    state.stage = max(state.stage, 2)
    log.validate()
    return state, log


def _run_stage3(config, train_split, val_split, state, decoder_config):
    if state is None or state.stage < 2:
        raise TrainingError("stage 3 requires a stage-2 checkpoint to continue from")
    train_vocab = Vocabulary.build_from_split(train_split)
    if train_vocab.content_hash() != state.vocab.content_hash():
        raise TrainingError(
            "training split vocabulary does not match the checkpoint's vocabulary hash"
        )

    decoder = state.ensure_decoder(
        decoder_config if decoder_config is not None else DecoderConfig(vocab_size=len(state.vocab)),
        config.seed,
    )
    x_train, sent_train, abn_train = _head_arrays(train_split)
    x_val, sent_val, abn_val = _head_arrays(val_split)
    dec_x, dec_rows = _decoder_pairs(train_split, state.vocab)
    val_x, val_rows = _decoder_pairs(val_split, state.vocab)

    dec_opt = AdamW(decoder.parameters(), config.decoder_learning_rate,
                    weight_decay=config.weight_decay)
    optimizers = [dec_opt]
    head_opts: list[tuple[ClassifierHead, np.ndarray, np.ndarray, AdamW]] = []
    if config.train_l1:
        opt = AdamW(state.sentence_head.parameters(), config.learning_rate,
                    weight_decay=config.weight_decay)
        head_opts.append((state.sentence_head, sent_train, sent_val, opt))
        optimizers.append(opt)
    if config.train_l2:
        opt = AdamW(state.abnormal_head.parameters(), config.learning_rate,
                    weight_decay=config.weight_decay)
        head_opts.append((state.abnormal_head, abn_train, abn_val, opt))
        optimizers.append(opt)

    schedule = _PlateauSchedule(optimizers, config.decay_factor,
                                config.decay_patience, config.min_delta)
    rng = np.random.default_rng([config.seed, 30])
    log = TrainLog(stage=3)
    best_val = float("inf")
    best_snapshot = state.snapshot()

    def val_losses() -> float:
        total = 0.0
        for start in range(0, len(val_rows), 256):
            chunk = slice(start, start + 256)
            weight = len(val_rows[chunk]) / len(val_rows)
            total += decoder.loss(val_x[chunk], val_rows[chunk]) * weight
        total += sum(_head_loss(head, x_val, y_val) for head, _, y_val, _ in head_opts)
        return total

    def val_token_accuracy() -> float:
        correct = []
        for start in range(0, len(val_rows), 256):
            chunk = slice(start, start + 256)
            correct.append(
                (decoder.token_accuracy(val_x[chunk], val_rows[chunk]), len(val_rows[chunk]))
            )
        total = sum(n for _, n in correct)
        return sum(acc * n for acc, n in correct) / total

    for epoch in range(1, config.epochs + 1):
        train_loss = 0.0
        # Decoder pass over (sample, region-with-sentence) pairs.
        dec_perm = rng.permutation(len(dec_rows))
        dec_batches = 0
        for start in range(0, len(dec_perm), config.batch_size):
            idx = dec_perm[start:start + config.batch_size]
            dec_opt.zero_grad()
            train_loss += decoder.loss_and_backward(dec_x[idx], [dec_rows[i] for i in idx])
            dec_opt.step()
            dec_batches += 1
        # Concurrent heads pass over all (sample, region) pairs.
        head_perm = rng.permutation(x_train.shape[0])
        for start in range(0, len(head_perm), config.batch_size):
            idx = head_perm[start:start + config.batch_size]
            for head, y, _, opt in head_opts:
                opt.zero_grad()
                _head_loss(head, x_train[idx], y[idx], backward=True)
                opt.step()
        train_loss /= max(dec_batches, 1)

        val_loss = val_losses()
        record = EpochRecord(
            epoch=epoch, train_loss=train_loss, val_loss=val_loss,
            learning_rate=dec_opt.learning_rate,
            f1_sentence=_binary_f1(state.sentence_head.probabilities(x_val) >= 0.5,
                                   sent_val.astype(bool)),
            f1_abnormal=_binary_f1(state.abnormal_head.probabilities(x_val) >= 0.5,
                                   abn_val.astype(bool)),
            token_accuracy=val_token_accuracy(),
        )
        log.epochs.append(record)
        if val_loss <= best_val - config.min_delta:
            best_val = val_loss
            best_snapshot = state.snapshot()
        schedule.observe(val_loss)
        if early_stop(log.val_losses(), config.patience, config.min_delta):
            log.stop_reason = "early_stop"
            break
    state.restore(best_snapshot)
    state.stage = 3
    log.validate()
    return state, log
