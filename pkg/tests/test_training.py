import numpy as np
import pytest

from anatreport.data import generate_synthetic
from anatreport.generator import DecoderConfig
from anatreport.training import (
    TrainConfig,
    TrainingError,
    TrainLog,
    early_stop,
    init_state,
    run_stage,
)

SMALL_DECODER = DecoderConfig(layers=2, heads=2, model_dim=32, feedforward_dim=64,
                              max_len=24, vocab_size=0)


@pytest.fixture(scope="module")
def tiny_splits():
    train = generate_synthetic(24, seed=7, name="train")
    val = generate_synthetic(8, seed=8, name="validation")
    return train, val


class TestEarlyStop:
    def test_strictly_decreasing_never_stops(self):
        history = [1.0 - 0.01 * i for i in range(100)]
        for i in range(1, len(history) + 1):
            assert not early_stop(history[:i], patience=3)

    def test_flat_history_stops_at_patience_plus_one(self):
        flat = [0.5, 0.5, 0.5, 0.5]
        assert not early_stop(flat[:3], patience=3)
        assert early_stop(flat, patience=3)

    def test_spec_trace(self):
        history = [1.0, 0.9, 0.91, 0.92, 0.93]
        assert not early_stop(history[:4], patience=3)
        assert early_stop(history, patience=3)

    def test_improvement_resets_streak(self):
        history = [1.0, 1.0, 1.0, 0.5, 0.5, 0.5]
        assert not early_stop(history, patience=3)
        assert early_stop(history + [0.5], patience=3)

    def test_tiny_improvement_below_delta_does_not_count(self):
        history = [1.0, 1.0 - 1e-7, 1.0 - 2e-7, 1.0 - 3e-7]
        assert early_stop(history, patience=3, min_delta=1e-5)

    def test_empty_history_rejected(self):
        with pytest.raises(ValueError):
            early_stop([], patience=1)


class TestStage1:
    def test_noop_with_notice(self, tiny_splits):
        train, val = tiny_splits
        state, log = run_stage(TrainConfig(stage=1), train, val)
        assert state is None
        assert log.stop_reason == "fixture"
        assert log.epochs == [] and "fixture" in log.notice


class TestStage2:
    def test_reduces_loss_and_logs(self, tiny_splits):
        train, val = tiny_splits
        config = TrainConfig(stage=2, epochs=3, batch_size=64, seed=7)
        state, log = run_stage(config, train, val)
        assert state.stage == 2
        assert len(log.epochs) == 3
        assert log.epochs[-1].val_loss < log.epochs[0].val_loss
        assert log.epochs[0].epoch == 1

    def test_deterministic_trainlog(self, tiny_splits):
        train, val = tiny_splits
        config = TrainConfig(stage=2, epochs=2, batch_size=64, seed=11)
        _, log_a = run_stage(config, train, val)
        _, log_b = run_stage(config, train, val)
        assert [r.to_dict() for r in log_a.epochs] == [r.to_dict() for r in log_b.epochs]
        assert log_a.stop_reason == log_b.stop_reason

    def test_ablating_l2_leaves_abnormal_head_bitwise_unchanged(self, tiny_splits):
        train, val = tiny_splits
        state = init_state(train, seed=3)
        before = {k: p.value.copy() for k, p in state.abnormal_head.parameters().items()}
        config = TrainConfig(stage=2, epochs=2, batch_size=64, seed=3, train_l2=False)
        state, _ = run_stage(config, train, val, state=state)
        for key, param in state.abnormal_head.parameters().items():
            assert np.array_equal(param.value, before[key])

    def test_both_losses_ablated_rejected(self, tiny_splits):
        train, val = tiny_splits
        with pytest.raises(TrainingError):
            run_stage(TrainConfig(stage=2, train_l1=False, train_l2=False), train, val)

    def test_lr_trace_non_increasing(self, tiny_splits):
        train, val = tiny_splits
        config = TrainConfig(stage=2, epochs=6, batch_size=64, seed=5,
                             decay_patience=1, patience=6)
        _, log = run_stage(config, train, val)
        lrs = [r.learning_rate for r in log.epochs]
        assert all(a >= b for a, b in zip(lrs, lrs[1:]))


class TestStage3:
    def test_requires_stage2_state(self, tiny_splits):
        train, val = tiny_splits
        with pytest.raises(TrainingError, match="stage-2"):
            run_stage(TrainConfig(stage=3, epochs=1), train, val, state=None)

    def test_vocab_hash_mismatch_rejected(self, tiny_splits):
        train, val = tiny_splits
        other_train = generate_synthetic(5, seed=99, abnormal_rate=0.0, silent_rate=0.9,
                                         name="train")
        state, _ = run_stage(TrainConfig(stage=2, epochs=1, batch_size=64, seed=1),
                             train, val)
        with pytest.raises(TrainingError, match="vocabulary"):
            run_stage(TrainConfig(stage=3, epochs=1), other_train, val, state=state)

    def test_joint_training_runs_and_logs_token_accuracy(self, tiny_splits):
        train, val = tiny_splits
        state, _ = run_stage(TrainConfig(stage=2, epochs=1, batch_size=64, seed=2),
                             train, val)
        config = TrainConfig(stage=3, epochs=2, batch_size=16, seed=2)
        state, log = run_stage(config, train, val, state=state,
                               decoder_config=SMALL_DECODER)
        assert state.stage == 3 and state.decoder is not None
        assert all(r.token_accuracy is not None for r in log.epochs)
        assert log.epochs[-1].val_loss < log.epochs[0].val_loss


class TestTrainLog:
    def test_save_jsonl(self, tiny_splits, tmp_path):
        train, val = tiny_splits
        _, log = run_stage(TrainConfig(stage=2, epochs=2, batch_size=64, seed=4),
                           train, val)
        path = tmp_path / "log.jsonl"
        log.save(path)
        lines = path.read_text().strip().splitlines()
        assert len(lines) == 3  # two epochs + summary
        assert '"type": "summary"' in lines[-1]

    def test_validate_rejects_bad_epochs(self):
        from anatreport.training import EpochRecord
        log = TrainLog(stage=2, epochs=[EpochRecord(2, 1.0, 1.0, 0.1)])
        with pytest.raises(ValueError, match="monotone"):
            log.validate()
