import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from anatreport.nncore import (
    binary_cross_entropy,
    binary_cross_entropy_rows,
    cross_entropy,
    cross_entropy_rows,
    softmax,
)


class TestCrossEntropy:
    def test_uniform_logits(self):
        loss, _ = cross_entropy(np.zeros(4), 0)
        assert loss == pytest.approx(math.log(4.0), abs=1e-12)

    def test_loss_decreases_monotonically_toward_zero(self):
        # Driving the target logit up pushes the loss to 0 from above.
        losses = []
        for boost in (0.0, 2.0, 5.0, 10.0, 30.0, 100.0):
            logits = np.array([1.0, -0.5, 1.0 + boost])
            loss, _ = cross_entropy(logits, 2)
            losses.append(loss)
        assert all(a > b for a, b in zip(losses, losses[1:]))
        assert losses[-1] < 1e-12

    def test_hand_computed_softmax_oracle(self):
        # -ln(e^3 / (e^1 + e^2 + e^3)) = ln(1 + e^-1 + e^-2) = 0.40761...
        expected = math.log(1.0 + math.exp(-1.0) + math.exp(-2.0))
        loss, grad = cross_entropy(np.array([1.0, 2.0, 3.0]), 2)
        assert loss == pytest.approx(expected, abs=1e-9)
        assert loss == pytest.approx(0.4076, abs=5e-5)
        probs = softmax(np.array([1.0, 2.0, 3.0]))
        np.testing.assert_allclose(grad, probs - np.array([0.0, 0.0, 1.0]), atol=1e-12)

    def test_target_out_of_range(self):
        with pytest.raises(IndexError):
            cross_entropy(np.zeros(3), 3)

    def test_huge_logits_stay_finite(self):
        loss, grad = cross_entropy(np.array([1e4, -1e4, 0.0]), 1)
        assert np.isfinite(loss) and np.all(np.isfinite(grad))

    @given(
        st.lists(st.floats(-50, 50), min_size=2, max_size=8),
        st.floats(-100, 100),
    )
    def test_shift_invariance(self, logits, shift):
        logits = np.asarray(logits)
        base, _ = cross_entropy(logits, 0)
        shifted, _ = cross_entropy(logits + shift, 0)
        assert shifted == pytest.approx(base, abs=1e-9)


class TestCrossEntropyRows:
    def test_masked_rows_excluded(self):
        logits = np.array([[0.0, 0.0], [100.0, 0.0]])
        targets = np.array([0, 1])
        loss, grad = cross_entropy_rows(logits, targets, mask=np.array([True, False]))
        assert loss == pytest.approx(math.log(2.0))
        np.testing.assert_array_equal(grad[1], 0.0)

    def test_empty_mask_gives_zero(self):
        loss, grad = cross_entropy_rows(np.zeros((2, 3)), np.zeros(2, dtype=int),
                                        mask=np.zeros(2, dtype=bool))
        assert loss == 0.0
        np.testing.assert_array_equal(grad, 0.0)

    def test_duplicating_rows_keeps_mean(self):
        rng = np.random.default_rng(7)
        logits = rng.normal(size=(3, 5))
        targets = np.array([0, 2, 4])
        base, _ = cross_entropy_rows(logits, targets)
        doubled, _ = cross_entropy_rows(np.vstack([logits, logits]),
                                        np.concatenate([targets, targets]))
        assert doubled == pytest.approx(base, abs=1e-12)


class TestBinaryCrossEntropy:
    @pytest.mark.parametrize("label", [0, 1])
    def test_zero_logit_is_ln2(self, label):
        loss, grad = binary_cross_entropy(0.0, label)
        assert loss == pytest.approx(math.log(2.0), abs=1e-12)
        assert grad == pytest.approx(0.5 - label, abs=1e-12)

    def test_hand_computed_positive_logit(self):
        loss, _ = binary_cross_entropy(2.0, 1)
        assert loss == pytest.approx(math.log1p(math.exp(-2.0)), abs=1e-12)
        assert loss == pytest.approx(0.1269, abs=5e-5)

    def test_non_binary_label_rejected(self):
        with pytest.raises(ValueError, match="binary|label"):
            binary_cross_entropy(0.0, 2)

    def test_extreme_logits_stable(self):
        loss_hi, _ = binary_cross_entropy(1e4, 1)
        loss_lo, _ = binary_cross_entropy(-1e4, 0)
        assert loss_hi == pytest.approx(0.0, abs=1e-12)
        assert loss_lo == pytest.approx(0.0, abs=1e-12)

    @given(st.floats(-30, 30))
    def test_loss_nonnegative(self, z):
        loss, _ = binary_cross_entropy(z, 1)
        assert loss >= 0.0

    def test_rows_mean_and_grad(self):
        logits = np.array([0.0, 0.0, 0.0])
        labels = np.array([1, 0, 1])
        loss, grad = binary_cross_entropy_rows(logits, labels)
        assert loss == pytest.approx(math.log(2.0))
        np.testing.assert_allclose(grad, np.array([-0.5, 0.5, -0.5]) / 3.0)

    def test_rows_reject_non_binary(self):
        with pytest.raises(ValueError, match="binary"):
            binary_cross_entropy_rows(np.zeros(2), np.array([0.0, 0.5]))
