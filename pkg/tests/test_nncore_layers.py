import numpy as np
import pytest
from hypothesis import given, strategies as st

from anatreport.nncore import (
    DenseLayer,
    Embedding,
    LayerNorm,
    ShapeError,
    attention,
    sigmoid,
)


def make_dense(w, b, activation):
    layer = DenseLayer(np.shape(w)[0], np.shape(w)[1], activation, np.random.default_rng(0))
    layer.weight.value = np.asarray(w, dtype=np.float64)
    layer.bias.value = np.asarray(b, dtype=np.float64)
    return layer


class TestDenseForward:
    def test_identity_passthrough(self):
        layer = make_dense(np.eye(2), np.zeros(2), "identity")
        x = np.array([[1.0, -2.0], [3.0, 0.5]])
        np.testing.assert_array_equal(layer.forward(x), x)

    def test_zero_weight_constant_bias(self):
        c = 3.25
        layer = make_dense(np.zeros((3, 4)), np.full(4, c), "identity")
        out = layer.forward(np.random.default_rng(1).normal(size=(5, 3)))
        np.testing.assert_array_equal(out, np.full((5, 4), c))

    def test_manual_matrix_arithmetic(self):
        # [1,2,3] @ [[1,0],[0,1],[1,1]] = [1+3, 2+3] = [4, 5]; relu is a no-op here.
        layer = make_dense([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]], [0.0, 0.0], "relu")
        out = layer.forward(np.array([[1.0, 2.0, 3.0]]))
        np.testing.assert_allclose(out, [[4.0, 5.0]])

    def test_shape_mismatch_names_both_shapes(self):
        layer = make_dense(np.zeros((3, 2)), np.zeros(2), "identity")
        with pytest.raises(ShapeError, match=r"\(1, 4\).*\(3, 2\)"):
            layer.forward(np.ones((1, 4)))

    def test_rejects_nan_input(self):
        layer = make_dense(np.eye(2), np.zeros(2), "identity")
        with pytest.raises(ValueError, match="non-finite"):
            layer.forward(np.array([[np.nan, 1.0]]))

    def test_unknown_activation(self):
        with pytest.raises(ValueError, match="activation"):
            DenseLayer(2, 2, "tanh")

    @given(st.integers(0, 2**32 - 1))
    def test_relu_nonnegative(self, seed):
        rng = np.random.default_rng(seed)
        layer = DenseLayer(4, 3, "relu", rng)
        out = layer.forward(rng.normal(size=(6, 4), scale=3.0))
        assert np.all(out >= 0.0)

    @given(st.floats(-30, 30))
    def test_sigmoid_open_unit_interval(self, x):
        # Beyond |x| ~ 37 float64 rounds sigmoid to exactly 0/1, so the open
        # interval is only checkable where the format can represent it.
        y = sigmoid(np.array([x]))[0]
        assert 0.0 < y < 1.0

    def test_sigmoid_extreme_logits_saturate_in_range(self):
        y = sigmoid(np.array([-1e4, 1e4]))
        assert np.all((y >= 0.0) & (y <= 1.0)) and np.all(np.isfinite(y))


class TestLayerNorm:
    def test_normalizes_rows(self):
        ln = LayerNorm(8)
        x = np.random.default_rng(2).normal(size=(4, 8), loc=5.0, scale=3.0)
        out = ln.forward(x)
        np.testing.assert_allclose(out.mean(axis=1), 0.0, atol=1e-12)
        np.testing.assert_allclose(out.var(axis=1), 1.0, atol=1e-4)

    def test_scale_and_shift_applied(self):
        ln = LayerNorm(4)
        ln.gamma.value[...] = 2.0
        ln.beta.value[...] = 1.0
        out = ln.forward(np.array([[1.0, 2.0, 3.0, 4.0]]))
        base = LayerNorm(4).forward(np.array([[1.0, 2.0, 3.0, 4.0]]))
        np.testing.assert_allclose(out, 2.0 * base + 1.0)


class TestEmbedding:
    def test_lookup_rows(self):
        emb = Embedding(10, 4, np.random.default_rng(3))
        ids = np.array([3, 3, 7])
        out = emb.forward(ids)
        np.testing.assert_array_equal(out[0], out[1])
        np.testing.assert_array_equal(out, emb.weight.value[ids])

    def test_out_of_range_id(self):
        emb = Embedding(5, 2)
        with pytest.raises(IndexError):
            emb.forward(np.array([5]))

    def test_backward_accumulates_duplicates(self):
        emb = Embedding(5, 2)
        emb.forward(np.array([1, 1]))
        emb.backward(np.ones((2, 2)))
        np.testing.assert_array_equal(emb.weight.grad[1], [2.0, 2.0])


class TestAttention:
    def test_single_key_value_row(self):
        v = np.array([[5.0, -1.0, 2.0]])
        k = np.array([[0.3, 0.7]])
        q = np.random.default_rng(4).normal(size=(4, 2))
        out, weights = attention(q, k, v)
        np.testing.assert_allclose(out, np.repeat(v, 4, axis=0))
        np.testing.assert_allclose(weights, 1.0)

    def test_zero_query_gives_row_mean(self):
        rng = np.random.default_rng(5)
        k = rng.normal(size=(6, 3))
        v = rng.normal(size=(6, 2))
        out, weights = attention(np.zeros((1, 3)), k, v)
        np.testing.assert_allclose(weights, 1.0 / 6.0)
        np.testing.assert_allclose(out[0], v.mean(axis=0))

    def test_hand_computed_two_position_softmax(self):
        # Scores (0, ln 3) -> weights (1/4, 3/4). Keys chosen so q.k/sqrt(d) hits
        # exactly those scores: d=1, q=[1], k=[0] and k=[ln 3].
        q = np.array([[1.0]])
        k = np.array([[0.0], [np.log(3.0)]])
        v = np.array([[1.0, 0.0], [0.0, 1.0]])
        out, weights = attention(q, k, v)
        np.testing.assert_allclose(weights, [[0.25, 0.75]], atol=1e-12)
        np.testing.assert_allclose(out, [[0.25, 0.75]], atol=1e-12)

    def test_rows_sum_to_one_and_mask_zeroes_future(self):
        rng = np.random.default_rng(6)
        x = rng.normal(size=(5, 4))
        _, weights = attention(x, x, x, causal=True)
        np.testing.assert_allclose(weights.sum(axis=1), 1.0, atol=1e-9)
        assert np.all(weights[np.triu_indices(5, k=1)] == 0.0)

    def test_causal_requires_square(self):
        with pytest.raises(ShapeError):
            attention(np.ones((2, 3)), np.ones((4, 3)), np.ones((4, 3)), causal=True)

    def test_key_dim_mismatch(self):
        with pytest.raises(ShapeError):
            attention(np.ones((2, 3)), np.ones((2, 4)), np.ones((2, 4)))
