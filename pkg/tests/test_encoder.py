import math

import numpy as np
import pytest

from lstmcrf.encoder import BiEncoder, lstm_step, rnn_step, softmax_output
from lstmcrf.exceptions import DimensionError, UsageError
from lstmcrf.gradcheck import check_model, small_model
from lstmcrf.nncore import Param, finite_diff_check, make_rng

# hand-computed with 40-digit arithmetic: unit weights, x=1, h_prev=0.5, c_prev=0.2
LSTM_UNIT_C = 0.90354100459002172058
LSTM_UNIT_H = 0.58703292656219648695


def scalar_sigmoid(v):
    return 1.0 / (1.0 + math.exp(-v))


class TestRnnStep:
    def test_zero_weights(self):
        h = rnn_step(np.zeros((3, 2)), np.zeros((3, 3)), np.zeros(3), [5.0, -7.0], np.ones(3))
        np.testing.assert_array_equal(h, [0.5, 0.5, 0.5])

    def test_hand_case(self):
        h = rnn_step(np.eye(2), np.zeros((2, 2)), np.zeros(2), [0.0, 2.0], np.zeros(2))
        assert h[0] == 0.5
        assert h[1] == pytest.approx(0.8807970779778824, abs=1e-15)

    def test_against_scalar_loop(self):
        rng = make_rng(0)
        H, d = 4, 3
        U, V, b = rng.normal(size=(H, d)), rng.normal(size=(H, H)), rng.normal(size=H)
        x, hp = rng.normal(size=d), rng.normal(size=H)
        ref = []
        for i in range(H):
            z = b[i]
            for j in range(d):
                z += U[i, j] * x[j]
            for j in range(H):
                z += V[i, j] * hp[j]
            ref.append(scalar_sigmoid(z))
        np.testing.assert_allclose(rnn_step(U, V, b, x, hp), ref, rtol=0, atol=1e-12)

    def test_shape_error(self):
        with pytest.raises(DimensionError):
            rnn_step(np.zeros((3, 2)), np.zeros((3, 3)), np.zeros(3), [1.0], np.zeros(3))


class TestLstmStep:
    def test_zero_fixed_point(self):
        h, c = lstm_step(np.zeros((8, 3)), np.zeros((8, 2)), np.zeros(8), [1.0, 2.0, 3.0],
                         np.zeros(2), np.zeros(2))
        np.testing.assert_array_equal(h, 0.0)
        np.testing.assert_array_equal(c, 0.0)

    def test_unit_weights_hand_case(self):
        h, c = lstm_step(np.ones((4, 1)), np.ones((4, 1)), np.zeros(4), [1.0], [0.5], [0.2])
        assert c[0] == pytest.approx(LSTM_UNIT_C, abs=1e-14)
        assert h[0] == pytest.approx(LSTM_UNIT_H, abs=1e-14)

    def test_hidden_in_open_interval(self):
        rng = make_rng(3)
        for _ in range(50):
            Wx, Wh = rng.normal(scale=5, size=(12, 2)), rng.normal(scale=5, size=(12, 3))
            h, _ = lstm_step(Wx, Wh, rng.normal(size=12), rng.normal(scale=10, size=2),
                             rng.uniform(-1, 1, 3), rng.normal(size=3))
            assert np.all(np.abs(h) < 1.0)


def make_encoder(cell="lstm", d=4, H=3, K=5, seed=0):
    return BiEncoder(d, H, K, cell=cell, rng=make_rng(seed), init="unit")


class TestEncode:
    def test_length_one(self):
        enc = make_encoder()
        out = enc.encode(make_rng(1).normal(size=(1, 4)))
        assert out.emissions.shape == (1, 5)

    @pytest.mark.parametrize("cell", ["lstm", "rnn"])
    def test_concatenated_width(self, cell):
        enc = make_encoder(cell)
        Hcat, _, _ = enc.hidden_states(make_rng(2).normal(size=(6, 4)))
        assert Hcat.shape == (6, 6)

    def test_rnn_states_in_sigmoid_range(self):
        enc = make_encoder("rnn")
        Hcat, _, _ = enc.hidden_states(make_rng(2).normal(scale=20, size=(7, 4)))
        assert np.all((Hcat >= 0) & (Hcat <= 1))

    @pytest.mark.parametrize("cell", ["lstm", "rnn"])
    def test_reversal_swaps_directions(self, cell):
        for seed in range(10):
            enc = make_encoder(cell, seed=seed)
            swapped = make_encoder(cell, seed=seed)
            swapped.fwd, swapped.bwd = enc.bwd, enc.fwd
            H = enc.hidden_size
            swapped.W = Param("proj.W", np.hstack([enc.W.value[:, H:], enc.W.value[:, :H]]))
            swapped.b = enc.b
            X = make_rng(100 + seed).normal(size=(6, 4))
            np.testing.assert_allclose(swapped.encode(X[::-1]).emissions,
                                       enc.encode(X).emissions[::-1], atol=1e-12)

    @pytest.mark.parametrize("cell", ["lstm", "rnn"])
    def test_causal_halves(self, cell):
        enc = make_encoder(cell)
        X = make_rng(5).normal(size=(6, 4))
        base, _, _ = enc.hidden_states(X)
        X2 = X.copy()
        X2[4] += 1.0
        pert, _, _ = enc.hidden_states(X2)
        H = enc.hidden_size
        np.testing.assert_array_equal(pert[:4, :H], base[:4, :H])
        np.testing.assert_array_equal(pert[5:, H:], base[5:, H:])
        assert not np.array_equal(pert[4, :H], base[4, :H])

    def test_eval_deterministic(self):
        enc = make_encoder()
        X = make_rng(4).normal(size=(5, 4))
        np.testing.assert_array_equal(enc.encode(X).emissions, enc.encode(X).emissions)

    def test_empty_input(self):
        with pytest.raises(DimensionError):
            make_encoder().encode(np.zeros((0, 4)))

    def test_dropout_only_in_train(self):
        enc = make_encoder()
        X = make_rng(4).normal(size=(5, 4))
        ev = enc.encode(X, dropout=0.5, rng=make_rng(0), train=False).emissions
        np.testing.assert_array_equal(ev, enc.encode(X).emissions)
        tr = enc.encode(X, dropout=0.5, rng=make_rng(0), train=True).emissions
        assert not np.array_equal(tr, ev)


class TestBackward:
    def test_eval_output_rejected(self):
        enc = make_encoder()
        out = enc.encode(np.ones((2, 4)))
        with pytest.raises(UsageError):
            enc.backward(out, np.zeros((2, 5)))

    def test_zero_upstream(self):
        enc = make_encoder()
        out = enc.encode(make_rng(0).normal(size=(4, 4)), train=True)
        dX = enc.backward(out, np.zeros((4, 5)))
        assert np.all(dX == 0)
        assert all(np.all(p.grad == 0) for p in enc.params)

    @pytest.mark.parametrize("cell", ["lstm", "rnn"])
    def test_input_gradient_nonzero(self, cell):
        enc = make_encoder(cell)
        out = enc.encode(make_rng(0).normal(size=(5, 4)), train=True)
        d = np.zeros((5, 5))
        d[2, 1] = 1.0
        dX = enc.backward(out, d)
        assert np.any(dX[2] != 0)

    @pytest.mark.parametrize("cell", ["lstm", "rnn"])
    def test_gradients_with_replayed_dropout(self, cell):
        enc = make_encoder(cell, seed=3)
        X = Param("inputs", make_rng(8).normal(size=(5, 4)))
        target = make_rng(9).normal(size=(5, 5))

        def loss():
            out = enc.encode(X.value, dropout=0.3, rng=make_rng(42), train=True)
            X.grad += enc.backward(out, target)
            return float(np.sum(out.emissions * target))

        worst, per = finite_diff_check(loss, enc.params + [X], samples=40)
        assert worst < 1e-6, per

    @pytest.mark.parametrize("cell", ["lstm", "rnn"])
    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_full_model_finite_differences(self, cell, seed):
        worst, per = check_model(small_model(cell=cell, seed=seed), seed=seed)
        assert worst < 1e-4, per
        assert "embeddings" in per and "crf.transitions" in per

    def test_deterministic_gradients(self):
        grads = []
        for _ in range(2):
            m = small_model(seed=4)
            ids = np.array([1, 2, 3, 2])
            m._loss_and_grad(ids, [0, 1, 2, 3], train=False)
            grads.append([p.grad.copy() for p in m.params_])
        for a, b in zip(*grads):
            np.testing.assert_array_equal(a, b)


class TestSoftmaxOutput:
    def test_rows(self):
        out = make_encoder().encode(make_rng(6).normal(size=(4, 4)))
        probs = softmax_output(out)
        np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-12)
        np.testing.assert_array_equal(np.argmax(probs, 1), np.argmax(out.emissions, 1))

    def test_uniform_row(self):
        from lstmcrf.encoder import EncoderOutput

        probs = softmax_output(EncoderOutput(np.full((1, 4), 3.0), False))
        np.testing.assert_allclose(probs, 0.25, atol=1e-15)
