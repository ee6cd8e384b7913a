"""Bidirectional recurrent encoder producing per-token emission scores.

Two cell kinds are available. ``RNNCell`` is the plain recurrent layer
``h_t = sigmoid(U x_t + V h_{t-1} + b)``. ``LSTMCell`` is the usual four-gate
LSTM without peepholes; its weights are stored stacked in the gate order
input, forget, output, candidate. Both directions start from zero states and
their hidden vectors are concatenated (forward half first) before dropout
and the linear projection to tag scores.

Backpropagation through time is written out by hand; ``backward`` consumes
the cache of a train-mode ``encode`` call.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigError, DimensionError, UsageError
from .nncore import DTYPE, Param, dropout_mask, sigmoid, softmax, uniform_init


def _check_vec(x, n, what):
    if x.ndim != 1 or x.shape[0] != n:
        raise DimensionError(f"{what}: expected a vector of length {n}, got shape {x.shape}")


def rnn_step(U, V, b, x_t, h_prev):
    """One step of the sigmoid recurrent cell."""
    x_t = np.asarray(x_t, dtype=DTYPE)
    h_prev = np.asarray(h_prev, dtype=DTYPE)
    H, d = U.shape
    _check_vec(x_t, d, "x_t")
    _check_vec(h_prev, H, "h_prev")
    if V.shape != (H, H) or b.shape != (H,):
        raise DimensionError("inconsistent recurrent cell shapes")
    return sigmoid(U @ x_t + V @ h_prev + b)


def lstm_step(Wx, Wh, b, x_t, h_prev, c_prev):
    """One LSTM step with stacked gate weights; returns ``(h_t, c_t)``."""
    x_t = np.asarray(x_t, dtype=DTYPE)
    h_prev = np.asarray(h_prev, dtype=DTYPE)
    c_prev = np.asarray(c_prev, dtype=DTYPE)
    H4, d = Wx.shape
    H = H4 // 4
    if H4 != 4 * H or Wh.shape != (H4, H) or b.shape != (H4,):
        raise DimensionError("inconsistent LSTM cell shapes")
    _check_vec(x_t, d, "x_t")
    _check_vec(h_prev, H, "h_prev")
    _check_vec(c_prev, H, "c_prev")
    z = Wx @ x_t + Wh @ h_prev + b
    i = sigmoid(z[:H])
    f = sigmoid(z[H:2 * H])
    o = sigmoid(z[2 * H:3 * H])
    g = np.tanh(z[3 * H:])
    c = f * c_prev + i * g
    return o * np.tanh(c), c


class RNNCell:
    kind = "rnn"

    def __init__(self, input_dim, hidden_size, rng, prefix="rnn", init="unit"):
        self.input_dim = input_dim
        self.hidden_size = hidden_size
        H, d = hidden_size, input_dim
        self.U = Param(f"{prefix}.U", uniform_init(rng, (H, d), init))
        self.V = Param(f"{prefix}.V", uniform_init(rng, (H, H), init))
        self.b = Param(f"{prefix}.b", np.zeros(H))

    @property
    def params(self):
        return [self.U, self.V, self.b]

    def forward(self, X):
        T = X.shape[0]
        H = self.hidden_size
        pre = X @ self.U.value.T + self.b.value
        hs = np.empty((T, H))
        h = np.zeros(H)
        V = self.V.value
        for t in range(T):
            h = sigmoid(pre[t] + V @ h)
            hs[t] = h
        return hs, (X, hs)

    def backward(self, dhs, cache):
        X, hs = cache
        T, H = hs.shape
        V = self.V.value
        dz = np.empty((T, H))
        dh_next = np.zeros(H)
        for t in range(T - 1, -1, -1):
            dh = dhs[t] + dh_next
            h = hs[t]
            dz[t] = dh * h * (1.0 - h)
            dh_next = V.T @ dz[t]
        h_prev = np.vstack([np.zeros((1, H)), hs[:-1]])
        self.U.grad += dz.T @ X
        self.V.grad += dz.T @ h_prev
        self.b.grad += dz.sum(axis=0)
        return dz @ self.U.value


class LSTMCell:
    kind = "lstm"

    def __init__(self, input_dim, hidden_size, rng, prefix="lstm", init="unit", forget_bias=1.0):
        self.input_dim = input_dim
        self.hidden_size = hidden_size
        H, d = hidden_size, input_dim
        # fan counted per gate block, not over the stacked 4H rows
        self.Wx = Param(f"{prefix}.Wx", uniform_init(rng, (4 * H, d), init, fan=(d, H)))
        self.Wh = Param(f"{prefix}.Wh", uniform_init(rng, (4 * H, H), init, fan=(H, H)))
        b = np.zeros(4 * H)
        b[H:2 * H] = forget_bias
        self.b = Param(f"{prefix}.b", b)

    @property
    def params(self):
        return [self.Wx, self.Wh, self.b]

    def forward(self, X):
        T = X.shape[0]
        H = self.hidden_size
        pre = X @ self.Wx.value.T + self.b.value
        Wh = self.Wh.value
        gates = np.empty((T, 4 * H))
        cs = np.empty((T, H))
        hs = np.empty((T, H))
        h = np.zeros(H)
        c = np.zeros(H)
        for t in range(T):
            z = pre[t] + Wh @ h
            a = gates[t]
            a[:3 * H] = sigmoid(z[:3 * H])
            a[3 * H:] = np.tanh(z[3 * H:])
            c = a[H:2 * H] * c + a[:H] * a[3 * H:]
            h = a[2 * H:3 * H] * np.tanh(c)
            cs[t] = c
            hs[t] = h
        return hs, (X, gates, cs, hs)

    def backward(self, dhs, cache):
        X, gates, cs, hs = cache
        T, H = hs.shape
        Wh = self.Wh.value
        dz = np.empty((T, 4 * H))
        dh_next = np.zeros(H)
        dc_next = np.zeros(H)
        for t in range(T - 1, -1, -1):
            i = gates[t, :H]
            f = gates[t, H:2 * H]
            o = gates[t, 2 * H:3 * H]
            g = gates[t, 3 * H:]
            c_prev = cs[t - 1] if t > 0 else np.zeros(H)
            tc = np.tanh(cs[t])
            dh = dhs[t] + dh_next
            dc = dc_next + dh * o * (1.0 - tc * tc)
            d = dz[t]
            d[:H] = dc * g * i * (1.0 - i)
            d[H:2 * H] = dc * c_prev * f * (1.0 - f)
            d[2 * H:3 * H] = dh * tc * o * (1.0 - o)
            d[3 * H:] = dc * i * (1.0 - g * g)
            dc_next = dc * f
            dh_next = Wh.T @ d
        h_prev = np.vstack([np.zeros((1, H)), hs[:-1]])
        self.Wx.grad += dz.T @ X
        self.Wh.grad += dz.T @ h_prev
        self.b.grad += dz.sum(axis=0)
        return dz @ self.Wx.value


CELLS = {"rnn": RNNCell, "lstm": LSTMCell}


@dataclass
class EncoderOutput:
    emissions: np.ndarray
    train: bool
    cache: tuple = None

    @property
    def T(self):
        return self.emissions.shape[0]


class BiEncoder:
    """Forward and backward cells plus the projection to ``n_tags`` scores."""

    def __init__(self, input_dim, hidden_size, n_tags, cell="lstm", rng=None, init="unit"):
        if cell not in CELLS:
            raise ConfigError(f"unknown cell kind {cell!r}; expected one of {sorted(CELLS)}")
        if input_dim < 1 or hidden_size < 1 or n_tags < 1:
            raise ConfigError("input_dim, hidden_size and n_tags must be >= 1")
        cls = CELLS[cell]
        self.cell = cell
        self.input_dim = input_dim
        self.hidden_size = hidden_size
        self.n_tags = n_tags
        self.init = init
        self.fwd = cls(input_dim, hidden_size, rng, prefix=f"fwd.{cell}", init=init)
        self.bwd = cls(input_dim, hidden_size, rng, prefix=f"bwd.{cell}", init=init)
        self.W = Param("proj.W", uniform_init(rng, (n_tags, 2 * hidden_size), init))
        self.b = Param("proj.b", np.zeros(n_tags))

    @property
    def params(self):
        return self.fwd.params + self.bwd.params + [self.W, self.b]

    def hidden_states(self, X):
        """Concatenated ``[forward; backward]`` states, shape ``(T, 2H)``."""
        hf, cf = self.fwd.forward(X)
        hb_rev, cb = self.bwd.forward(X[::-1])
        return np.hstack([hf, hb_rev[::-1]]), cf, cb

    def encode(self, inputs, dropout=0.0, rng=None, train=False):
        X = np.asarray(inputs, dtype=DTYPE)
        if X.ndim != 2 or X.shape[0] == 0:
            raise DimensionError("encode needs a non-empty (T, d) input")
        if X.shape[1] != self.input_dim:
            raise DimensionError(f"input dim {X.shape[1]} != encoder input dim {self.input_dim}")
        Hcat, cf, cb = self.hidden_states(X)
        mask = None
        if train and dropout > 0.0:
            mask = np.stack([dropout_mask(Hcat.shape[1], dropout, rng) for _ in range(X.shape[0])])
            Hd = Hcat * mask
        else:
            Hd = Hcat
        emissions = Hd @ self.W.value.T + self.b.value
        cache = (Hd, mask, cf, cb) if train else None
        return EncoderOutput(emissions, train, cache)

    def backward(self, output, d_emissions):
        """Accumulate parameter gradients; return the gradient w.r.t. the inputs."""
        if not output.train or output.cache is None:
            raise UsageError("backward needs the output of a train-mode encode")
        d_emissions = np.asarray(d_emissions, dtype=DTYPE)
        if d_emissions.shape != output.emissions.shape:
            raise DimensionError("d_emissions shape does not match the emissions")
        Hd, mask, cf, cb = output.cache
        H = self.hidden_size
        self.W.grad += d_emissions.T @ Hd
        self.b.grad += d_emissions.sum(axis=0)
        dH = d_emissions @ self.W.value
        if mask is not None:
            dH = dH * mask
        dX = self.fwd.backward(dH[:, :H], cf)
        dX += self.bwd.backward(dH[::-1, H:], cb)[::-1]
        return dX


def softmax_output(output):
    """Per-token tag distribution from raw emissions."""
    return softmax(output.emissions, axis=1)
