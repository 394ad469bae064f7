"""Dense and recurrent layers with exact analytic backprop.

Everything is batch-first float64 numpy: dense inputs are (B, n_in),
sequence inputs are (B, T, n_in). Each layer owns its parameters and
accumulates gradients of the same shapes in .grads; forward methods return
(output, cache) and backward methods consume that cache, so one layer
instance can appear in several passes without hidden state.
"""

from __future__ import annotations

import numpy as np

from ..errors import ShapeMismatch
from .initializers import glorot_uniform


def sigmoid(x: np.ndarray) -> np.ndarray:
    """Numerically stable logistic function."""
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


class Layer:
    """Parameter bookkeeping shared by all layers."""

    def __init__(self) -> None:
        self.params: dict[str, np.ndarray] = {}
        self.grads: dict[str, np.ndarray] = {}

    def _register(self, name: str, value: np.ndarray) -> np.ndarray:
        self.params[name] = value
        self.grads[name] = np.zeros_like(value)
        return value

    def zero_grads(self) -> None:
        for g in self.grads.values():
            g.fill(0.0)


class Dense(Layer):
    """y = act(x W^T + b) with act in {linear, tanh}."""

    def __init__(self, n_in: int, n_out: int, activation: str = "linear", *,
                 rng: np.random.Generator):
        super().__init__()
        if activation not in ("linear", "tanh"):
            raise ValueError(f"unsupported activation {activation!r}")
        self.n_in = n_in
        self.n_out = n_out
        self.activation = activation
        self.W = self._register("W", glorot_uniform((n_out, n_in), rng))
        self.b = self._register("b", np.zeros(n_out, dtype=np.float64))

    def forward(self, x: np.ndarray) -> tuple[np.ndarray, tuple]:
        if x.ndim != 2 or x.shape[1] != self.n_in:
            raise ShapeMismatch(f"expected (B, {self.n_in}), got {x.shape}")
        y = x @ self.W.T + self.b
        if self.activation == "tanh":
            y = np.tanh(y)
        return y, (x, y)

    def backward(self, dy: np.ndarray, cache: tuple) -> np.ndarray:
        x, y = cache
        dz = dy * (1.0 - y * y) if self.activation == "tanh" else dy
        self.grads["W"] += dz.T @ x
        self.grads["b"] += dz.sum(axis=0)
        return dz @ self.W


def dense_forward(layer: Dense, x: np.ndarray) -> np.ndarray:
    """Apply a dense layer to a single vector."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ShapeMismatch(f"expected a 1-D vector, got shape {x.shape}")
    y, _ = layer.forward(x[None, :])
    return y[0]


class TimeDistributedDense(Layer):
    """The same Dense applied independently at every timestep."""

    def __init__(self, n_in: int, n_out: int, activation: str = "linear", *,
                 rng: np.random.Generator):
        super().__init__()
        self.inner = Dense(n_in, n_out, activation, rng=rng)
        self.params = self.inner.params
        self.grads = self.inner.grads

    def forward(self, x: np.ndarray) -> tuple[np.ndarray, tuple]:
        B, T, n_in = x.shape
        y, cache = self.inner.forward(x.reshape(B * T, n_in))
        return y.reshape(B, T, self.inner.n_out), (cache, (B, T))

    def backward(self, dy: np.ndarray, cache: tuple) -> np.ndarray:
        inner_cache, (B, T) = cache
        dx = self.inner.backward(dy.reshape(B * T, self.inner.n_out), inner_cache)
        return dx.reshape(B, T, self.inner.n_in)


class LSTMLayer(Layer):
    """Standard LSTM cell unrolled over a sequence.

    Gate pre-activations stack as rows [i, f, g, o] of Wx (4H, n_in) and
    Wh (4H, H):

        i = sigmoid(a_i)   f = sigmoid(a_f)   g = tanh(a_g)   o = sigmoid(a_o)
        c_t = f * c_{t-1} + i * g
        h_t = o * tanh(c_t)

    The forget-gate bias starts at +1.0 so early training keeps cell state.
    """

    def __init__(self, n_in: int, hidden: int, *, rng: np.random.Generator):
        super().__init__()
        self.n_in = n_in
        self.hidden = hidden
        self.Wx = self._register("Wx", glorot_uniform((4 * hidden, n_in), rng))
        self.Wh = self._register("Wh", glorot_uniform((4 * hidden, hidden), rng))
        b = np.zeros(4 * hidden, dtype=np.float64)
        b[hidden : 2 * hidden] = 1.0
        self.b = self._register("b", b)

    def initial_state(self, batch: int) -> tuple[np.ndarray, np.ndarray]:
        return (
            np.zeros((batch, self.hidden), dtype=np.float64),
            np.zeros((batch, self.hidden), dtype=np.float64),
        )

    def step(
        self, x_t: np.ndarray, state: tuple[np.ndarray, np.ndarray]
    ) -> tuple[np.ndarray, tuple[np.ndarray, np.ndarray], tuple]:
        h_prev, c_prev = state
        a = x_t @ self.Wx.T + h_prev @ self.Wh.T + self.b
        H = self.hidden
        i = sigmoid(a[:, :H])
        f = sigmoid(a[:, H : 2 * H])
        g = np.tanh(a[:, 2 * H : 3 * H])
        o = sigmoid(a[:, 3 * H :])
        c = f * c_prev + i * g
        tc = np.tanh(c)
        h = o * tc
        return h, (h, c), (x_t, h_prev, c_prev, i, f, g, o, tc)

    def forward_sequence(self, x: np.ndarray) -> tuple[np.ndarray, list]:
        if x.ndim != 3 or x.shape[2] != self.n_in:
            raise ShapeMismatch(f"expected (B, T, {self.n_in}), got {x.shape}")
        B, T, _ = x.shape
        state = self.initial_state(B)
        outputs = np.empty((B, T, self.hidden), dtype=np.float64)
        caches = []
        for t in range(T):
            h, state, cache = self.step(x[:, t, :], state)
            outputs[:, t, :] = h
            caches.append(cache)
        return outputs, caches

    def backward_sequence(self, dh_seq: np.ndarray, caches: list) -> np.ndarray:
        B, T, H = dh_seq.shape
        dx = np.empty((B, T, self.n_in), dtype=np.float64)
        dh_next = np.zeros((B, H), dtype=np.float64)
        dc_next = np.zeros((B, H), dtype=np.float64)
        for t in range(T - 1, -1, -1):
            x_t, h_prev, c_prev, i, f, g, o, tc = caches[t]
            dh = dh_seq[:, t, :] + dh_next
            do = dh * tc
            dc = dh * o * (1.0 - tc * tc) + dc_next
            di = dc * g
            df = dc * c_prev
            dg = dc * i
            da = np.concatenate(
                [
                    di * i * (1.0 - i),
                    df * f * (1.0 - f),
                    dg * (1.0 - g * g),
                    do * o * (1.0 - o),
                ],
                axis=1,
            )
            self.grads["Wx"] += da.T @ x_t
            self.grads["Wh"] += da.T @ h_prev
            self.grads["b"] += da.sum(axis=0)
            dx[:, t, :] = da @ self.Wx
            dh_next = da @ self.Wh
            dc_next = dc * f
        return dx


class GRULayer(Layer):
    """GRU cell with the reset gate applied before the recurrent product.

    Gate pre-activations stack as rows [z, r, n] of Wx (3H, n_in) and
    Wh (3H, H):

        z = sigmoid(a_z)               (update gate)
        r = sigmoid(a_r)               (reset gate)
        n = tanh(Wn x + Un (r * h_{t-1}) + b_n)
        h_t = z * h_{t-1} + (1 - z) * n
    """

    def __init__(self, n_in: int, hidden: int, *, rng: np.random.Generator):
        super().__init__()
        self.n_in = n_in
        self.hidden = hidden
        self.Wx = self._register("Wx", glorot_uniform((3 * hidden, n_in), rng))
        self.Wh = self._register("Wh", glorot_uniform((3 * hidden, hidden), rng))
        self.b = self._register("b", np.zeros(3 * hidden, dtype=np.float64))

    def initial_state(self, batch: int) -> np.ndarray:
        return np.zeros((batch, self.hidden), dtype=np.float64)

    def step(
        self, x_t: np.ndarray, state: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray, tuple]:
        h_prev = state
        H = self.hidden
        xa = x_t @ self.Wx.T + self.b
        zr = h_prev @ self.Wh[: 2 * H].T
        z = sigmoid(xa[:, :H] + zr[:, :H])
        r = sigmoid(xa[:, H : 2 * H] + zr[:, H:])
        hr = r * h_prev
        n = np.tanh(xa[:, 2 * H :] + hr @ self.Wh[2 * H :].T)
        h = z * h_prev + (1.0 - z) * n
        return h, h, (x_t, h_prev, z, r, hr, n)

    def forward_sequence(self, x: np.ndarray) -> tuple[np.ndarray, list]:
        if x.ndim != 3 or x.shape[2] != self.n_in:
            raise ShapeMismatch(f"expected (B, T, {self.n_in}), got {x.shape}")
        B, T, _ = x.shape
        state = self.initial_state(B)
        outputs = np.empty((B, T, self.hidden), dtype=np.float64)
        caches = []
        for t in range(T):
            h, state, cache = self.step(x[:, t, :], state)
            outputs[:, t, :] = h
            caches.append(cache)
        return outputs, caches

    def backward_sequence(self, dh_seq: np.ndarray, caches: list) -> np.ndarray:
        B, T, H = dh_seq.shape
        dx = np.empty((B, T, self.n_in), dtype=np.float64)
        dh_next = np.zeros((B, H), dtype=np.float64)
        for t in range(T - 1, -1, -1):
            x_t, h_prev, z, r, hr, n = caches[t]
            dh = dh_seq[:, t, :] + dh_next
            dz = dh * (h_prev - n)
            dn = dh * (1.0 - z)
            da_n = dn * (1.0 - n * n)
            dhr = da_n @ self.Wh[2 * H :]
            dr = dhr * h_prev
            da_z = dz * z * (1.0 - z)
            da_r = dr * r * (1.0 - r)
            da = np.concatenate([da_z, da_r, da_n], axis=1)
            self.grads["Wx"] += da.T @ x_t
            self.grads["Wh"][:H] += da_z.T @ h_prev
            self.grads["Wh"][H : 2 * H] += da_r.T @ h_prev
            self.grads["Wh"][2 * H :] += da_n.T @ hr
            self.grads["b"] += da.sum(axis=0)
            dx[:, t, :] = da @ self.Wx
            dh_next = dh * z + dhr * r + da_z @ self.Wh[:H] + da_r @ self.Wh[H : 2 * H]
        return dx


RecurrentLayer = LSTMLayer | GRULayer


def rnn_forward(
    cell: LSTMLayer | GRULayer, sequence
) -> tuple[list[np.ndarray], np.ndarray]:
    """Run one unbatched sequence through a recurrent cell.

    Returns the per-step hidden states and the final hidden state; an empty
    sequence yields ([], zeros).
    """
    seq = np.asarray(sequence, dtype=np.float64)
    if seq.size == 0:
        return [], np.zeros(cell.hidden, dtype=np.float64)
    if seq.ndim != 2 or seq.shape[1] != cell.n_in:
        raise ShapeMismatch(f"expected (T, {cell.n_in}), got {seq.shape}")
    outputs, _ = cell.forward_sequence(seq[None, :, :])
    steps = [outputs[0, t, :].copy() for t in range(seq.shape[0])]
    return steps, steps[-1]
