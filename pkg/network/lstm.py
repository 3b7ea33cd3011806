"""
LSTM recurrence and its backpropagation through time, on batches of
time-major sequences ``B x m x d``.

The cell is the canonical LSTM with a forget gate::

    i, f, o = sigmoid(W_{i,f,o} x_t + U_{i,f,o} y_{t-1} + b_{i,f,o})
    g       = tanh(W_g x_t + U_g y_{t-1} + b_g)
    c_t     = f * c_{t-1} + i * g
    y_t     = o * tanh(c_t)

with zero initial hidden and cell states. The backward direction runs the
same recurrence over the time-reversed sequence and reverses the outputs
back, so ``y_t`` of that direction depends on ``x_t ... x_m``.
"""
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from network.exceptions import ShapeMismatch
from network.models import Direction


@dataclass(frozen=True, eq=False)
class LstmCache:
    inputs: np.ndarray
    hidden: np.ndarray
    cells: np.ndarray
    gates: np.ndarray
    reverse: bool


def _split(z, h):
    return z[..., :h], z[..., h:2 * h], z[..., 2 * h:3 * h], z[..., 3 * h:]


def lstm_sequence(x, params, reverse=False):
    """Run one direction over ``x`` (``B x m x d``); returns outputs ``B x m x h`` and a cache."""
    if x.ndim != 3 or x.shape[2] != params.input_size:
        raise ShapeMismatch(f'B x m x {params.input_size}', x.shape)
    if reverse:
        x = x[:, ::-1]
    batch, steps, _ = x.shape
    h = params.hidden
    hidden = np.zeros((batch, steps + 1, h))
    cells = np.zeros((batch, steps + 1, h))
    gates = np.empty((batch, steps, 4 * h))
    projected = x @ params.W.T + params.b
    for t in range(steps):
        z = projected[:, t] + hidden[:, t] @ params.U.T
        i, f, g, o = _split(z, h)
        i, f, g, o = expit(i), expit(f), np.tanh(g), expit(o)
        cells[:, t + 1] = f * cells[:, t] + i * g
        hidden[:, t + 1] = o * np.tanh(cells[:, t + 1])
        gates[:, t] = np.concatenate([i, f, g, o], axis=1)
    outputs = hidden[:, 1:]
    if reverse:
        outputs = outputs[:, ::-1]
    return outputs, LstmCache(inputs=x, hidden=hidden, cells=cells, gates=gates, reverse=reverse)


def lstm_sequence_backward(d_outputs, params, cache):
    """
    Gradients of a scalar loss given ``d_outputs`` (``B x m x h``, original
    time order). Returns ``(d_inputs, {'W': .., 'U': .., 'b': ..})``.
    """
    if cache.reverse:
        d_outputs = d_outputs[:, ::-1]
    x, hidden, cells, gates = cache.inputs, cache.hidden, cache.cells, cache.gates
    batch, steps, _ = x.shape
    h = params.hidden

    dW, dU, db = np.zeros_like(params.W), np.zeros_like(params.U), np.zeros_like(params.b)
    d_inputs = np.empty_like(x)
    dh_next = np.zeros((batch, h))
    dc_next = np.zeros((batch, h))
    for t in reversed(range(steps)):
        i, f, g, o = _split(gates[:, t], h)
        tanh_c = np.tanh(cells[:, t + 1])
        dh = d_outputs[:, t] + dh_next
        dc = dc_next + dh * o * (1.0 - tanh_c ** 2)
        dz = np.concatenate([
            dc * g * i * (1.0 - i),
            dc * cells[:, t] * f * (1.0 - f),
            dc * i * (1.0 - g ** 2),
            dh * tanh_c * o * (1.0 - o),
        ], axis=1)
        dc_next = dc * f
        dW += dz.T @ x[:, t]
        dU += dz.T @ hidden[:, t]
        db += dz.sum(axis=0)
        d_inputs[:, t] = dz @ params.W
        dh_next = dz @ params.U
    if cache.reverse:
        d_inputs = d_inputs[:, ::-1]
    return d_inputs, {'W': dW, 'U': dU, 'b': db}


def lstm_forward(cycle, params, direction=Direction.FORWARD):
    """
    Encode one cycle given channel-major (``d x m``, as stored on a
    :class:`~cohort.models.BreathingCycle`).

    Returns the ``m x h`` output sequence and the final ``(hidden, cell)``
    state, where "final" is the last step processed: ``t = m`` forward,
    ``t = 1`` backward.
    """
    cycle = np.asarray(cycle, dtype=np.float64)
    if cycle.ndim != 2:
        raise ShapeMismatch(f'{params.input_size} x m', cycle.shape)
    reverse = Direction(direction) == Direction.BACKWARD
    outputs, cache = lstm_sequence(cycle.T[None], params, reverse=reverse)
    return outputs[0], (cache.hidden[0, -1].copy(), cache.cells[0, -1].copy())
