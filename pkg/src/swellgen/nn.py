"""Parameter initialization and small composite layers over the tensor engine."""

from __future__ import annotations

import numpy as np

from . import tensor as T
from .tensor import Tensor


def glorot(rng: np.random.Generator, shape: tuple[int, ...]) -> Tensor:
    """Glorot-uniform parameter; conv shapes count receptive-field fans."""
    if len(shape) == 2:
        fan_in, fan_out = shape
    elif len(shape) == 4:
        rf = shape[2] * shape[3]
        fan_in, fan_out = shape[1] * rf, shape[0] * rf
    else:
        fan_in = fan_out = int(np.prod(shape))
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return Tensor(rng.uniform(-limit, limit, size=shape), requires_grad=True)


def zeros(shape) -> Tensor:
    return Tensor(np.zeros(shape), requires_grad=True)


def dense(x: Tensor, w: Tensor, b: Tensor | None = None) -> Tensor:
    out = T.matmul(x, w)
    return out if b is None else T.add(out, b)


def broadcast_row(row: Tensor, n: int) -> Tensor:
    """Tile a (1, d) tensor to (n, d) inside the graph (gradients sum back)."""
    return T.mul(Tensor(np.ones((n, 1))), row)


def lstm_cell(x: Tensor, h: Tensor, c: Tensor, w_x: Tensor, w_h: Tensor,
              b: Tensor) -> tuple[Tensor, Tensor]:
    """One LSTM step.  Gate blocks in i, f, g, o order along the last axis.

    x: (n, d_in), h/c: (n, d_h); w_x: (d_in, 4*d_h), w_h: (d_h, 4*d_h).
    """
    d_h = h.shape[1]
    gates = T.add(T.add(T.matmul(x, w_x), T.matmul(h, w_h)), b)
    i = T.sigmoid(T.narrow(gates, 1, 0, d_h))
    f = T.sigmoid(T.narrow(gates, 1, d_h, 2 * d_h))
    g = T.tanh(T.narrow(gates, 1, 2 * d_h, 3 * d_h))
    o = T.sigmoid(T.narrow(gates, 1, 3 * d_h, 4 * d_h))
    c_next = T.add(T.mul(f, c), T.mul(i, g))
    h_next = T.mul(o, T.tanh(c_next))
    return h_next, c_next


def init_lstm(rng: np.random.Generator, d_in: int, d_h: int,
              prefix: str) -> dict[str, Tensor]:
    return {
        f"{prefix}/w_x": glorot(rng, (d_in, 4 * d_h)),
        f"{prefix}/w_h": glorot(rng, (d_h, 4 * d_h)),
        f"{prefix}/b": zeros(4 * d_h),
    }


def params_to_arrays(params: dict[str, Tensor]) -> dict[str, np.ndarray]:
    return {name: p.data.copy() for name, p in params.items()}


def arrays_to_params(arrays: dict[str, np.ndarray], prefix: str = "",
                     requires_grad: bool = True) -> dict[str, Tensor]:
    out = {}
    for name, arr in arrays.items():
        if prefix and not name.startswith(prefix):
            continue
        key = name[len(prefix):] if prefix else name
        out[key] = Tensor(arr.copy(), requires_grad=requires_grad)
    return out
