"""Reverse-mode automatic differentiation over float64 numpy arrays.

Every operation records its inputs and a vector-Jacobian closure on the
output tensor; ``backward`` walks the recorded graph in reverse topological
order and accumulates gradients into leaf tensors that were created with
``requires_grad=True``.  All arithmetic is double precision and every
forward pass is bit-deterministic for identical inputs.

Operator coverage is intentionally minimal: dense/matmul, stride-s 2-D
convolution and transposed convolution, the usual pointwise nonlinearities,
softmax, reductions, concatenation/slicing and a numerically stable binary
cross-entropy on logits.  Recurrent cells are composed from these
primitives in :mod:`swellgen.nn`.
"""

from __future__ import annotations

import numpy as np


class ShapeError(ValueError):
    """Raised when operands do not conform for the requested operator."""


def _as_array(value) -> np.ndarray:
    return np.asarray(value, dtype=np.float64)


class Tensor:
    """A float64 array node in the differentiation graph.

    Leaf tensors (no recorded parents) with ``requires_grad=True`` receive
    accumulated gradients in ``.grad`` when ``backward`` is called on a
    scalar loss reachable from them.  Repeated backward calls accumulate;
    optimizers clear ``.grad`` after applying an update.
    """

    __slots__ = ("data", "requires_grad", "grad", "_parents", "_vjp")

    def __init__(self, data, requires_grad: bool = False):
        self.data = _as_array(data)
        self.requires_grad = bool(requires_grad)
        self.grad: np.ndarray | None = None
        self._parents: tuple[Tensor, ...] = ()
        self._vjp = None

    # -- construction -----------------------------------------------------

    @staticmethod
    def _from_op(data: np.ndarray, parents: tuple["Tensor", ...], vjp) -> "Tensor":
        out = Tensor(data)
        if any(p.requires_grad for p in parents):
            out.requires_grad = True
            out._parents = parents
            out._vjp = vjp
        return out

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        return float(self.data.reshape(()))

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def __repr__(self) -> str:
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"

    # -- operator sugar ----------------------------------------------------

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return add(self, mul(other, -1.0))

    def __rsub__(self, other):
        return add(other, mul(self, -1.0))

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def sum(self, axis=None, keepdims=False):
        return tsum(self, axis=axis, keepdims=keepdims)

    def mean(self, axis=None, keepdims=False):
        return tmean(self, axis=axis, keepdims=keepdims)

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return reshape(self, shape)


def _lift(value) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum ``grad`` down to ``shape`` (inverse of numpy broadcasting)."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad


# -- arithmetic -------------------------------------------------------------


def add(a, b) -> Tensor:
    a, b = _lift(a), _lift(b)
    out = a.data + b.data

    def vjp(g):
        return _unbroadcast(g, a.data.shape), _unbroadcast(g, b.data.shape)

    return Tensor._from_op(out, (a, b), vjp)


def mul(a, b) -> Tensor:
    a, b = _lift(a), _lift(b)
    out = a.data * b.data

    def vjp(g):
        return (_unbroadcast(g * b.data, a.data.shape),
                _unbroadcast(g * a.data, b.data.shape))

    return Tensor._from_op(out, (a, b), vjp)


def matmul(a, b) -> Tensor:
    a, b = _lift(a), _lift(b)
    if a.data.ndim != 2 or b.data.ndim != 2:
        raise ShapeError(f"matmul expects 2-D operands, got {a.data.shape} @ {b.data.shape}")
    if a.data.shape[1] != b.data.shape[0]:
        raise ShapeError(f"matmul inner dims disagree: {a.data.shape} @ {b.data.shape}")
    out = a.data @ b.data

    def vjp(g):
        return g @ b.data.T, a.data.T @ g

    return Tensor._from_op(out, (a, b), vjp)


# -- pointwise nonlinearities ------------------------------------------------


def relu(x) -> Tensor:
    x = _lift(x)
    out = np.maximum(x.data, 0.0)

    def vjp(g):
        return ((x.data > 0.0) * g,)

    return Tensor._from_op(out, (x,), vjp)


def leaky_relu(x, slope: float = 0.2) -> Tensor:
    x = _lift(x)
    out = np.where(x.data > 0.0, x.data, slope * x.data)

    def vjp(g):
        return (np.where(x.data > 0.0, 1.0, slope) * g,)

    return Tensor._from_op(out, (x,), vjp)


def tanh(x) -> Tensor:
    x = _lift(x)
    out = np.tanh(x.data)

    def vjp(g):
        return ((1.0 - out * out) * g,)

    return Tensor._from_op(out, (x,), vjp)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    # overflow-free: exp is only ever taken of a nonpositive argument
    t = np.exp(-np.abs(x))
    return np.where(x >= 0.0, 1.0 / (1.0 + t), t / (1.0 + t))


def sigmoid(x) -> Tensor:
    x = _lift(x)
    out = _sigmoid(x.data)

    def vjp(g):
        return (out * (1.0 - out) * g,)

    return Tensor._from_op(out, (x,), vjp)


def exp(x) -> Tensor:
    x = _lift(x)
    out = np.exp(x.data)

    def vjp(g):
        return (out * g,)

    return Tensor._from_op(out, (x,), vjp)


def log(x) -> Tensor:
    x = _lift(x)
    out = np.log(x.data)

    def vjp(g):
        return (g / x.data,)

    return Tensor._from_op(out, (x,), vjp)


def softplus(x) -> Tensor:
    """log(1 + exp(x)) computed without overflow."""
    x = _lift(x)
    out = np.maximum(x.data, 0.0) + np.log1p(np.exp(-np.abs(x.data)))

    def vjp(g):
        return (_sigmoid(x.data) * g,)

    return Tensor._from_op(out, (x,), vjp)


def softmax(x, axis: int = -1) -> Tensor:
    x = _lift(x)
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    out = e / e.sum(axis=axis, keepdims=True)

    def vjp(g):
        dot = (g * out).sum(axis=axis, keepdims=True)
        return (out * (g - dot),)

    return Tensor._from_op(out, (x,), vjp)


# -- reductions and shape ----------------------------------------------------


def tsum(x, axis=None, keepdims: bool = False) -> Tensor:
    x = _lift(x)
    out = x.data.sum(axis=axis, keepdims=keepdims)

    def vjp(g):
        g = np.asarray(g)
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, x.data.shape).copy(),)

    return Tensor._from_op(out, (x,), vjp)


def tmean(x, axis=None, keepdims: bool = False) -> Tensor:
    x = _lift(x)
    count = x.data.size if axis is None else x.data.shape[axis]
    out = x.data.mean(axis=axis, keepdims=keepdims)

    def vjp(g):
        g = np.asarray(g)
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, x.data.shape).copy() / count,)

    return Tensor._from_op(out, (x,), vjp)


def reshape(x, shape) -> Tensor:
    x = _lift(x)
    out = x.data.reshape(shape)

    def vjp(g):
        return (g.reshape(x.data.shape),)

    return Tensor._from_op(out, (x,), vjp)


def concat(tensors, axis: int = -1) -> Tensor:
    tensors = tuple(_lift(t) for t in tensors)
    out = np.concatenate([t.data for t in tensors], axis=axis)
    sizes = [t.data.shape[axis] for t in tensors]
    bounds = np.cumsum([0] + sizes)

    def vjp(g):
        return tuple(np.take(g, range(bounds[i], bounds[i + 1]), axis=axis)
                     for i in range(len(tensors)))

    return Tensor._from_op(out, tensors, vjp)


def narrow(x, axis: int, start: int, stop: int) -> Tensor:
    """Contiguous slice along ``axis``; gradient zero-pads the complement."""
    x = _lift(x)
    index = [slice(None)] * x.data.ndim
    index[axis] = slice(start, stop)
    index = tuple(index)
    out = x.data[index]

    def vjp(g):
        full = np.zeros_like(x.data)
        full[index] = g
        return (full,)

    return Tensor._from_op(out, (x,), vjp)


# -- losses ------------------------------------------------------------------


def bce_with_logits(logits, targets) -> Tensor:
    """Mean binary cross-entropy between sigmoid(logits) and targets.

    Computed from logits as mean(softplus(z) - t*z) so it stays finite for
    saturated discriminator outputs.
    """
    z, t = _lift(logits), _lift(targets)
    if z.data.shape != t.data.shape:
        raise ShapeError(f"bce_with_logits shapes disagree: {z.data.shape} vs {t.data.shape}")
    sp = np.maximum(z.data, 0.0) + np.log1p(np.exp(-np.abs(z.data)))
    out = np.asarray((sp - t.data * z.data).mean())
    n = z.data.size

    def vjp(g):
        gz = (_sigmoid(z.data) - t.data) * (g / n)
        gt = -z.data * (g / n)
        return gz, gt

    return Tensor._from_op(out, (z, t), vjp)


# -- convolution --------------------------------------------------------------


def _im2col(x: np.ndarray, kh: int, kw: int, stride: int) -> np.ndarray:
    """(N, C, H, W) -> (N, C*kh*kw, OH*OW) patch matrix; ``x`` is pre-padded."""
    n, c, h, w = x.shape
    oh = (h - kh) // stride + 1
    ow = (w - kw) // stride + 1
    s0, s1, s2, s3 = x.strides
    windows = np.lib.stride_tricks.as_strided(
        x,
        shape=(n, c, kh, kw, oh, ow),
        strides=(s0, s1, s2, s3, s2 * stride, s3 * stride),
        writeable=False,
    )
    return windows.reshape(n, c * kh * kw, oh * ow)


def _col2im(cols: np.ndarray, n: int, c: int, hp: int, wp: int,
            kh: int, kw: int, stride: int, oh: int, ow: int) -> np.ndarray:
    """Adjoint of :func:`_im2col`: scatter-add patch columns onto a padded image."""
    out = np.zeros((n, c, hp, wp), dtype=cols.dtype)
    cols6 = cols.reshape(n, c, kh, kw, oh, ow)
    for a in range(kh):
        for b in range(kw):
            out[:, :, a:a + stride * oh:stride, b:b + stride * ow:stride] += cols6[:, :, a, b]
    return out


def _pad_hw(x: np.ndarray, ph: int, pw: int) -> np.ndarray:
    if ph == 0 and pw == 0:
        return x
    n, c, h, w = x.shape
    out = np.zeros((n, c, h + 2 * ph, w + 2 * pw), dtype=x.dtype)
    out[:, :, ph:ph + h, pw:pw + w] = x
    return out


def _conv_forward(x: np.ndarray, w: np.ndarray, stride: int, pad: int):
    n, c, h, wd = x.shape
    co, ci, kh, kw = w.shape
    if c != ci:
        raise ShapeError(f"conv2d channel mismatch: input {x.shape} vs weight {w.shape}")
    if (h + 2 * pad - kh) % stride or (wd + 2 * pad - kw) % stride:
        raise ShapeError(f"conv2d geometry not exact: input {x.shape}, kernel {w.shape}, "
                         f"stride {stride}, pad {pad}")
    cols = _im2col(_pad_hw(x, pad, pad), kh, kw, stride)
    oh = (h + 2 * pad - kh) // stride + 1
    ow = (wd + 2 * pad - kw) // stride + 1
    out = np.matmul(w.reshape(co, -1), cols).reshape(n, co, oh, ow)
    return out, cols


def conv2d(x, w, b=None, stride: int = 1, pad: int | None = None) -> Tensor:
    """2-D convolution, NCHW layout, weight (C_out, C_in, kH, kW).

    ``pad=None`` selects "same"-style padding (kH-1)//2.
    """
    x, w = _lift(x), _lift(w)
    kh, kw = w.data.shape[2], w.data.shape[3]
    if pad is None:
        pad = (kh - 1) // 2
    out, cols = _conv_forward(x.data, w.data, stride, pad)
    co = w.data.shape[0]
    if b is not None:
        b = _lift(b)
        out = out + b.data.reshape(1, co, 1, 1)

    def vjp(g):
        n, _, oh, ow = g.shape
        g_mat = g.reshape(n, co, oh * ow)
        dw = None
        if w.requires_grad:
            dw = np.matmul(g_mat, cols.transpose(0, 2, 1)).sum(axis=0).reshape(w.data.shape)
        dx = None
        if x.requires_grad:
            # input gradient: project the upstream gradient back to patch
            # columns, then scatter-add them onto the padded input canvas
            dcols = np.matmul(w.data.reshape(co, -1).T, g_mat)
            _, ci, h, wd = x.data.shape
            dx_pad = _col2im(dcols, n, ci, h + 2 * pad, wd + 2 * pad,
                             kh, kw, stride, oh, ow)
            dx = dx_pad[:, :, pad:pad + h, pad:pad + wd] if pad else dx_pad
        if b is not None:
            return dx, dw, g.sum(axis=(0, 2, 3))
        return dx, dw

    parents = (x, w) if b is None else (x, w, b)
    return Tensor._from_op(out, parents, vjp)


def conv_transpose2d(x, w, b=None, stride: int = 2, pad: int = 1) -> Tensor:
    """Transposed 2-D convolution, weight (C_in, C_out, kH, kW).

    Output spatial size is (H-1)*stride + kH - 2*pad; the k4/s2/p1
    configuration used by the generator doubles height and width.
    """
    x, w = _lift(x), _lift(w)
    ci, co, kh, kw = w.data.shape
    n, xc, ih, iw = x.data.shape
    if xc != ci:
        raise ShapeError(f"conv_transpose2d channel mismatch: input {x.data.shape} "
                         f"vs weight {w.data.shape}")
    hf, wf = (ih - 1) * stride + kh, (iw - 1) * stride + kw
    oh, ow = hf - 2 * pad, wf - 2 * pad
    if oh <= 0 or ow <= 0:
        raise ShapeError(f"conv_transpose2d geometry collapses: input {x.data.shape}, "
                         f"kernel {w.data.shape}, stride {stride}, pad {pad}")
    # scatter each input pixel's weighted kernel onto the full canvas, then
    # crop the padding ring; this is the exact adjoint of strided conv2d
    prod = np.matmul(w.data.reshape(ci, co * kh * kw).T, x.data.reshape(n, ci, ih * iw))
    full = _col2im(prod, n, co, hf, wf, kh, kw, stride, ih, iw)
    out = np.ascontiguousarray(full[:, :, pad:pad + oh, pad:pad + ow]) if pad else full
    if b is not None:
        b = _lift(b)
        out += b.data.reshape(1, co, 1, 1)

    def vjp(g):
        dw = None
        if w.requires_grad:
            g_full = _pad_hw(g, pad, pad)
            g_cols = _im2col(g_full, kh, kw, stride)
            x_mat = x.data.reshape(n, ci, ih * iw)
            dw = np.matmul(x_mat, g_cols.transpose(0, 2, 1)).sum(axis=0).reshape(w.data.shape)
        dx = None
        if x.requires_grad:
            dx, _ = _conv_forward(g, w.data, stride, pad)
        if b is not None:
            return dx, dw, g.sum(axis=(0, 2, 3))
        return dx, dw

    parents = (x, w) if b is None else (x, w, b)
    return Tensor._from_op(out, parents, vjp)


# -- backward pass -------------------------------------------------------------


def backward(loss: Tensor) -> None:
    """Accumulate dLoss/dLeaf into every reachable requires_grad leaf.

    ``loss`` must be scalar.  Adjoints of interior nodes are local to this
    call, so a second backward on the same graph (e.g. the generator loss
    after the discriminator step) starts from clean intermediates while
    still accumulating into leaf ``.grad``.
    """
    if loss.data.size != 1:
        raise ValueError(f"backward requires a scalar loss, got shape {loss.data.shape}")

    topo: list[Tensor] = []
    visited: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(loss, False)]
    while stack:
        node, processed = stack.pop()
        if processed:
            topo.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for parent in node._parents:
            if parent.requires_grad and id(parent) not in visited:
                stack.append((parent, False))

    adjoint: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
    for node in reversed(topo):
        g = adjoint.pop(id(node), None)
        if g is None:
            continue
        if node._vjp is None:
            node.grad = g if node.grad is None else node.grad + g
            continue
        for parent, pg in zip(node._parents, node._vjp(g)):
            if not parent.requires_grad or pg is None:
                continue
            key = id(parent)
            if key in adjoint:
                adjoint[key] = adjoint[key] + pg
            else:
                adjoint[key] = pg


def zero_grads(params) -> None:
    for p in (params.values() if isinstance(params, dict) else params):
        p.grad = None


# -- finite-difference oracle ----------------------------------------------


def grad_check(f, x: Tensor, eps: float = 1e-4) -> float:
    """Max relative error between analytic and central-difference gradients.

    ``f`` must map a tensor to a scalar tensor and be deterministic.  The
    error for component i is |a_i - n_i| / max(1e-8, |a_i| + |n_i|).
    """
    probe = Tensor(x.data.copy(), requires_grad=True)
    out = f(probe)
    backward(out)
    analytic = probe.grad.ravel().copy() if probe.grad is not None else np.zeros(x.data.size)

    numeric = np.empty(x.data.size)
    flat = x.data.ravel()
    for i in range(flat.size):
        bumped = flat.copy()
        bumped[i] = flat[i] + eps
        f_plus = f(Tensor(bumped.reshape(x.data.shape))).item()
        bumped[i] = flat[i] - eps
        f_minus = f(Tensor(bumped.reshape(x.data.shape))).item()
        numeric[i] = (f_plus - f_minus) / (2.0 * eps)

    denom = np.maximum(1e-8, np.abs(analytic) + np.abs(numeric))
    return float(np.max(np.abs(analytic - numeric) / denom))
