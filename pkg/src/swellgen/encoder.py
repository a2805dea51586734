"""Micrograph -> cavity histogram encoder, the frozen yardstick behind the
physical-consistency loss ||En(X') - H_v||^2 (raw count units)."""

from __future__ import annotations

import numpy as np

from . import tensor as T
from .domain import IMAGE_SIZE, N_BINS, NS_INIT, NS_TRAIN, ValidationError, rng_for
from .nn import dense, glorot, zeros
from .optim import Optimizer
from .tensor import ShapeError, Tensor


def init_encoder_params(seed: int) -> dict[str, Tensor]:
    rng = rng_for(NS_INIT, seed, 4)
    return {
        "c1_w": glorot(rng, (16, 1, 4, 4)), "c1_b": zeros(16),
        "c2_w": glorot(rng, (32, 16, 4, 4)), "c2_b": zeros(32),
        "c3_w": glorot(rng, (64, 32, 4, 4)), "c3_b": zeros(64),
        "fc_w": glorot(rng, (1024, 128)), "fc_b": zeros(128),
        "head_w": glorot(rng, (128, N_BINS)), "head_b": zeros(N_BINS),
    }


def as_image_batch(images) -> Tensor:
    """Accepts (n, 32, 32) or (n, 1, 32, 32) array/tensor; returns tensor NCHW."""
    t = images if isinstance(images, Tensor) else Tensor(np.asarray(images, dtype=np.float64))
    if t.data.ndim == 3:
        t = T.reshape(t, (t.shape[0], 1, t.shape[1], t.shape[2]))
    if t.data.ndim != 4 or t.shape[1] != 1 or t.shape[2:] != (IMAGE_SIZE, IMAGE_SIZE):
        raise ShapeError(f"expected image batch (n, {IMAGE_SIZE}, {IMAGE_SIZE}), "
                         f"got {t.shape}")
    return t


def encode(params: dict[str, Tensor], images) -> Tensor:
    """Image batch -> nonnegative fractional cavity counts (n, 8)."""
    x = as_image_batch(images)
    h = T.relu(T.conv2d(x, params["c1_w"], params["c1_b"], stride=2, pad=1))
    h = T.relu(T.conv2d(h, params["c2_w"], params["c2_b"], stride=2, pad=1))
    h = T.relu(T.conv2d(h, params["c3_w"], params["c3_b"], stride=2, pad=1))
    flat = T.reshape(h, (h.shape[0], 1024))
    hidden = T.relu(dense(flat, params["fc_w"], params["fc_b"]))
    return T.relu(dense(hidden, params["head_w"], params["head_b"]))


def histogram_loss(params: dict[str, Tensor], images, hv_counts: Tensor) -> Tensor:
    """Mean over the batch of the squared histogram error (summed over bins)."""
    diff = T.add(encode(params, images), T.mul(hv_counts, -1.0))
    return T.tmean(T.tsum(T.mul(diff, diff), axis=1))


def train_encoder(samples, epochs: int = 30, lr: float = 1e-3, seed: int = 0,
                  batch_size: int = 32, rule: str = "rmsprop",
                  weight_decay: float = 0.0):
    """Supervised (image, histogram) regression; returns (params, loss_log)."""
    if not samples:
        raise ValidationError("train_encoder requires a nonempty dataset")
    images = np.stack([s.micrograph for s in samples])[:, None, :, :]
    targets = np.stack([s.h_v.as_array() for s in samples])
    n = len(samples)

    params = init_encoder_params(seed)
    opt = Optimizer(params, rule=rule, lr=lr, weight_decay=weight_decay)
    loss_log: list[float] = []
    for epoch in range(epochs):
        perm = rng_for(NS_TRAIN, seed, epoch).permutation(n)
        total = 0.0
        batches = 0
        for start in range(0, n, batch_size):
            idx = perm[start:start + batch_size]
            loss = histogram_loss(params, Tensor(images[idx]), Tensor(targets[idx]))
            T.backward(loss)
            opt.step()
            total += loss.item()
            batches += 1
        loss_log.append(total / batches)
    return params, loss_log


def encoder_mae(params: dict[str, Tensor], samples) -> np.ndarray:
    """Per-bin mean absolute count error over a sample list."""
    images = np.stack([s.micrograph for s in samples])[:, None, :, :]
    targets = np.stack([s.h_v.as_array() for s in samples])
    preds = encode(params, Tensor(images)).data
    return np.abs(preds - targets).mean(axis=0)
