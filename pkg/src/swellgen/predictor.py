"""Image-to-performance model: CNN features fused with the material vector,
then a bidirectional LSTM emitting one performance variable per step.

The same fused context feeds every step; steps are distinguished by a
learned per-variable index embedding concatenated to the input, which is
what makes 12 distinct per-step outputs well-posed.  Steps 1..11 share a
relu regression head over (forward, backward) hidden states; step 12 is
the binary C_He head with a sigmoid.  Continuous targets are z-scored
then shifted by +3 so the relu head can represent negative z-values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tensor as T
from .domain import (DR_CONTINUOUS, DR_FIELDS, DatasetStats, NS_INIT, NS_TRAIN,
                     PerformanceParams, ValidationError, denormalized_dr,
                     fit_stats, rng_for)
from .embedding import D_C
from .encoder import as_image_batch
from .nn import broadcast_row, dense, glorot, init_lstm, lstm_cell, zeros
from .optim import Optimizer
from .tensor import Tensor

N_STEPS = len(DR_FIELDS)   # 12 output variables
IDX_DIM = 16
HIDDEN = 64
FUSED = 128
TARGET_SHIFT = 3.0


def init_predictor_params(seed: int) -> dict[str, Tensor]:
    rng = rng_for(NS_INIT, seed, 5)
    params = {
        "c1_w": glorot(rng, (16, 1, 4, 4)), "c1_b": zeros(16),
        "c2_w": glorot(rng, (32, 16, 4, 4)), "c2_b": zeros(32),
        "c3_w": glorot(rng, (64, 32, 4, 4)), "c3_b": zeros(64),
        "fc_img_w": glorot(rng, (1024, FUSED)), "fc_img_b": zeros(FUSED),
        "fuse_wx": glorot(rng, (FUSED, FUSED)),
        "fuse_wcm": glorot(rng, (D_C, FUSED)),
        "fuse_b": zeros(FUSED),
        "idx_emb": glorot(rng, (N_STEPS, IDX_DIM)),
        "head_w": glorot(rng, (2 * HIDDEN, 1)), "head_b": zeros(1),
        "che_w": glorot(rng, (2 * HIDDEN, 1)), "che_b": zeros(1),
    }
    params.update(init_lstm(rng, FUSED + IDX_DIM, HIDDEN, "fw"))
    params.update(init_lstm(rng, FUSED + IDX_DIM, HIDDEN, "bw"))
    return params


def fused_context(params: dict[str, Tensor], images, c_m: Tensor) -> Tensor:
    """X_bar = relu(W_x CNN(image) + W_cm C_m + b), shape (n, FUSED)."""
    x = as_image_batch(images)
    h = T.relu(T.conv2d(x, params["c1_w"], params["c1_b"], stride=2, pad=1))
    h = T.relu(T.conv2d(h, params["c2_w"], params["c2_b"], stride=2, pad=1))
    h = T.relu(T.conv2d(h, params["c3_w"], params["c3_b"], stride=2, pad=1))
    img_feat = dense(T.reshape(h, (h.shape[0], 1024)),
                     params["fc_img_w"], params["fc_img_b"])
    return T.relu(T.add(T.add(T.matmul(img_feat, params["fuse_wx"]),
                              T.matmul(c_m, params["fuse_wcm"])),
                        params["fuse_b"]))


def _step_inputs(params: dict[str, Tensor], x_bar: Tensor) -> list[Tensor]:
    n = x_bar.shape[0]
    inputs = []
    for i in range(N_STEPS):
        row = T.narrow(params["idx_emb"], 0, i, i + 1)
        inputs.append(T.concat([x_bar, broadcast_row(row, n)], axis=1))
    return inputs


def bilstm_sweep(params: dict[str, Tensor], x_bar: Tensor):
    """Forward states for steps 1..12 and backward states for 12..1.

    Returns (fw, bw) lists indexed by step position, each entry (n, HIDDEN).
    """
    inputs = _step_inputs(params, x_bar)
    n = x_bar.shape[0]
    fw, bw = [], []
    h = c = Tensor(np.zeros((n, HIDDEN)))
    for i in range(N_STEPS):
        h, c = lstm_cell(inputs[i], h, c, params["fw/w_x"], params["fw/w_h"],
                         params["fw/b"])
        fw.append(h)
    h = c = Tensor(np.zeros((n, HIDDEN)))
    back = []
    for i in reversed(range(N_STEPS)):
        h, c = lstm_cell(inputs[i], h, c, params["bw/w_x"], params["bw/w_h"],
                         params["bw/b"])
        back.append(h)
    bw = list(reversed(back))
    return fw, bw


def forward(params: dict[str, Tensor], images, c_m: Tensor):
    """Returns (continuous (n, 11) in shifted z-space, C_He logits (n, 1))."""
    x_bar = fused_context(params, images, c_m)
    fw, bw = bilstm_sweep(params, x_bar)
    cont_steps = []
    che_logit = None
    for i in range(N_STEPS):
        h_cat = T.concat([fw[i], bw[i]], axis=1)
        if i < len(DR_CONTINUOUS):
            cont_steps.append(T.relu(dense(h_cat, params["head_w"],
                                           params["head_b"])))
        else:
            che_logit = dense(h_cat, params["che_w"], params["che_b"])
    return T.concat(cont_steps, axis=1), che_logit


@dataclass
class PredictorModel:
    params: dict[str, Tensor]
    stats: DatasetStats
    loss_curve: list[float]

    def predict(self, image: np.ndarray, c_m: np.ndarray):
        """Single image + material vector -> (PerformanceParams, C_He prob)."""
        cont, che_logit = forward(self.params,
                                  np.asarray(image)[None, :, :],
                                  Tensor(np.asarray(c_m)[None, :]))
        z = cont.data[0] - TARGET_SHIFT
        prob = float(1.0 / (1.0 + np.exp(-che_logit.data[0, 0])))
        d_r = denormalized_dr(z, int(prob > 0.5), self.stats)
        return d_r, prob

    def to_arrays(self) -> dict[str, np.ndarray]:
        out = {f"predictor/{k}": p.data.copy() for k, p in self.params.items()}
        out.update(self.stats.to_arrays())
        return out

    @staticmethod
    def from_arrays(arrays: dict[str, np.ndarray]) -> "PredictorModel":
        params = {k[len("predictor/"):]: Tensor(v.copy(), requires_grad=True)
                  for k, v in arrays.items() if k.startswith("predictor/")}
        return PredictorModel(params=params,
                              stats=DatasetStats.from_arrays(arrays),
                              loss_curve=[])


def predictor_loss(params: dict[str, Tensor], images, c_m: Tensor,
                   targets_shifted: Tensor, che: Tensor) -> Tensor:
    cont, che_logit = forward(params, images, c_m)
    diff = T.add(cont, T.mul(targets_shifted, -1.0))
    mse = T.tmean(T.mul(diff, diff))
    bce = T.bce_with_logits(che_logit, che)
    return T.add(mse, bce)


def train_predictor(samples, embeddings, epochs: int = 30, lr: float = 1e-3,
                    seed: int = 0, batch_size: int = 32, rule: str = "rmsprop",
                    weight_decay: float = 0.0,
                    stats: DatasetStats | None = None) -> PredictorModel:
    if not samples:
        raise ValidationError("train_predictor requires a nonempty dataset")
    if stats is None:
        stats = fit_stats(samples)
    images = np.stack([s.micrograph for s in samples])[:, None, :, :]
    c_m = np.stack([embeddings.embed(s.composition) for s in samples])
    targets = np.stack([stats.d_r.normalize(s.d_r.continuous())
                        for s in samples]) + TARGET_SHIFT
    che = np.array([[float(s.d_r.C_He)] for s in samples])
    n = len(samples)

    params = init_predictor_params(seed)
    opt = Optimizer(params, rule=rule, lr=lr, weight_decay=weight_decay)
    curve: list[float] = []
    for epoch in range(epochs):
        perm = rng_for(NS_TRAIN, seed, epoch).permutation(n)
        total, batches = 0.0, 0
        for start in range(0, n, batch_size):
            idx = perm[start:start + batch_size]
            loss = predictor_loss(params, Tensor(images[idx]), Tensor(c_m[idx]),
                                  Tensor(targets[idx]), Tensor(che[idx]))
            T.backward(loss)
            opt.step()
            total += loss.item()
            batches += 1
        curve.append(total / batches)
    return PredictorModel(params=params, stats=stats, loss_curve=curve)


def evaluate_predictor(model: PredictorModel, embeddings, samples):
    """Held-out metrics: (normalized RMSE per field, overall, C_He accuracy)."""
    images = np.stack([s.micrograph for s in samples])[:, None, :, :]
    c_m = np.stack([embeddings.embed(s.composition) for s in samples])
    targets = np.stack([model.stats.d_r.normalize(s.d_r.continuous())
                        for s in samples])
    che = np.array([s.d_r.C_He for s in samples])
    cont, che_logit = forward(model.params, images, Tensor(c_m))
    pred_z = cont.data - TARGET_SHIFT
    per_field = np.sqrt(((pred_z - targets) ** 2).mean(axis=0))
    overall = float(np.sqrt(((pred_z - targets) ** 2).mean()))
    acc = float(((che_logit.data[:, 0] > 0.0).astype(int) == che).mean())
    return per_field, overall, acc
