"""Generative pair: composition-conditioned prior, generator and
cavity-histogram-attentive discriminator.

Latent draws come from N(mu(C_m), delta(C_m)) with mu = tanh(W_mu C_m)
and delta = exp(tanh(W_delta C_m)), so every scale component lies in
[1/e, e] and C_m = 0 recovers a standard normal.

The discriminator sees the histogram only through soft attention over its
4x4 feature map: v = W_v h_v scores each location, softmax weights a
rescale every location by (1 + L^2 a_l), and a zero W_v degenerates to a
uniform doubling.  CALL_COUNTS instruments attend/prior usage so ablation
wiring is testable.
"""

from __future__ import annotations

import numpy as np

from . import tensor as T
from .domain import N_BINS, NS_INIT, NS_PRIOR, rng_for
from .nn import dense, glorot, zeros
from .tensor import ShapeError, Tensor

LATENT_DIM = 64
COND_DIM = 21 + 5          # normalized descriptor vector + condition vector
ATTN_CHANNELS = 64         # C at the 4x4 attention stage
_STEM = (LATENT_DIM + COND_DIM, 1024)

CALL_COUNTS = {"attend": 0, "prior": 0}


def reset_call_counts() -> None:
    CALL_COUNTS["attend"] = 0
    CALL_COUNTS["prior"] = 0


# -- prior ----------------------------------------------------------------------


def init_prior_params(seed: int) -> dict[str, Tensor]:
    rng = rng_for(NS_INIT, seed, 1)
    return {"w_mu": glorot(rng, (16, LATENT_DIM)),
            "w_delta": glorot(rng, (16, LATENT_DIM))}


def prior_mu_delta(params: dict[str, Tensor], c_m: Tensor) -> tuple[Tensor, Tensor]:
    """In-graph prior parameters for a C_m batch (n, 16)."""
    CALL_COUNTS["prior"] += 1
    mu = T.tanh(T.matmul(c_m, params["w_mu"]))
    delta = T.exp(T.tanh(T.matmul(c_m, params["w_delta"])))
    return mu, delta


def sample_prior(params, c_m: np.ndarray, n: int, seed: int) -> np.ndarray:
    """Deterministic latent batch (n, LATENT_DIM) for a single material."""
    if n < 1:
        raise ValueError(f"sample count must be >= 1, got {n}")
    CALL_COUNTS["prior"] += 1
    w_mu = params["w_mu"].data if isinstance(params["w_mu"], Tensor) else params["w_mu"]
    w_delta = (params["w_delta"].data if isinstance(params["w_delta"], Tensor)
               else params["w_delta"])
    c_m = np.asarray(c_m, dtype=np.float64)
    mu = np.tanh(c_m @ w_mu)
    delta = np.exp(np.tanh(c_m @ w_delta))
    eps = rng_for(NS_PRIOR, seed).standard_normal((n, LATENT_DIM))
    return mu + delta * eps


# -- generator ---------------------------------------------------------------------


def init_generator_params(seed: int) -> dict[str, Tensor]:
    rng = rng_for(NS_INIT, seed, 2)
    return {
        "stem_w": glorot(rng, _STEM), "stem_b": zeros(_STEM[1]),
        "dc1_w": glorot(rng, (64, 32, 4, 4)), "dc1_b": zeros(32),
        "dc2_w": glorot(rng, (32, 16, 4, 4)), "dc2_b": zeros(16),
        "dc3_w": glorot(rng, (16, 1, 4, 4)), "dc3_b": zeros(1),
    }


def generate(params: dict[str, Tensor], z: Tensor, d_d: Tensor, d_c: Tensor) -> Tensor:
    """(z, normalized d_d, normalized d_c) -> image batch (n, 1, 32, 32)."""
    if z.shape[1] != LATENT_DIM or d_d.shape[1] != 21 or d_c.shape[1] != 5:
        raise ShapeError(f"generator inputs must be (n,{LATENT_DIM}), (n,21), (n,5); "
                         f"got {z.shape}, {d_d.shape}, {d_c.shape}")
    x = T.concat([z, d_d, d_c], axis=1)
    h = T.relu(dense(x, params["stem_w"], params["stem_b"]))
    h = T.reshape(h, (h.shape[0], 64, 4, 4))
    h = T.relu(T.conv_transpose2d(h, params["dc1_w"], params["dc1_b"], stride=2, pad=1))
    h = T.relu(T.conv_transpose2d(h, params["dc2_w"], params["dc2_b"], stride=2, pad=1))
    return T.sigmoid(T.conv_transpose2d(h, params["dc3_w"], params["dc3_b"],
                                        stride=2, pad=1))


# -- discriminator ------------------------------------------------------------------


def init_discriminator_params(seed: int, conditioned: bool = True) -> dict[str, Tensor]:
    rng = rng_for(NS_INIT, seed, 3)
    params = {
        "c1_w": glorot(rng, (16, 1, 4, 4)), "c1_b": zeros(16),
        "c2_w": glorot(rng, (32, 16, 4, 4)), "c2_b": zeros(32),
        "c3_w": glorot(rng, (ATTN_CHANNELS, 32, 4, 4)), "c3_b": zeros(ATTN_CHANNELS),
        "fc_w": glorot(rng, (ATTN_CHANNELS * 16, 1)), "fc_b": zeros(1),
    }
    if conditioned:
        params["w_v"] = glorot(rng, (N_BINS, ATTN_CHANNELS))
    return params


def attend(x_conv: Tensor, h_v: Tensor, w_v: Tensor) -> Tensor:
    """Histogram-guided rescaling of conv features.

    x_conv: (n, C, L, L); h_v: z-scored histogram (n, 8).  Scores are
    per-location dot products with v = W_v h_v, softmax-normalized over
    the L*L locations; each location is scaled by (1 + L^2 a_l) and
    relu-clipped, so uniform attention doubles features uniformly.
    """
    if h_v.shape[1] != N_BINS:
        raise ShapeError(f"attend expects an {N_BINS}-bin histogram, got {h_v.shape}")
    CALL_COUNTS["attend"] += 1
    n, c, l1, l2 = x_conv.shape
    loc = l1 * l2
    v = T.matmul(h_v, w_v)                       # (n, C)
    x_flat = T.reshape(x_conv, (n, c, loc))      # (n, C, L^2)
    scores = T.tsum(T.mul(x_flat, T.reshape(v, (n, c, 1))), axis=1)  # (n, L^2)
    a = T.softmax(scores, axis=1)
    gate = T.add(1.0, T.mul(float(loc), a))      # (n, L^2)
    gated = T.mul(x_flat, T.reshape(gate, (n, 1, loc)))
    return T.reshape(T.relu(gated), (n, c, l1, l2))


def discriminator_logits(params: dict[str, Tensor], images: Tensor,
                         h_v: Tensor | None) -> Tensor:
    """Image batch (n, 1, 32, 32) -> real/fake logits (n, 1)."""
    h = T.leaky_relu(T.conv2d(images, params["c1_w"], params["c1_b"],
                              stride=2, pad=1), 0.2)
    h = T.leaky_relu(T.conv2d(h, params["c2_w"], params["c2_b"], stride=2, pad=1), 0.2)
    x_conv = T.leaky_relu(T.conv2d(h, params["c3_w"], params["c3_b"],
                                   stride=2, pad=1), 0.2)
    if "w_v" in params:
        if h_v is None:
            raise ShapeError("conditioned discriminator requires a histogram input")
        x_conv = attend(x_conv, h_v, params["w_v"])
    n = x_conv.shape[0]
    flat = T.reshape(x_conv, (n, ATTN_CHANNELS * 16))
    return dense(flat, params["fc_w"], params["fc_b"])


def discriminate(params: dict[str, Tensor], images: Tensor,
                 h_v: Tensor | None = None) -> Tensor:
    """Probability that each image is real, in (0, 1)."""
    return T.sigmoid(discriminator_logits(params, images, h_v))
