"""Conditional VAE baseline generator.

Encoder mirrors the discriminator trunk and emits mean and log-variance of
a 64-d latent; the decoder reuses the generator architecture so VAE and
GAN samples are comparable like for like.  Loss is the per-sample sum of
squared pixel errors plus the analytic KL to a standard normal, averaged
over the batch.
"""

from __future__ import annotations

import numpy as np

from . import tensor as T
from .domain import NS_INIT, NS_PRIOR, NS_TRAIN, ValidationError, rng_for
from .encoder import as_image_batch
from .gan import LATENT_DIM, generate, init_generator_params
from .nn import dense, glorot, zeros
from .optim import Optimizer
from .tensor import Tensor


def init_vae_params(seed: int) -> dict[str, Tensor]:
    rng = rng_for(NS_INIT, seed, 6)
    params = {
        "e1_w": glorot(rng, (16, 1, 4, 4)), "e1_b": zeros(16),
        "e2_w": glorot(rng, (32, 16, 4, 4)), "e2_b": zeros(32),
        "e3_w": glorot(rng, (64, 32, 4, 4)), "e3_b": zeros(64),
        "mu_w": glorot(rng, (1024, LATENT_DIM)), "mu_b": zeros(LATENT_DIM),
        "lv_w": glorot(rng, (1024, LATENT_DIM)), "lv_b": zeros(LATENT_DIM),
    }
    dec = init_generator_params(seed)
    params.update({f"dec_{k}": v for k, v in dec.items()})
    return params


def encode_latent(params: dict[str, Tensor], images):
    """Images -> (mu, log_var), each (n, LATENT_DIM)."""
    x = as_image_batch(images)
    h = T.relu(T.conv2d(x, params["e1_w"], params["e1_b"], stride=2, pad=1))
    h = T.relu(T.conv2d(h, params["e2_w"], params["e2_b"], stride=2, pad=1))
    h = T.relu(T.conv2d(h, params["e3_w"], params["e3_b"], stride=2, pad=1))
    flat = T.reshape(h, (h.shape[0], 1024))
    return (dense(flat, params["mu_w"], params["mu_b"]),
            dense(flat, params["lv_w"], params["lv_b"]))


def _decoder_params(params: dict[str, Tensor]) -> dict[str, Tensor]:
    return {k[len("dec_"):]: v for k, v in params.items()
            if k.startswith("dec_")}


def vae_loss(params: dict[str, Tensor], images, d_d: Tensor, d_c: Tensor,
             eps: np.ndarray):
    """Batch-mean of (summed pixel MSE + KL); returns (loss, recon, kl)."""
    x = as_image_batch(images)
    mu, log_var = encode_latent(params, x)
    std = T.exp(T.mul(log_var, 0.5))
    z = T.add(mu, T.mul(std, Tensor(eps)))
    recon = generate(_decoder_params(params), z, d_d, d_c)
    n = x.shape[0]
    diff = T.add(T.reshape(recon, (n, 1024)),
                 T.mul(T.reshape(x, (n, 1024)), -1.0))
    recon_term = T.tmean(T.tsum(T.mul(diff, diff), axis=1))
    # KL(N(mu, sigma^2) || N(0, 1)) = 0.5 * sum(mu^2 + sigma^2 - 1 - log sigma^2)
    var = T.exp(log_var)
    kl_terms = T.add(T.add(T.mul(mu, mu), var),
                     T.add(T.mul(log_var, -1.0), Tensor(-1.0)))
    kl_term = T.tmean(T.mul(T.tsum(kl_terms, axis=1), 0.5))
    loss = T.add(recon_term, kl_term)
    return loss, float(recon_term.item()), float(kl_term.item())


def train_vae(samples, stats, epochs: int = 20, lr: float = 1e-3,
              seed: int = 0, batch_size: int = 32, rule: str = "rmsprop",
              weight_decay: float = 0.0):
    """Returns (params, loss_log) with per-epoch (loss, recon, kl) means."""
    from .domain import dc_vector, dd_vector

    if not samples:
        raise ValidationError("train_vae requires a nonempty dataset")
    images = np.stack([s.micrograph for s in samples])[:, None, :, :]
    dd = np.stack([dd_vector(s.d_d, stats) for s in samples])
    dc = np.stack([dc_vector(s.d_c, stats) for s in samples])
    n = len(samples)

    params = init_vae_params(seed)
    opt = Optimizer(params, rule=rule, lr=lr, weight_decay=weight_decay)
    log: list[tuple[float, float, float]] = []
    for epoch in range(epochs):
        rng = rng_for(NS_TRAIN, seed, epoch)
        perm = rng.permutation(n)
        sums = np.zeros(3)
        batches = 0
        for start in range(0, n, batch_size):
            idx = perm[start:start + batch_size]
            eps = rng_for(NS_PRIOR, seed, epoch, batches).standard_normal(
                (len(idx), LATENT_DIM))
            loss, recon, kl = vae_loss(params, Tensor(images[idx]),
                                       Tensor(dd[idx]), Tensor(dc[idx]), eps)
            T.backward(loss)
            opt.step()
            sums += (loss.item(), recon, kl)
            batches += 1
        log.append(tuple(sums / batches))
    return params, log


def vae_generate(params: dict[str, Tensor], d_d: np.ndarray, d_c: np.ndarray,
                 n: int, seed: int) -> np.ndarray:
    """Sample n images from the prior for a single condition row."""
    if n < 1:
        raise ValidationError("sample count must be >= 1")
    z = rng_for(NS_PRIOR, seed, 1).standard_normal((n, LATENT_DIM))
    dd = Tensor(np.repeat(np.asarray(d_d)[None, :], n, axis=0))
    dc = Tensor(np.repeat(np.asarray(d_c)[None, :], n, axis=0))
    out = generate(_decoder_params(params), Tensor(z), dd, dc)
    return out.data[:, 0, :, :]
