"""Adversarial training loop with the cavity-histogram loss, its ablation
variants, and checkpoint/resume plumbing.

Per minibatch both player losses are built on one recorded graph:

    L_D = mean softplus(-logit_real) + mean softplus(logit_fake) + (lam/2) L_Hv
    L_G = mean softplus(-logit_fake)                             + (lam/2) L_Hv

(softplus(-z) = -log sigmoid(z), so these are the saturating-safe forms of
the stated -E log D terms).  The cavity term inside L_D is detached: the
encoder is frozen and the generated batch is treated as a constant there,
so the scalar is faithful but contributes no D gradient.  Both backward
passes run before either optimizer steps; D's gradients are stashed across
the second backward so each player updates from its own loss only, with
G's gradient taken at the pre-step discriminator.

Variants: ``full`` (prior + attention), ``no_prior`` (z ~ N(0,I), attention
kept), ``no_attention`` (prior kept, unconditioned discriminator),
``pure_gan`` (neither, lambda forced to 0).  ``vae`` is handled by
:mod:`swellgen.vae` and rejected here.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import tensor as T
from .bundle import load_bundle, save_bundle
from .domain import (NS_METRIC, NS_PRIOR, NS_TRAIN, ValidationError, dc_vector,
                     dd_vector, hv_vector, rng_for)
from .encoder import histogram_loss
from .gan import (LATENT_DIM, discriminator_logits, generate,
                  init_discriminator_params, init_generator_params,
                  init_prior_params, prior_mu_delta)
from .optim import Optimizer
from .tensor import Tensor

VARIANTS = ("full", "no_prior", "no_attention", "pure_gan", "vae")


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 200
    batch_size: int = 10
    lr: float = 1e-4
    weight_decay: float = 0.0
    lam: float = 1.0
    variant: str = "full"
    seed: int = 0
    rule: str = "rmsprop"
    checkpoint_interval: int = 0    # 0 disables periodic checkpoints

    def __post_init__(self):
        if self.lam < 0.0:
            raise ValidationError(f"lambda must be >= 0, got {self.lam}")
        if self.batch_size < 1:
            raise ValidationError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.variant not in VARIANTS:
            raise ValidationError(f"unknown variant {self.variant!r}; "
                                  f"expected one of {VARIANTS}")

    def override(self, **kwargs) -> "TrainConfig":
        return replace(self, **kwargs)


# Full-budget settings vs. a configuration sized for a desktop CPU run.
PRESETS = {
    "fullscale": TrainConfig(epochs=2000, batch_size=10, lr=1e-5,
                             weight_decay=1.6e-6, rule="sgd"),
    "desk": TrainConfig(epochs=200, batch_size=10, lr=1e-4,
                        weight_decay=0.0, rule="rmsprop"),
}


def _uses_prior(variant: str) -> bool:
    return variant in ("full", "no_attention")


def _conditioned(variant: str) -> bool:
    return variant in ("full", "no_prior")


def gan_batch_losses(gen, disc, prior, enc_params, real: Tensor, hv_raw: Tensor,
                     hv_z: Tensor | None, c_m: Tensor, d_d: Tensor, d_c: Tensor,
                     eps: np.ndarray, lam: float):
    """Build (L_D, L_G) tensors for one minibatch on a shared graph.

    Returns (l_d, l_g, z_values, components) where components carries the
    individual scalar terms for loss-identity checks and logging.
    """
    if prior is not None:
        mu, delta = prior_mu_delta(prior, c_m)
        z = T.add(mu, T.mul(delta, Tensor(eps)))
    else:
        z = Tensor(eps)
    fake = generate(gen, z, d_d, d_c)
    logit_real = discriminator_logits(disc, real, hv_z)
    # The D player treats the generator output as a constant, so its loss is
    # built on a detached copy and backward(l_d) never walks the generator.
    logit_fake_d = discriminator_logits(disc, Tensor(fake.data), hv_z)
    logit_fake_g = discriminator_logits(disc, fake, hv_z)

    adv_d = T.add(T.tmean(T.softplus(T.mul(logit_real, -1.0))),
                  T.tmean(T.softplus(logit_fake_d)))
    adv_g = T.tmean(T.softplus(T.mul(logit_fake_g, -1.0)))

    if lam > 0.0:
        l_hv_t = histogram_loss(enc_params, fake, hv_raw)
        half = T.mul(l_hv_t, lam / 2.0)
        l_d = T.add(adv_d, Tensor(half.data))   # constant for the D player
        l_g = T.add(adv_g, half)
        l_hv = l_hv_t.item()
        cavity = half.item()
    else:
        # logged for the curve, but outside both losses and off-graph
        l_hv = histogram_loss(enc_params, Tensor(fake.data), hv_raw).item()
        l_d, l_g = adv_d, adv_g
        cavity = 0.0

    components = {
        "adv_d": adv_d.item(), "adv_g": adv_g.item(), "l_hv": l_hv,
        "cavity_d": cavity, "cavity_g": cavity,
    }
    return l_d, l_g, z.data, components


@dataclass
class GanTrainResult:
    gen: dict[str, Tensor]
    disc: dict[str, Tensor]
    prior: dict[str, Tensor] | None
    loss_log: list[tuple]           # (epoch, L_D, L_G, L_Hv, wall_seconds)
    config: TrainConfig
    z_count: int = 0
    z_sum: float = 0.0
    z_sumsq: float = 0.0
    warnings: list[str] = field(default_factory=list)

    @property
    def z_mean(self) -> float:
        return self.z_sum / self.z_count if self.z_count else 0.0

    @property
    def z_std(self) -> float:
        if not self.z_count:
            return 0.0
        return float(np.sqrt(self.z_sumsq / self.z_count - self.z_mean ** 2))


def _frozen(params: dict[str, Tensor]) -> dict[str, Tensor]:
    return {k: Tensor(p.data) for k, p in params.items()}


def train_gan(samples, embeddings, enc_params, stats, config: TrainConfig,
              dataset_version: str = "", checkpoint_path=None,
              resume: "GanTrainResult | None" = None,
              start_epoch: int = 0) -> GanTrainResult:
    """Alternating minibatch training; deterministic per (config, dataset)."""
    if config.variant == "vae":
        raise ValidationError("variant 'vae' is trained by train_vae, not train_gan")
    if not samples:
        raise ValidationError("train_gan requires a nonempty dataset")

    lam = 0.0 if config.variant == "pure_gan" else config.lam
    conditioned = _conditioned(config.variant)

    if resume is not None:
        gen, disc, prior = resume.gen, resume.disc, resume.prior
        result = resume
    else:
        gen = init_generator_params(config.seed)
        disc = init_discriminator_params(config.seed, conditioned=conditioned)
        prior = init_prior_params(config.seed) if _uses_prior(config.variant) else None
        result = GanTrainResult(gen=gen, disc=disc, prior=prior, loss_log=[],
                                config=config)

    g_group = dict(gen)
    if prior is not None:
        g_group.update({f"prior_{k}": v for k, v in prior.items()})
    opt_g = Optimizer(g_group, rule=config.rule, lr=config.lr,
                      weight_decay=config.weight_decay)
    opt_d = Optimizer(disc, rule=config.rule, lr=config.lr,
                      weight_decay=config.weight_decay)
    if resume is not None and getattr(resume, "_opt_state", None) is not None:
        g_state, d_state = resume._opt_state
        opt_g.load_state_arrays(g_state)
        opt_d.load_state_arrays(d_state)

    enc_frozen = _frozen(enc_params)
    images = np.stack([s.micrograph for s in samples])[:, None, :, :]
    hv_raw = np.stack([s.h_v.as_array() for s in samples])
    hv_z = np.stack([hv_vector(s.h_v, stats) for s in samples])
    c_m = np.stack([embeddings.embed(s.composition) for s in samples])
    dd = np.stack([dd_vector(s.d_d, stats) for s in samples])
    dc = np.stack([dc_vector(s.d_c, stats) for s in samples])
    n = len(samples)

    for epoch in range(start_epoch, config.epochs):
        tick = time.perf_counter()
        perm = rng_for(NS_TRAIN, config.seed, epoch).permutation(n)
        sums = np.zeros(3)
        batches = 0
        for b, start in enumerate(range(0, n, config.batch_size)):
            idx = perm[start:start + config.batch_size]
            eps = rng_for(NS_PRIOR, config.seed, epoch, b).standard_normal(
                (len(idx), LATENT_DIM))
            l_d, l_g, z_vals, comp = gan_batch_losses(
                gen, disc, prior, enc_frozen, Tensor(images[idx]),
                Tensor(hv_raw[idx]), Tensor(hv_z[idx]) if conditioned else None,
                Tensor(c_m[idx]), Tensor(dd[idx]), Tensor(dc[idx]), eps, lam)

            # backward(l_g) reaches the generator through the live fake logit
            # and pollutes D grads on the way; stash D's own grads first so
            # neither player sees the other's loss.
            T.backward(l_d)
            d_grads = {k: (None if p.grad is None else p.grad.copy())
                       for k, p in disc.items()}
            opt_d.zero_grad()
            opt_g.zero_grad()
            T.backward(l_g)
            for k, p in disc.items():
                p.grad = d_grads[k]
            opt_d.step()
            opt_g.step()

            result.z_count += z_vals.size
            result.z_sum += float(z_vals.sum())
            result.z_sumsq += float((z_vals ** 2).sum())
            sums += (l_d.item(), l_g.item(), comp["l_hv"])
            batches += 1
        means = sums / batches
        result.loss_log.append((epoch, float(means[0]), float(means[1]),
                                float(means[2]), time.perf_counter() - tick))
        if (checkpoint_path and config.checkpoint_interval
                and (epoch + 1) % config.checkpoint_interval == 0):
            save_gan_checkpoint(checkpoint_path, result, (opt_g, opt_d),
                                dataset_version, epoch + 1)
    return result


# -- checkpointing ------------------------------------------------------------


def save_gan_checkpoint(path, result: GanTrainResult, opts, dataset_version: str,
                        epoch_next: int) -> None:
    opt_g, opt_d = opts
    arrays = {f"gen/{k}": p.data for k, p in result.gen.items()}
    arrays.update({f"disc/{k}": p.data for k, p in result.disc.items()})
    if result.prior is not None:
        arrays.update({f"prior/{k}": p.data for k, p in result.prior.items()})
    arrays.update({f"optg/{k}": v for k, v in opt_g.state_arrays().items()})
    arrays.update({f"optd/{k}": v for k, v in opt_d.state_arrays().items()})
    arrays["log/rows"] = np.array([list(r) for r in result.loss_log],
                                  dtype=np.float64).reshape(len(result.loss_log), 5)
    cfg = result.config
    meta = {
        "kind": "gan-checkpoint", "epoch_next": epoch_next,
        "dataset_version": dataset_version,
        "z_count": result.z_count, "z_sum": result.z_sum,
        "z_sumsq": result.z_sumsq,
        "config": {"epochs": cfg.epochs, "batch_size": cfg.batch_size,
                   "lr": cfg.lr, "weight_decay": cfg.weight_decay,
                   "lam": cfg.lam, "variant": cfg.variant, "seed": cfg.seed,
                   "rule": cfg.rule,
                   "checkpoint_interval": cfg.checkpoint_interval},
    }
    save_bundle(path, arrays, meta)


def load_gan_checkpoint(path, dataset_version: str = ""):
    """Returns (result, start_epoch); result carries optimizer state for resume."""
    arrays, meta = load_bundle(path)
    if meta.get("kind") != "gan-checkpoint":
        raise ValidationError(f"{path} is not a training checkpoint "
                              f"(kind={meta.get('kind')!r})")
    config = TrainConfig(**meta["config"])

    def block(prefix):
        return {k[len(prefix):]: Tensor(v, requires_grad=True)
                for k, v in arrays.items() if k.startswith(prefix)}

    prior = block("prior/") or None
    rows = [
        (int(r[0]), float(r[1]), float(r[2]), float(r[3]), float(r[4]))
        for r in arrays["log/rows"]
    ]
    result = GanTrainResult(gen=block("gen/"), disc=block("disc/"), prior=prior,
                            loss_log=rows, config=config,
                            z_count=int(meta["z_count"]),
                            z_sum=float(meta["z_sum"]),
                            z_sumsq=float(meta["z_sumsq"]))
    g_state = {k[len("optg/"):]: v for k, v in arrays.items()
               if k.startswith("optg/")}
    d_state = {k[len("optd/"):]: v for k, v in arrays.items()
               if k.startswith("optd/")}
    result._opt_state = (g_state, d_state)
    if dataset_version and meta["dataset_version"] != dataset_version:
        result.warnings.append(
            f"checkpoint dataset_version {meta['dataset_version']!r} does not "
            f"match current {dataset_version!r}")
    return result, int(meta["epoch_next"])


# -- evaluation ---------------------------------------------------------------


def generate_for_samples(result: GanTrainResult, embeddings, stats, samples,
                         seed: int) -> np.ndarray:
    """One fake image per sample, under the variant's latent scheme."""
    c_m = np.stack([embeddings.embed(s.composition) for s in samples])
    dd = np.stack([dd_vector(s.d_d, stats) for s in samples])
    dc = np.stack([dc_vector(s.d_c, stats) for s in samples])
    eps = rng_for(NS_METRIC, seed, 7).standard_normal((len(samples), LATENT_DIM))
    if result.prior is not None:
        mu = np.tanh(c_m @ result.prior["w_mu"].data)
        delta = np.exp(np.tanh(c_m @ result.prior["w_delta"].data))
        z = mu + delta * eps
    else:
        z = eps
    fake = generate(result.gen, Tensor(z), Tensor(dd), Tensor(dc))
    return fake.data[:, 0, :, :]


def evaluate_discriminator(result: GanTrainResult, embeddings, stats, samples,
                           seed: int = 0) -> float:
    """Held-out real-vs-fake accuracy at the 0.5 threshold."""
    if not samples:
        raise ValidationError("evaluation requires a nonempty sample list")
    conditioned = "w_v" in result.disc
    hv_z = np.stack([hv_vector(s.h_v, stats) for s in samples])
    hv_arg = Tensor(hv_z) if conditioned else None
    real = np.stack([s.micrograph for s in samples])[:, None, :, :]
    fake = generate_for_samples(result, embeddings, stats, samples, seed)

    logit_real = discriminator_logits(result.disc, Tensor(real), hv_arg)
    logit_fake = discriminator_logits(result.disc,
                                      Tensor(fake[:, None, :, :]), hv_arg)
    hits = (logit_real.data[:, 0] > 0.0).sum() + (logit_fake.data[:, 0] <= 0.0).sum()
    return float(hits / (2 * len(samples)))


def mean_generated_lhv(result: GanTrainResult, embeddings, enc_params, stats,
                       samples, seed: int = 0) -> float:
    """Mean squared histogram error of generated images vs. the conditioning."""
    fake = generate_for_samples(result, embeddings, stats, samples, seed)
    hv_raw = np.stack([s.h_v.as_array() for s in samples])
    return histogram_loss(_frozen(enc_params), Tensor(fake[:, None, :, :]),
                          Tensor(hv_raw)).item()


def write_loss_log(path, rows) -> None:
    lines = ["epoch,L_D,L_G,L_Hv,wall_seconds"]
    for epoch, l_d, l_g, l_hv, wall in rows:
        lines.append(f"{int(epoch)},{l_d!r},{l_g!r},{l_hv!r},{wall!r}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
