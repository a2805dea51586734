"""Frozen-model persistence and the end-to-end inference pipeline.

One bundle file per trained artifact (embedding, encoder, gan, predictor,
classifier), each tagged with the dataset_version it was fitted on.  The
``Pipeline`` composes them for inference: material embedding -> latent
prior -> generator -> cavity encoder -> performance predictor, which is
the complete parameters-in/micrograph-plus-performance-out path.
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass

import numpy as np

from .bundle import BundleError, load_bundle, save_bundle
from .domain import (DR_CONTINUOUS, DatasetStats, IrradiationConditions,
                     MaterialComposition, NS_PRIOR, ThermoMechParams,
                     ValidationError, dc_vector, dd_vector, rng_for)
from .embedding import EmbeddingModel
from .encoder import encode
from .gan import LATENT_DIM, generate, sample_prior
from .nn import arrays_to_params, params_to_arrays
from .predictor import PredictorModel
from .tensor import Tensor

BUNDLE_FILES = {
    "embedding": "embedding.mbnd",
    "encoder": "encoder.mbnd",
    "gan": "gan.mbnd",
    "predictor": "predictor.mbnd",
    "classifier": "classifier.mbnd",
    "vae": "vae.mbnd",
}


def _check_kind(meta: dict, kind: str, path) -> None:
    if meta.get("kind") != kind:
        raise BundleError(f"{path} holds kind {meta.get('kind')!r}, expected {kind!r}")


def save_embedding_bundle(path, model: EmbeddingModel, dataset_version: str,
                          extra_meta: dict | None = None) -> None:
    meta = {"kind": "embedding", "dataset_version": dataset_version}
    meta.update(extra_meta or {})
    save_bundle(path, model.to_arrays(), meta)


def load_embedding_bundle(path) -> tuple[EmbeddingModel, dict]:
    arrays, meta = load_bundle(path)
    _check_kind(meta, "embedding", path)
    return EmbeddingModel.from_arrays(arrays), meta


def save_encoder_bundle(path, params, dataset_version: str,
                        extra_meta: dict | None = None) -> None:
    meta = {"kind": "encoder", "dataset_version": dataset_version}
    meta.update(extra_meta or {})
    save_bundle(path, params_to_arrays(params), meta)


def load_encoder_bundle(path):
    arrays, meta = load_bundle(path)
    _check_kind(meta, "encoder", path)
    return arrays_to_params(arrays, requires_grad=True), meta


def save_gan_bundle(path, gen, disc, prior, stats: DatasetStats,
                    dataset_version: str, extra_meta: dict | None = None) -> None:
    arrays = {f"gen/{k}": p.data for k, p in gen.items()}
    arrays.update({f"disc/{k}": p.data for k, p in disc.items()})
    if prior is not None:
        arrays.update({f"prior/{k}": p.data for k, p in prior.items()})
    arrays.update(stats.to_arrays())
    meta = {"kind": "gan", "dataset_version": dataset_version,
            "has_prior": prior is not None}
    meta.update(extra_meta or {})
    save_bundle(path, arrays, meta)


def load_gan_bundle(path):
    arrays, meta = load_bundle(path)
    _check_kind(meta, "gan", path)

    def block(prefix):
        return {k[len(prefix):]: Tensor(v, requires_grad=True)
                for k, v in arrays.items() if k.startswith(prefix)}

    prior = block("prior/") or None
    stats = DatasetStats.from_arrays(arrays)
    return block("gen/"), block("disc/"), prior, stats, meta


def save_predictor_bundle(path, model: PredictorModel, dataset_version: str,
                          extra_meta: dict | None = None) -> None:
    meta = {"kind": "predictor", "dataset_version": dataset_version}
    meta.update(extra_meta or {})
    save_bundle(path, model.to_arrays(), meta)


def load_predictor_bundle(path) -> tuple[PredictorModel, dict]:
    arrays, meta = load_bundle(path)
    _check_kind(meta, "predictor", path)
    return PredictorModel.from_arrays(arrays), meta


def save_classifier_bundle(path, params, dataset_version: str,
                           extra_meta: dict | None = None) -> None:
    meta = {"kind": "classifier", "dataset_version": dataset_version}
    meta.update(extra_meta or {})
    save_bundle(path, params_to_arrays(params), meta)


def load_classifier_bundle(path):
    arrays, meta = load_bundle(path)
    _check_kind(meta, "classifier", path)
    return arrays_to_params(arrays, requires_grad=True), meta


def save_vae_bundle(path, params, stats: DatasetStats, dataset_version: str,
                    extra_meta: dict | None = None) -> None:
    arrays = {f"vae/{k}": p.data for k, p in params.items()}
    arrays.update(stats.to_arrays())
    meta = {"kind": "vae", "dataset_version": dataset_version}
    meta.update(extra_meta or {})
    save_bundle(path, arrays, meta)


def load_vae_bundle(path):
    arrays, meta = load_bundle(path)
    _check_kind(meta, "vae", path)
    params = {k[len("vae/"):]: Tensor(v.copy(), requires_grad=True)
              for k, v in arrays.items() if k.startswith("vae/")}
    return params, DatasetStats.from_arrays(arrays), meta


def bundle_hashes(bundles_dir) -> dict[str, str]:
    """sha256 of each bundle file present under the directory."""
    out = {}
    for name, filename in BUNDLE_FILES.items():
        path = os.path.join(bundles_dir, filename)
        if os.path.exists(path):
            with open(path, "rb") as fh:
                out[name] = hashlib.sha256(fh.read()).hexdigest()
    return out


@dataclass
class Pipeline:
    embedding: EmbeddingModel
    encoder: dict[str, Tensor]
    gen: dict[str, Tensor]
    prior: dict[str, Tensor] | None
    predictor: PredictorModel
    stats: DatasetStats
    dataset_version: str
    warnings: list[str]

    @staticmethod
    def load(bundles_dir) -> "Pipeline":
        def path_of(name):
            path = os.path.join(bundles_dir, BUNDLE_FILES[name])
            if not os.path.exists(path):
                raise BundleError(f"missing bundle {BUNDLE_FILES[name]} "
                                  f"in {bundles_dir}")
            return path

        embedding, emb_meta = load_embedding_bundle(path_of("embedding"))
        encoder, enc_meta = load_encoder_bundle(path_of("encoder"))
        gen, _disc, prior, stats, gan_meta = load_gan_bundle(path_of("gan"))
        predictor, pred_meta = load_predictor_bundle(path_of("predictor"))

        versions = {"embedding": emb_meta.get("dataset_version", ""),
                    "encoder": enc_meta.get("dataset_version", ""),
                    "gan": gan_meta.get("dataset_version", ""),
                    "predictor": pred_meta.get("dataset_version", "")}
        reference = versions["gan"]
        warnings = [f"bundle {name!r} was fitted on dataset_version "
                    f"{version!r}, expected {reference!r}"
                    for name, version in versions.items() if version != reference]
        return Pipeline(embedding=embedding, encoder=encoder, gen=gen,
                        prior=prior, predictor=predictor, stats=stats,
                        dataset_version=reference, warnings=warnings)

    def generate_samples(self, composition: MaterialComposition,
                         d_d: ThermoMechParams, d_c: IrradiationConditions,
                         n: int, seed: int) -> list[dict]:
        """Composed what-if query: one record per generated sample."""
        if not 1 <= n <= 16:
            raise ValidationError(f"sample count must be in [1, 16], got {n}")
        c_m = self.embedding.embed(composition)
        if self.prior is not None:
            z = sample_prior(self.prior, c_m, n, seed)
        else:
            z = rng_for(NS_PRIOR, seed).standard_normal((n, LATENT_DIM))
        dd = np.repeat(dd_vector(d_d, self.stats)[None, :], n, axis=0)
        dc = np.repeat(dc_vector(d_c, self.stats)[None, :], n, axis=0)
        images = generate(self.gen, Tensor(z), Tensor(dd), Tensor(dc)).data[:, 0]
        h_est = encode(self.encoder, images[:, None, :, :]).data
        out = []
        for i in range(n):
            d_r, prob = self.predictor.predict(images[i], c_m)
            out.append({
                "image": images[i],
                "h_v_estimate": [float(v) for v in h_est[i]],
                "d_r_prediction": _prediction_fields(d_r, prob),
                "seed_used": seed,
            })
        return out

    def predict_from_image(self, image: np.ndarray,
                           composition: MaterialComposition) -> dict:
        c_m = self.embedding.embed(composition)
        d_r, prob = self.predictor.predict(image, c_m)
        return _prediction_fields(d_r, prob)


def _prediction_fields(d_r, prob: float) -> dict:
    out = {name: float(getattr(d_r, name)) for name in DR_CONTINUOUS}
    out["C_He"] = float(prob)
    return out
