"""Sample-quality metrics: a 14-way alloy classifier over micrographs, an
inception-style diversity score built on it, and per-field RMSE.

Scores are permutation-exact: any reduction over a set of images sorts the
addends before summing, so reordering the input changes nothing, not even
in the last bit.
"""

from __future__ import annotations

import numpy as np

from . import tensor as T
from .domain import NS_INIT, NS_METRIC, NS_TRAIN, ValidationError, rng_for
from .encoder import as_image_batch
from .materials import ALLOY_NAMES
from .nn import dense, glorot, zeros
from .optim import Optimizer
from .tensor import Tensor

N_CLASSES = len(ALLOY_NAMES)


def init_classifier_params(seed: int) -> dict[str, Tensor]:
    rng = rng_for(NS_INIT, seed, 7)
    return {
        "c1_w": glorot(rng, (8, 1, 4, 4)), "c1_b": zeros(8),
        "c2_w": glorot(rng, (16, 8, 4, 4)), "c2_b": zeros(16),
        "c3_w": glorot(rng, (32, 16, 4, 4)), "c3_b": zeros(32),
        "fc_w": glorot(rng, (512, N_CLASSES)), "fc_b": zeros(N_CLASSES),
    }


def classifier_logits(params: dict[str, Tensor], images) -> Tensor:
    x = as_image_batch(images)
    h = T.relu(T.conv2d(x, params["c1_w"], params["c1_b"], stride=2, pad=1))
    h = T.relu(T.conv2d(h, params["c2_w"], params["c2_b"], stride=2, pad=1))
    h = T.relu(T.conv2d(h, params["c3_w"], params["c3_b"], stride=2, pad=1))
    return dense(T.reshape(h, (h.shape[0], 512)), params["fc_w"],
                 params["fc_b"])


def classifier_probs(params: dict[str, Tensor], images: np.ndarray) -> np.ndarray:
    return T.softmax(classifier_logits(params, images), axis=1).data


def _cross_entropy(logits: Tensor, onehot: Tensor) -> Tensor:
    # log-softmax via a detached max shift keeps exp() in range.
    shift = Tensor(logits.data.max(axis=1, keepdims=True))
    z = T.add(logits, T.mul(shift, -1.0))
    lse = T.log(T.tsum(T.exp(z), axis=1, keepdims=True))
    logp = T.add(z, T.mul(lse, -1.0))
    return T.mul(T.tmean(T.tsum(T.mul(onehot, logp), axis=1)), -1.0)


def train_metric_classifier(samples, epochs: int = 40, lr: float = 1e-3,
                            seed: int = 0, batch_size: int = 32,
                            rule: str = "rmsprop", weight_decay: float = 0.0):
    """Train on (micrograph, alloy index) pairs; returns (params, loss_log).

    The classifier exists to drive the diversity score, not to identify
    alloys per se: held-out accuracy stays near chance because conditions
    confound composition, but 40 epochs give confident, image-dependent
    class responses, which is what the score measures.
    """
    if not samples:
        raise ValidationError("classifier training requires a nonempty dataset")
    labels = np.array([ALLOY_NAMES.index(s.composition.alloy_name) for s in samples])
    if len(set(labels.tolist())) < 2:
        raise ValidationError("classifier training requires >= 2 alloy classes")
    images = np.stack([s.micrograph for s in samples])[:, None, :, :]
    onehot = np.zeros((len(samples), N_CLASSES))
    onehot[np.arange(len(samples)), labels] = 1.0
    n = len(samples)

    params = init_classifier_params(seed)
    opt = Optimizer(params, rule=rule, lr=lr, weight_decay=weight_decay)
    log: list[float] = []
    for epoch in range(epochs):
        perm = rng_for(NS_TRAIN, seed, epoch).permutation(n)
        total, batches = 0.0, 0
        for start in range(0, n, batch_size):
            idx = perm[start:start + batch_size]
            loss = _cross_entropy(classifier_logits(params, Tensor(images[idx])),
                                  Tensor(onehot[idx]))
            T.backward(loss)
            opt.step()
            total += loss.item()
            batches += 1
        log.append(total / batches)
    return params, log


def classifier_accuracy(params: dict[str, Tensor], samples) -> float:
    labels = np.array([ALLOY_NAMES.index(s.composition.alloy_name) for s in samples])
    images = np.stack([s.micrograph for s in samples])[:, None, :, :]
    pred = classifier_probs(params, images).argmax(axis=1)
    return float((pred == labels).mean())


def _sorted_mean(values: np.ndarray, axis: int = 0) -> np.ndarray:
    return np.sort(values, axis=axis).mean(axis=axis)


def _score_of(probs: np.ndarray) -> float:
    probs = np.clip(probs, 1e-12, None)
    marginal = _sorted_mean(probs, axis=0)
    kl = (probs * (np.log(probs) - np.log(marginal)[None, :])).sum(axis=1)
    return float(np.exp(_sorted_mean(kl)))


def inception_style_score(images: np.ndarray, classifier, n_splits: int = 10,
                          split_seed: int = 0) -> tuple[float, float]:
    """Diversity/quality score exp(E_x KL(p(y|x) || p(y))) and split stderr.

    `classifier` maps an (n, 32, 32) batch to (n, n_classes) probabilities.
    The headline score uses every image in one batch; the uncertainty is the
    standard error across n_splits disjoint seeded splits.
    """
    images = np.asarray(images)
    if images.ndim != 3 or images.shape[0] < 2:
        raise ValidationError("score requires at least 2 images of shape 32x32")
    probs = np.asarray(classifier(images))
    score = _score_of(probs)

    n = images.shape[0]
    n_splits = min(n_splits, n)
    perm = rng_for(NS_METRIC, split_seed).permutation(n)
    chunk_scores = [_score_of(probs[idx])
                    for idx in np.array_split(perm, n_splits)]
    arr = np.array(chunk_scores)
    stderr = float(arr.std(ddof=1) / np.sqrt(n_splits)) if n_splits > 1 else 0.0
    return score, stderr


def rmse_score(pred: np.ndarray, ref: np.ndarray) -> np.ndarray:
    """Per-column RMSE between aligned (n, k) arrays, permutation-exact."""
    pred = np.asarray(pred, dtype=np.float64)
    ref = np.asarray(ref, dtype=np.float64)
    if pred.shape != ref.shape or pred.ndim != 2:
        raise ValidationError("rmse_score expects matching (n, k) arrays")
    return np.sqrt(_sorted_mean((pred - ref) ** 2, axis=0))
