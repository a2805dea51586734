"""Element embeddings learned by thermodynamic-property regression.

The first layer of the regression network is a bias-free 12 -> 16 linear
map whose rows are the element embeddings; a material's feature vector
C_m is therefore the composition-weighted sum of element rows, linear in
the composition by construction.  The property head regresses the 12
thermodynamic targets (9 z-scored scalars + 3-wide crystal one-hot).

The relu output head cannot emit negatives, so regression targets are
shifted by +3 during training (z-scored values land comfortably above
zero) and unshifted on read-out.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tensor as T
from .domain import (CRYSTAL_TYPES, DD_CONTINUOUS, ELEMENTS, NS_INIT,
                     THERMO_CONT_FIELDS, MaterialComposition, ValidationError,
                     crystal_one_hot, rng_for)
from .materials import ALLOY_NAMES, composition
from .nn import dense, glorot, params_to_arrays, zeros
from .optim import Optimizer
from .tensor import Tensor

D_C = 16           # material feature width
_HIDDEN = 32
D_PH = len(THERMO_CONT_FIELDS) + len(CRYSTAL_TYPES)  # 12 regression targets
TARGET_SHIFT = 3.0


def init_embedding_params(seed: int) -> dict[str, Tensor]:
    rng = rng_for(NS_INIT, seed, 0)
    return {
        "emb": glorot(rng, (len(ELEMENTS), D_C)),  # rows are element embeddings
        "w1": glorot(rng, (D_C, _HIDDEN)), "b1": zeros(_HIDDEN),
        "w2": glorot(rng, (_HIDDEN, D_C)), "b2": zeros(D_C),
        "w_head": glorot(rng, (D_C, D_PH)), "b_head": zeros(D_PH),
    }


def property_forward(params: dict[str, Tensor], m: Tensor) -> Tensor:
    """Composition batch (n, 12) -> shifted property estimates (n, 12)."""
    c_m = T.matmul(m, params["emb"])
    h1 = T.tanh(dense(c_m, params["w1"], params["b1"]))
    h2 = T.tanh(dense(h1, params["w2"], params["b2"]))
    return T.relu(dense(h2, params["w_head"], params["b_head"]))


@dataclass
class EmbeddingModel:
    params: dict[str, Tensor]
    thermo_mean: np.ndarray
    thermo_std: np.ndarray
    loss_curve: list[float]

    def embed(self, comp: MaterialComposition) -> np.ndarray:
        """C_m = m-weighted sum of element embedding rows; linear in m."""
        return comp.as_array() @ self.params["emb"].data

    def embed_fractions(self, m: np.ndarray) -> np.ndarray:
        total = float(np.sum(m))
        if not 0.999 <= total <= 1.001:
            raise ValidationError(f"composition sums to {total:.6f}, "
                                  f"outside [0.999, 1.001]")
        return np.asarray(m, dtype=np.float64) @ self.params["emb"].data

    def to_arrays(self) -> dict[str, np.ndarray]:
        out = {f"embedding/{k}": v for k, v in params_to_arrays(self.params).items()}
        out["embedding/thermo_mean"] = self.thermo_mean.copy()
        out["embedding/thermo_std"] = self.thermo_std.copy()
        return out

    @staticmethod
    def from_arrays(arrays: dict[str, np.ndarray]) -> "EmbeddingModel":
        params = {}
        for key in ("emb", "w1", "b1", "w2", "b2", "w_head", "b_head"):
            params[key] = Tensor(arrays[f"embedding/{key}"].copy(), requires_grad=True)
        return EmbeddingModel(params=params,
                              thermo_mean=arrays["embedding/thermo_mean"].copy(),
                              thermo_std=arrays["embedding/thermo_std"].copy(),
                              loss_curve=[])


def _thermo_targets(samples):
    """Returns ((n, 12) targets, mean, std): z-scored thermo scalars + one-hot."""
    idx = [DD_CONTINUOUS.index(name) for name in THERMO_CONT_FIELDS]
    raw = np.stack([s.d_d.continuous()[idx] for s in samples])
    ordered = np.sort(raw, axis=0)
    mean = ordered.mean(axis=0)
    std = np.sqrt(((ordered - mean) ** 2).mean(axis=0))
    std = np.where(std == 0.0, 1.0, std)
    z = (raw - mean) / std
    hot = np.stack([crystal_one_hot(s.d_d.crystal_type) for s in samples])
    return np.concatenate([z, hot], axis=1), mean, std


def train_embedding(samples, epochs: int = 200, lr: float = 0.05, seed: int = 0,
                    rule: str = "adagrad", weight_decay: float = 0.0) -> EmbeddingModel:
    alloys = {s.composition.alloy_name for s in samples}
    if len(alloys) < 2:
        raise ValidationError(f"embedding regression needs >= 2 distinct alloys, "
                              f"got {sorted(alloys)}")
    targets, mean, std = _thermo_targets(samples)
    m_batch = Tensor(np.stack([s.composition.as_array() for s in samples]))
    shifted = Tensor(targets + TARGET_SHIFT)

    params = init_embedding_params(seed)
    opt = Optimizer(params, rule=rule, lr=lr, weight_decay=weight_decay)
    curve: list[float] = []
    for _ in range(epochs):
        pred = property_forward(params, m_batch)
        diff = T.add(pred, T.mul(shifted, -1.0))
        loss = T.tmean(T.mul(diff, diff))
        curve.append(loss.item())
        T.backward(loss)
        opt.step()
    return EmbeddingModel(params=params, thermo_mean=mean, thermo_std=std,
                          loss_curve=curve)


def export_embedding_projection(model: EmbeddingModel) -> str:
    """Alloy C_m vectors projected onto their top-2 principal components."""
    vectors = np.stack([model.embed(composition(name)) for name in ALLOY_NAMES])
    centered = vectors - vectors.mean(axis=0)
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    coords = centered @ vt[:2].T
    lines = ["alloy_name,x,y"]
    for name, (x, y) in zip(ALLOY_NAMES, coords):
        lines.append(f"{name},{float(x)!r},{float(y)!r}")
    return "\n".join(lines) + "\n"
