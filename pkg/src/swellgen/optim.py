"""First-order optimizers with decoupled weight decay.

Three update rules share one interface: plain SGD, RMSprop with a
squared-gradient running average (rho=0.9, eps=1e-8) and Adagrad with a
squared-gradient *sum* (the "decayed Adagrad" behaviour: the accumulated
sum only grows, so the effective step length decays over training).

Weight decay is applied as a separate shrinkage term,

    w <- w - lr * update(g) - lr * weight_decay * w,

not folded into the gradient, so decay strength does not depend on the
adaptive denominator.  A parameter whose ``.grad`` is ``None`` contributes
a zero gradient but still decays.  Gradients are cleared after each step.
"""

from __future__ import annotations

import numpy as np

from .tensor import Tensor

RULES = ("sgd", "rmsprop", "adagrad")


class Optimizer:
    def __init__(self, params: dict[str, Tensor], rule: str = "sgd",
                 lr: float = 1e-3, weight_decay: float = 0.0,
                 rho: float = 0.9, eps: float = 1e-8):
        if rule not in RULES:
            raise ValueError(f"unknown optimizer rule {rule!r}; expected one of {RULES}")
        if not lr > 0.0:
            raise ValueError(f"learning rate must be positive, got {lr}")
        if weight_decay < 0.0:
            raise ValueError(f"weight decay must be nonnegative, got {weight_decay}")
        self.params = dict(params)
        self.rule = rule
        self.lr = float(lr)
        self.weight_decay = float(weight_decay)
        self.rho = float(rho)
        self.eps = float(eps)
        self._acc: dict[str, np.ndarray] = {
            name: np.zeros_like(p.data) for name, p in self.params.items()
        }

    def step(self) -> None:
        for name, p in self.params.items():
            g = p.grad if p.grad is not None else np.zeros_like(p.data)
            if self.rule == "sgd":
                update = g
            elif self.rule == "rmsprop":
                acc = self._acc[name]
                acc *= self.rho
                acc += (1.0 - self.rho) * g * g
                update = g / (np.sqrt(acc) + self.eps)
            else:  # adagrad
                acc = self._acc[name]
                acc += g * g
                update = g / (np.sqrt(acc) + self.eps)
            p.data -= self.lr * update + self.lr * self.weight_decay * p.data
            p.grad = None

    def zero_grad(self) -> None:
        for p in self.params.values():
            p.grad = None

    # -- checkpoint support -------------------------------------------------

    def state_arrays(self) -> dict[str, np.ndarray]:
        """Accumulator arrays keyed by parameter name (empty for sgd)."""
        if self.rule == "sgd":
            return {}
        return {name: acc.copy() for name, acc in self._acc.items()}

    def load_state_arrays(self, arrays: dict[str, np.ndarray]) -> None:
        for name, acc in arrays.items():
            if name not in self._acc:
                raise KeyError(f"optimizer state for unknown parameter {name!r}")
            if acc.shape != self._acc[name].shape:
                raise ValueError(f"optimizer state shape mismatch for {name!r}: "
                                 f"{acc.shape} vs {self._acc[name].shape}")
            self._acc[name] = acc.astype(np.float64).copy()
