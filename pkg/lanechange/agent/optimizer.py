"""Adam with bias correction over ``NetworkParams``-shaped tensors."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .network import NetworkParams, NetworkShapeError


@dataclass(eq=False)
class AdamState:
    m: NetworkParams = field(default_factory=NetworkParams.zeros)
    v: NetworkParams = field(default_factory=NetworkParams.zeros)
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def copy(self) -> AdamState:
        return AdamState(m=self.m.copy(), v=self.v.copy(), step=self.step,
                         beta1=self.beta1, beta2=self.beta2, eps=self.eps)


def adam_step(params: NetworkParams, grads: NetworkParams, adam: AdamState, lr: float) -> NetworkParams:
    """Return updated parameters; ``adam``'s moments and step counter advance in place."""
    adam.step += 1
    correction1 = 1.0 - adam.beta1 ** adam.step
    correction2 = 1.0 - adam.beta2 ** adam.step

    updated = {}
    for name, value in params.items():
        grad = getattr(grads, name)
        if grad.shape != value.shape:
            raise NetworkShapeError(f"Gradient for {name} has shape {grad.shape}, expected {value.shape}.")
        m = adam.beta1 * getattr(adam.m, name) + (1.0 - adam.beta1) * grad
        v = adam.beta2 * getattr(adam.v, name) + (1.0 - adam.beta2) * grad ** 2
        setattr(adam.m, name, m)
        setattr(adam.v, name, v)
        updated[name] = value - lr * (m / correction1) / (np.sqrt(v / correction2) + adam.eps)
    return NetworkParams(**updated)
