"""Stochastic-gradient optimizers: SGD with momentum and Adam.

State tensors mirror the parameter shapes; the step count increases by one
per update. Updates mutate the parameter arrays in place.
"""

from __future__ import annotations

import numpy as np


class OptimizerError(RuntimeError):
    pass


def _check_finite(grads, params):
    for i, d in enumerate(grads):
        for k, g in d.items():
            if not np.all(np.isfinite(g)):
                raise OptimizerError(f"non-finite gradient at parameter {i}.{k}")
            if g.shape != params[i][k].shape:
                raise OptimizerError(
                    f"gradient shape {g.shape} != parameter shape "
                    f"{params[i][k].shape} at {i}.{k}"
                )


class SGD:
    def __init__(self, lr, momentum=0.0):
        self.lr = lr
        self.momentum = momentum
        self.steps = 0
        self._vel = None

    def step(self, params, grads):
        _check_finite(grads, params)
        if self._vel is None:
            self._vel = [{k: np.zeros_like(v) for k, v in d.items()} for d in params]
        for d, g, v in zip(params, grads, self._vel):
            for k in d:
                v[k] = self.momentum * v[k] + g[k]
                d[k] -= (self.lr * v[k]).astype(d[k].dtype)
        self.steps += 1


class Adam:
    def __init__(self, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.steps = 0
        self._m = None
        self._v = None

    def step(self, params, grads):
        _check_finite(grads, params)
        if self._m is None:
            self._m = [{k: np.zeros_like(v) for k, v in d.items()} for d in params]
            self._v = [{k: np.zeros_like(v) for k, v in d.items()} for d in params]
        self.steps += 1
        t = self.steps
        bc1 = 1.0 - self.beta1**t
        bc2 = 1.0 - self.beta2**t
        for d, g, m, v in zip(params, grads, self._m, self._v):
            for k in d:
                m[k] = self.beta1 * m[k] + (1.0 - self.beta1) * g[k]
                v[k] = self.beta2 * v[k] + (1.0 - self.beta2) * g[k] ** 2
                mhat = m[k] / bc1
                vhat = v[k] / bc2
                d[k] -= (self.lr * mhat / (np.sqrt(vhat) + self.eps)).astype(d[k].dtype)
