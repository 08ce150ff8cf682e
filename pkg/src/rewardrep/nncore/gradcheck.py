"""Central finite-difference oracle for backprop gradients.

Runs in float64 regardless of the network's dtype so the comparison is not
drowned in float32 rounding noise. The loss function maps the network
output to (scalar loss, dloss/doutput).
"""

from __future__ import annotations

import numpy as np


def _perturbed(net64, flat, j, orig, delta, x):
    flat[j] = orig + delta
    return net64.forward(x)


def finite_difference_check(net, x, loss_fn, epsilon=1e-3, max_entries=None, seed=0):
    """Max relative error between backprop and (L(+eps) - L(-eps)) / 2eps.

    Perturbs every parameter entry, or a seed-chosen sample of up to
    `max_entries` per parameter tensor for large networks. Entries where
    |analytic| + |numeric| <= 1e-8 are skipped. Each entry is scored
    against the best of the central difference and the second-order
    one-sided differences. When the two one-sided estimates disagree with
    each other the perturbation interval straddles a ReLU/maxpool kink; no
    difference formula is valid there, so the entry is skipped (any real
    backprop bug still shows up on the smooth entries). A candidate
    agreeing with the analytic value within 1e-8 absolute scores zero
    error, which covers dead units where both derivatives vanish.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    net64 = net.copy(dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)

    y, caches = net64.forward_cached(x)
    l0, gy = loss_fn(y)
    _, grads = net64.backward(caches, gy)

    rng = np.random.default_rng(seed)
    max_rel = 0.0
    for i, d in enumerate(net64.params):
        for k, p in d.items():
            flat = p.reshape(-1)
            gflat = grads[i][k].reshape(-1)
            idxs = np.arange(flat.size)
            if max_entries is not None and flat.size > max_entries:
                idxs = rng.choice(flat.size, size=max_entries, replace=False)
            for j in idxs:
                orig = flat[j]
                lp, lph, lmh, lm = (
                    loss_fn(_perturbed(net64, flat, j, orig, delta, x))[0]
                    for delta in (epsilon, epsilon / 2, -epsilon / 2, -epsilon)
                )
                flat[j] = orig
                numeric = (lp - lm) / (2.0 * epsilon)
                analytic = gflat[j]
                if abs(analytic) + abs(numeric) <= 1e-8:
                    continue
                right = (-3.0 * l0 + 4.0 * lph - lp) / epsilon
                left = (3.0 * l0 - 4.0 * lmh + lm) / epsilon
                if abs(right - left) > 1e-3 * max(abs(right), abs(left), 1e-8):
                    # the one-sided estimates only disagree when the interval
                    # straddles a ReLU/maxpool kink; no difference formula is
                    # valid there, so the entry is not checkable at this epsilon
                    continue
                candidates = (numeric, right, left)
                rel = min(
                    0.0
                    if abs(analytic - c) <= 1e-8
                    else abs(analytic - c) / (abs(analytic) + abs(c))
                    for c in candidates
                )
                max_rel = max(max_rel, rel)
    return max_rel
