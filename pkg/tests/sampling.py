"""Random parameter sets drawn from the validity regions of each family."""

import math

import numpy as np

from liouville_neumann.canonical import CanonicalParams, validate_params


def _power(rng, K):
    lam = rng.uniform(0.5, 2.0)
    if K == 1:
        gamma = rng.uniform(0.3, 2.5)
        r0 = rng.uniform(0.0, 3.0)
        th = rng.uniform(0.0, 2 * math.pi)
    elif K == 0:
        gamma = rng.uniform(0.3, 1.6)
        th = rng.uniform(math.pi * gamma + 0.1, 2 * math.pi)
        r0 = rng.uniform(0.3, 3.0)
    else:
        r0 = lam * rng.uniform(1.3, 3.0)
        a0 = math.asin(lam / r0)
        top = 2 * math.pi - a0 - 0.05
        th = rng.uniform(a0 + 0.35 * math.pi + 0.05, top)
        gamma = rng.uniform(0.3, (th - a0) / math.pi - 0.01)
    return CanonicalParams("Power", K, lam, r0 * complex(math.cos(th), math.sin(th)), gamma)


def _log(rng, K):
    lam = rng.uniform(0.5, 2.0)
    margin = 0.0 if K == 0 else lam
    if K == 1:
        im = rng.uniform(-2.0, 5.0)
    elif rng.uniform() < 0.5:
        im = -margin - rng.uniform(0.2, 2.0)
    else:
        im = math.pi + margin + rng.uniform(0.2, 2.0)
    return CanonicalParams("Log", K, lam, complex(rng.uniform(-2, 2), im))


def random_valid(rng, K, log_share=0.3):
    """A params set with ``validate_params`` verdict Valid."""
    while True:
        p = _log(rng, K) if rng.uniform() < log_share else _power(rng, K)
        if validate_params(p).valid:
            return p


def random_suite(seed, per_k=10):
    rng = np.random.default_rng(seed)
    return [random_valid(rng, K) for K in (-1, 0, 1) for _ in range(per_k)]
