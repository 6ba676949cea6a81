"""Shared instance generators for the test suite."""

import numpy as np

from bedesign import DesignMatrix, Prior


def random_design(rng, n, d, scale=1.0):
    return DesignMatrix(rows=scale * rng.normal(size=(n, d)))


def random_spd(rng, d, scale=1.0):
    g = rng.normal(size=(d, d))
    return scale * (g @ g.T) + 0.1 * scale * np.eye(d)


def random_psd_singular(rng, d):
    """PSD with rank d-1 (one zero eigenvalue)."""
    g = rng.normal(size=(d, max(d - 1, 1)))
    return g @ g.T


def random_instance(rng, n, d, spd=True):
    """Design, prior, and an interior Bernoulli floor for law-level tests."""
    x = random_design(rng, n, d)
    a = random_spd(rng, d) if spd else random_psd_singular(rng, d)
    p = rng.uniform(0.05, 0.95, size=n)
    return x, Prior(a=a), p
