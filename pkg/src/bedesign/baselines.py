"""Deterministic and randomized reference strategies for subset selection.

Also defines DesignResult, the record every selection routine returns;
the accept/reject fields are populated only by the determinantal
selector, baselines leave them at their defaults.
"""

from dataclasses import dataclass

import numpy as np

from .criteria import evaluate, subset_value
from .dataset import covariance
from .errors import AllZeroRows, SingularMatrix
from .numerics import psd_solve, symmetrize


@dataclass
class DesignResult:
    subset: np.ndarray  # k distinct row indices, ascending
    value: float  # criterion value of the subset design
    attempts: int = 0  # sampler draws consumed (0 for deterministic methods)
    accepted_by: str | None = None  # "bound-accept" | "best-seen-fallback" | None
    eps_used: float | None = None
    d_w: float | None = None


def _validate_k(n, k):
    if not isinstance(k, (int, np.integer)) or not 1 <= k <= n:
        raise ValueError(f"k must be an integer in [1, {n}], got {k!r}")
    return int(k)


def _candidate_values(x, prior, crit, gram_cur):
    """Criterion value after adding each single row to the current subset.

    Fast path uses rank-one update identities on M^-1; when the current
    M = gram + A is still singular it falls back to evaluating each
    candidate from scratch (+inf entries are fine, they just lose).
    """
    rows = x.rows
    a = prior.a if hasattr(prior, "a") else prior
    m = symmetrize(gram_cur) + a
    try:
        minv = psd_solve(m, np.eye(m.shape[0]))
    except SingularMatrix:
        vals = np.empty(x.n)
        for i in range(x.n):
            vals[i] = evaluate(crit, gram_cur + np.outer(rows[i], rows[i]), prior)
        return vals
    u = np.einsum("ij,ij->i", rows @ minv, rows)  # x_i^T M^-1 x_i
    if crit.kind == "A":
        y = rows @ minv
        num = np.einsum("ij,ij->i", y, y)  # x_i^T M^-2 x_i
        return float(np.trace(minv)) - num / (1.0 + u)
    if crit.kind == "C":
        t = minv @ crit.c
        proj = rows @ t
        return float(crit.c @ t) - proj * proj / (1.0 + u)
    if crit.kind == "D":
        _, ld = np.linalg.slogdet(m)
        d = m.shape[0]
        return np.exp(-(ld + np.log1p(u)) / d)
    # V
    full = crit.x_full
    wmat = minv @ full.gram @ minv
    num = np.einsum("ij,ij->i", rows @ wmat, rows)
    base = float(np.sum(minv * full.gram))  # tr(M^-1 G)
    return (base - num / (1.0 + u)) / full.n


def greedy_augment(x, prior, crit, start, k):
    """Grow `start` one best row at a time until it has k rows.

    Ties go to the lowest index.  Deterministic: no randomness anywhere.
    Returns the augmented subset sorted ascending.
    """
    k = _validate_k(x.n, k)
    chosen = sorted(int(i) for i in start)
    if len(set(chosen)) != len(chosen):
        raise ValueError("start subset contains duplicates")
    if chosen and (chosen[0] < 0 or chosen[-1] >= x.n):
        raise ValueError("start subset index out of range")
    if len(chosen) > k:
        raise ValueError(f"start subset already larger than k={k}")
    selected = np.zeros(x.n, dtype=bool)
    selected[chosen] = True
    gram_cur = x.subset_gram(chosen)
    while len(chosen) < k:
        vals = _candidate_values(x, prior, crit, gram_cur)
        candidates = np.flatnonzero(~selected)
        pick = int(candidates[np.argmin(vals[candidates])])
        chosen.append(pick)
        selected[pick] = True
        gram_cur = gram_cur + np.outer(x.rows[pick], x.rows[pick])
    return np.array(sorted(chosen), dtype=int)


def greedy_bottom_up(x, prior, crit, k):
    """Greedy forward selection from the empty set, k steps of best-single-row."""
    subset = greedy_augment(x, prior, crit, [], k)
    return DesignResult(subset=subset, value=subset_value(x, prior, crit, subset))


def uniform_subset(n, k, rng):
    """k distinct indices uniformly at random, ascending."""
    k = _validate_k(n, k)
    return np.sort(rng.choice(n, size=k, replace=False)).astype(int)


def _weighted_index(rng, weights):
    cp = np.cumsum(weights)
    u = rng.random() * cp[-1]
    return min(int(np.searchsorted(cp, u, side="right")), len(cp) - 1)


def predictive_length(x, k, rng, squared=False):
    """k distinct indices drawn sequentially with weights ||x_i|| (or squared).

    Zero-norm rows have weight zero; if the positive-weight rows run out
    before k are chosen the remainder is filled uniformly from the
    zero-norm rows, so k = n always returns every index.  All rows zero
    raises AllZeroRows.
    """
    k = _validate_k(x.n, k)
    norms = np.linalg.norm(x.rows, axis=1)
    if squared:
        norms = norms * norms
    if not np.any(norms > 0.0):
        raise AllZeroRows("every row has zero norm")
    weights = norms.astype(np.float64).copy()
    chosen = []
    for _ in range(k):
        if weights.sum() <= 0.0:
            # Only zero-weight rows remain; fill uniformly among them.
            leftovers = np.ones(x.n)
            leftovers[chosen] = 0.0
            pick = _weighted_index(rng, leftovers)
        else:
            pick = _weighted_index(rng, weights)
        chosen.append(pick)
        weights[pick] = 0.0
    return np.array(sorted(chosen), dtype=int)
