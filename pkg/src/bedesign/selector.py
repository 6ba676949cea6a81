"""Accept/reject subset selection around the determinantal sampler.

Given importance weights w summing to k, draws subsets with Bernoulli
floor p = w / (1 + eps) until one is both within the size budget and
below an explicit multiplicative bound on the weighted relaxation value;
the bound certifies (1 + O(d_w / k + sqrt(log(k / d_w) / k)))-optimality
when the budget k clears four effective dimensions.
"""

import math
import warnings

import numpy as np

from .baselines import DesignResult, greedy_augment
from .criteria import effective_dim, evaluate, subset_value
from .dataset import covariance
from .errors import GuaranteeRegimeWarning, InfeasibleWeights, NoSizeFeasibleDraw
from .rdpp import build_kernel, sample
from .relax import RelaxConfig, solve

PAD_MODES = ("greedy", "random")


def _validate_weights(w, n, k):
    w = np.asarray(w, dtype=np.float64).ravel()
    if w.shape[0] != n:
        raise InfeasibleWeights(f"weights must have length {n}, got {w.shape[0]}")
    if not np.all(np.isfinite(w)):
        raise InfeasibleWeights("weights contain non-finite entries")
    if w.min(initial=0.0) < -1e-12 or w.max(initial=0.0) > 1.0 + 1e-12:
        raise InfeasibleWeights("weights must lie in [0, 1]")
    if abs(w.sum() - k) > 1e-6:
        raise InfeasibleWeights(f"weights must sum to k={k}, got {w.sum():.9f}")
    return np.clip(w, 0.0, 1.0)


def _pad(x, prior, crit, subset, k, rng, mode):
    if subset.shape[0] >= k:
        return subset
    if mode == "greedy":
        return greedy_augment(x, prior, crit, subset, k)
    complement = np.setdiff1d(np.arange(x.n), subset)
    extra = rng.choice(complement, size=k - subset.shape[0], replace=False)
    return np.sort(np.concatenate([subset, extra])).astype(int)


def select(x, prior, crit, w, k, rng, max_attempts=1000, pad="greedy"):
    """Accept/reject selection of at most k rows, padded up to exactly k.

    Each attempt draws from the determinantal law with floor w / (1 + eps).
    A draw is accepted when it fits the budget and its criterion value is
    at most (1 + 8 d_w / k + 8 sqrt(log(k / d_w) / k)) times the weighted
    relaxation value.  If no draw is accepted within `max_attempts`, the
    best size-feasible draw seen is returned instead (accepted_by tells
    which path fired); no size-feasible draw at all raises
    NoSizeFeasibleDraw.  The reported value is always recomputed on the
    final padded subset.
    """
    if pad not in PAD_MODES:
        raise ValueError(f"pad must be one of {PAD_MODES}, got {pad!r}")
    n = x.n
    if not isinstance(k, (int, np.integer)) or not 1 <= k <= n:
        raise ValueError(f"k must be an integer in [1, {n}], got {k!r}")
    k = int(k)
    w = _validate_weights(w, n, k)

    sigma_w = covariance(x, w)
    d_w = effective_dim(sigma_w, prior)  # raises SingularMatrix if undefined
    f_w = evaluate(crit, sigma_w, prior)

    ratio = d_w / k
    # d_w floor keeps the log from blowing up on near-zero effective dimension
    log_term = math.log(k / max(d_w, 1e-6))
    root = math.sqrt(max(log_term, 0.0) / k)
    eps = min(1.0, 4.0 * ratio + 6.0 * root)
    if k < 4.0 * d_w:
        # Outside the guarantee regime; proceed at full damping but say so.
        eps = 1.0
        warnings.warn(
            f"budget k={k} is below four effective dimensions (d_w={d_w:.3f}); "
            "the approximation guarantee does not apply",
            GuaranteeRegimeWarning,
        )
    threshold = (1.0 + 8.0 * ratio + 8.0 * root) * f_w

    kernel = build_kernel(x, prior, w / (1.0 + eps))
    best_subset = None
    best_value = float("inf")
    for attempt in range(1, max_attempts + 1):
        s, _ = sample(kernel, rng)
        if s.shape[0] > k:
            continue
        value = subset_value(x, prior, crit, s)
        if best_subset is None or value < best_value:
            best_subset, best_value = s, value
        if value <= threshold:
            padded = _pad(x, prior, crit, s, k, rng, pad)
            return DesignResult(
                subset=padded,
                value=subset_value(x, prior, crit, padded),
                attempts=attempt,
                accepted_by="bound-accept",
                eps_used=eps,
                d_w=d_w,
            )
    if best_subset is None:
        raise NoSizeFeasibleDraw(
            f"no draw within size budget k={k} in {max_attempts} attempts"
        )
    padded = _pad(x, prior, crit, best_subset, k, rng, pad)
    return DesignResult(
        subset=padded,
        value=subset_value(x, prior, crit, padded),
        attempts=max_attempts,
        accepted_by="best-seen-fallback",
        eps_used=eps,
        d_w=d_w,
    )


def select_uniform(x, prior, crit, k, rng, max_attempts=1000, pad="greedy"):
    """Selection with the uniform weight vector w_i = k / n.

    Its d_w is the effective dimension of the (k/n)-scaled covariance, so
    this needs no relaxation solve; it warns (does not fail) when k sits
    below four effective dimensions.
    """
    w = np.full(x.n, k / x.n)
    return select(x, prior, crit, w, k, rng, max_attempts=max_attempts, pad=pad)


def select_relaxed(
    x, prior, crit, k, rng, cfg=None, max_attempts=1000, pad="greedy"
):
    """Selection with weights from the continuous relaxation solver."""
    solution = solve(x, prior, crit, k, cfg or RelaxConfig())
    return select(
        x, prior, crit, solution.w, k, rng, max_attempts=max_attempts, pad=pad
    )
