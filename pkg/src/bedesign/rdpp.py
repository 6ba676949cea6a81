"""Regularized determinantal sampling over rows of a design matrix.

The target law on subsets S of {0, ..., n-1} is

    Pr(S)  proportional to  det(X_S^T X_S + A) * prod_{i in S} p_i * prod_{i not in S} (1 - p_i)

with normalizer det(A + X^T diag(p) X).  Sampling is exact and runs
through a factored correlation kernel: an elementary DPP draw over the
spectrum of B B^T with B = diag(p)^(1/2) X (A + X^T diag(p) X)^(-1/2),
whose output is unioned with independent Bernoulli(p_i) inclusions.
"""

from dataclasses import dataclass
from itertools import combinations
from typing import NamedTuple

import numpy as np

from .dataset import covariance
from .errors import NumericalFailure, SingularMatrix, TooLarge
from .numerics import SINGULAR_RTOL, logdet, sym_eigen, symmetrize

# Residual-mass / pivot floor below which an elimination step is declared
# degenerate; the whole draw is then abandoned and restarted.
DEGENERATE_TOL = 1e-12
MAX_RESTARTS = 10000
ENUM_LIMIT = 20


@dataclass
class SpectralKernel:
    """Factored sampling state: spectrum of B B^T plus the Bernoulli floor p."""

    eigvals: np.ndarray  # (r,) eigenvalues of B B^T, each in [0, 1], nonincreasing
    eigvecs: np.ndarray  # (n, r) orthonormal columns
    p: np.ndarray  # (n,) Bernoulli floor probabilities
    logdet_z: float  # log det(A + X^T diag(p) X), the pmf normalizer

    @property
    def n(self):
        return self.eigvecs.shape[0]

    @property
    def r(self):
        return self.eigvals.shape[0]


@dataclass
class SampleDiag:
    """Per-draw diagnostics: sizes of the DPP part, Bernoulli part, union."""

    t_size: int
    bern_size: int
    union_size: int


class SizeEstimate(NamedTuple):
    exact: float  # E|S| = sum p_i + sum (1 - p_i) K_ii
    bound: float  # tr(B B^T) + sum p_i, always >= exact


def _validate_p(p, n):
    p = np.asarray(p, dtype=np.float64).ravel()
    if p.shape[0] != n:
        raise ValueError(f"p must have length {n}, got {p.shape[0]}")
    if not np.all(np.isfinite(p)):
        raise ValueError("p contains non-finite entries")
    if p.min(initial=0.0) < -1e-12 or p.max(initial=0.0) > 1.0 + 1e-12:
        raise ValueError("p entries must lie in [0, 1]")
    return np.clip(p, 0.0, 1.0)


def build_kernel(x, prior, p):
    """Factor the sampling kernel for design `x`, prior precision, and floor `p`.

    Raises SingularMatrix when Z = A + X^T diag(p) X is singular, since the
    law is undefined without a finite normalizer.
    """
    p = _validate_p(p, x.n)
    a = prior.a
    if a.shape[0] != x.d:
        raise ValueError("prior dimension does not match design")
    z = a + covariance(x, p)
    zvals, zvecs = sym_eigen(z)
    if zvals[0] <= 0.0 or zvals[-1] <= SINGULAR_RTOL * zvals[0]:
        raise SingularMatrix("normalizer A + X^T diag(p) X is singular")
    # B = diag(p)^(1/2) X Z^(-1/2); spectrum of B B^T via SVD of B
    z_inv_half = zvecs @ (zvecs.T / np.sqrt(zvals)[:, None])
    b = np.sqrt(p)[:, None] * (x.rows @ z_inv_half)
    try:
        u, sing, _ = np.linalg.svd(b, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"SVD of sampling factor failed: {exc}") from exc
    eigvals = np.clip(sing * sing, 0.0, 1.0)
    return SpectralKernel(
        eigvals=eigvals,
        eigvecs=u,
        p=p,
        logdet_z=float(np.sum(np.log(zvals))),
    )


def correlation_kernel(kernel):
    """Dense n-by-n marginal kernel diag(p) + (I-D_p)^(1/2) B B^T (I-D_p)^(1/2).

    Subset inclusion probabilities are its minors: Pr(T subset of S) equals
    det of the [T, T] block.  Intended for diagnostics and small-instance
    verification; it is quadratic in n.
    """
    root = np.sqrt(1.0 - kernel.p)
    k = (kernel.eigvecs * kernel.eigvals) @ kernel.eigvecs.T
    full = np.diag(kernel.p) + root[:, None] * k * root[None, :]
    return symmetrize(full)


def expected_size(kernel):
    """Exact E|S| and its closed-form upper bound tr(B B^T) + sum p_i."""
    kdiag = (kernel.eigvecs * kernel.eigvecs) @ kernel.eigvals
    exact = float(kernel.p.sum() + ((1.0 - kernel.p) * kdiag).sum())
    bound = float(kernel.eigvals.sum() + kernel.p.sum())
    return SizeEstimate(exact=exact, bound=bound)


def _categorical(rng, weights):
    """Draw an index proportional to nonnegative weights (at least one positive)."""
    cp = np.cumsum(weights)
    u = rng.random() * cp[-1]
    return min(int(np.searchsorted(cp, u, side="right")), len(cp) - 1)


def _draw_dpp_part(kernel, rng):
    """One attempt at the elementary-DPP phase; None signals a degenerate pivot."""
    keep = rng.random(kernel.r) < kernel.eigvals
    v = kernel.eigvecs[:, keep].copy()
    picked = []
    while v.shape[1] > 0:
        mass = np.einsum("ij,ij->i", v, v)
        total = mass.sum()
        if total < DEGENERATE_TOL:
            return None
        i = _categorical(rng, mass)
        col = int(np.argmax(np.abs(v[i])))
        if abs(v[i, col]) < DEGENERATE_TOL:
            return None
        picked.append(i)
        # Zero out coordinate i: scale the pivot column so its i-th entry is
        # one, subtract it from the rest, then drop it.
        pivot = v[:, col] / v[i, col]
        v = np.delete(v, col, axis=1)
        v -= np.outer(pivot, v[i, :])
        # Re-orthonormalize the remaining columns (modified Gram-Schmidt).
        basis = []
        for j in range(v.shape[1]):
            u = v[:, j]
            for b in basis:
                u = u - (b @ u) * b
            norm = np.linalg.norm(u)
            if norm < DEGENERATE_TOL:
                return None
            basis.append(u / norm)
        v = np.column_stack(basis) if basis else np.empty((kernel.n, 0))
    return np.array(sorted(picked), dtype=int)


def sample(kernel, rng):
    """Draw one subset from the law encoded by `kernel`.

    Returns (indices, SampleDiag) with indices sorted ascending.  The DPP
    phase restarts from scratch on a degenerate pivot; the Bernoulli phase
    is drawn only after the DPP phase succeeds.
    """
    for _ in range(MAX_RESTARTS):
        part = _draw_dpp_part(kernel, rng)
        if part is None:
            continue
        bern = np.flatnonzero(rng.random(kernel.n) < kernel.p)
        union = np.union1d(part, bern).astype(int)
        diag = SampleDiag(
            t_size=int(part.shape[0]),
            bern_size=int(bern.shape[0]),
            union_size=int(union.shape[0]),
        )
        return union, diag
    raise NumericalFailure("sampling failed: every attempt hit a degenerate pivot")


def _subset_indices(s, n):
    idx = np.asarray(list(s), dtype=int)
    if idx.size and (idx.min() < 0 or idx.max() >= n):
        raise ValueError("subset index out of range")
    if np.unique(idx).size != idx.size:
        raise ValueError("subset contains duplicate indices")
    return np.sort(idx)


def _log_factors(p):
    with np.errstate(divide="ignore"):
        return np.log(p), np.log1p(-p)


def pmf(x, prior, p, s):
    """Exact probability of drawing exactly the subset `s`.

    Computed in log space; subsets forced out by p_i = 0 (i in s) or
    p_i = 1 (i outside s) come back as exactly 0.0.
    """
    p = _validate_p(p, x.n)
    a = prior.a
    ldz = logdet(a + covariance(x, p))
    if ldz == float("-inf"):
        raise SingularMatrix("normalizer A + X^T diag(p) X is singular")
    idx = _subset_indices(s, x.n)
    logp, log1mp = _log_factors(p)
    mask = np.zeros(x.n, dtype=bool)
    mask[idx] = True
    log_factor = logp[mask].sum() + log1mp[~mask].sum()
    lds = logdet(x.subset_gram(idx) + a)
    return float(np.exp(lds - ldz + log_factor))


def enumerate_law(x, prior, p):
    """Full law over all 2^n subsets as {sorted index tuple: probability}.

    Exponential in n by construction, so refuse instances with n > 20.
    """
    if x.n > ENUM_LIMIT:
        raise TooLarge(f"exact enumeration capped at n = {ENUM_LIMIT}, got {x.n}")
    p = _validate_p(p, x.n)
    a = prior.a
    ldz = logdet(a + covariance(x, p))
    if ldz == float("-inf"):
        raise SingularMatrix("normalizer A + X^T diag(p) X is singular")
    logp, log1mp = _log_factors(p)
    base = log1mp.sum()  # log factor of the empty set; -inf handled below
    law = {}
    for size in range(x.n + 1):
        for combo in combinations(range(x.n), size):
            idx = np.asarray(combo, dtype=int)
            if idx.size:
                log_factor = logp[idx].sum() + np.delete(log1mp, idx).sum()
            else:
                log_factor = base
            lds = logdet(x.subset_gram(idx) + a)
            law[combo] = float(np.exp(lds - ldz + log_factor))
    return law
