"""Design criteria (A, C, D, V), their weight gradients, effective dimension.

Each criterion maps a candidate information matrix Sigma to a scalar loss
through the regularized matrix M = Sigma + A, where A is the prior
precision.  Smaller is better for every kind; a singular M evaluates to
+inf so infeasible designs lose every comparison without special cases.
"""

from dataclasses import dataclass

import numpy as np

from .dataset import DesignMatrix, Prior, covariance
from .numerics import is_singular, psd_solve, sym_eigen, symmetrize

VALID_KINDS = ("A", "C", "D", "V")


@dataclass
class Criterion:
    """A criterion kind plus the data some kinds require.

    kind "C" needs a nonzero direction `c`; kind "V" needs the full design
    `x_full` whose rows define the averaged predictive variance.
    """

    kind: str
    c: np.ndarray | None = None
    x_full: DesignMatrix | None = None

    def __post_init__(self):
        if self.kind not in VALID_KINDS:
            raise ValueError(f"unknown criterion kind {self.kind!r}")
        if self.kind == "C":
            if self.c is None:
                raise ValueError("criterion C requires a direction vector c")
            c = np.asarray(self.c, dtype=np.float64).ravel()
            if not np.all(np.isfinite(c)) or np.linalg.norm(c) == 0.0:
                raise ValueError("criterion C requires a finite nonzero c")
            object.__setattr__(self, "c", c)
        if self.kind == "V" and self.x_full is None:
            raise ValueError("criterion V requires the full design matrix")


def _prior_matrix(a):
    return a.a if isinstance(a, Prior) else symmetrize(a)


def evaluate(crit, sigma, prior):
    """Criterion value at information matrix `sigma`; +inf when singular.

    A: tr(M^-1)            C: c^T M^-1 c
    D: det(M)^(-1/d)       V: (1/n) tr(X M^-1 X^T) over the full design
    """
    a = _prior_matrix(prior)
    sigma = symmetrize(sigma)
    if sigma.shape != a.shape:
        raise ValueError(f"shape mismatch: sigma {sigma.shape} vs prior {a.shape}")
    m = sigma + a
    values, vectors = sym_eigen(m)
    if is_singular(values):
        return float("inf")
    d = m.shape[0]
    if crit.kind == "A":
        return float(np.sum(1.0 / values))
    if crit.kind == "C":
        proj = vectors.T @ crit.c
        return float(np.sum(proj * proj / values))
    if crit.kind == "D":
        return float(np.exp(-np.sum(np.log(values)) / d))
    # V: trace of M^-1 against the full Gram matrix, averaged over rows
    g = crit.x_full.gram
    if g.shape != m.shape:
        raise ValueError("criterion V full design dimension mismatch")
    diag = np.einsum("ij,ij->j", vectors, g @ vectors)
    return float(np.sum(diag / values) / crit.x_full.n)


def subset_value(x, prior, crit, indices):
    """Criterion value of the subset design X_S (rows `indices` of `x`)."""
    return evaluate(crit, x.subset_gram(indices), prior)


def grad_w(crit, x, w, prior):
    """Gradient of w -> f(sum_i w_i x_i x_i^T) at weight vector `w`.

    Raises SingularMatrix when Sigma_w + A is singular; the criteria are
    only differentiable on the nonsingular region.
    """
    a = _prior_matrix(prior)
    rows = x.rows
    m = covariance(x, w) + a
    minv = psd_solve(m, np.eye(m.shape[0]))
    if crit.kind == "A":
        y = rows @ minv
        return -np.einsum("ij,ij->i", y, y)
    if crit.kind == "C":
        t = minv @ crit.c
        proj = rows @ t
        return -proj * proj
    if crit.kind == "D":
        d = m.shape[0]
        _, ld = np.linalg.slogdet(m)
        quad = np.einsum("ij,ij->i", rows @ minv, rows)
        return -(1.0 / d) * np.exp(-ld / d) * quad
    # V: outer matrix is the criterion's reference design, not necessarily x
    full = crit.x_full
    w_mat = minv @ full.gram @ minv
    quad = np.einsum("ij,ij->i", rows @ w_mat, rows)
    return -quad / full.n


def effective_dim(sigma, a):
    """Effective dimension tr(Sigma (Sigma + A)^-1), clamped to [0, d].

    With A = 0 this is the rank-counting d; growing A shrinks it toward 0.
    Raises SingularMatrix when Sigma + A is singular.
    """
    amat = _prior_matrix(a)
    sigma = symmetrize(sigma)
    sol = psd_solve(sigma + amat, sigma)
    d = sigma.shape[0]
    return float(min(max(np.trace(sol), 0.0), d))


def scaled_effective_dim(sigma_x, a, k, n):
    """Effective dimension of the k/n-scaled covariance, tr applied to (k/n) Sigma_X.

    Equals effective_dim((k/n) * sigma_x, a); this is the quantity that
    governs how large a subset budget k must be before the sampling
    guarantees engage.
    """
    if n <= 0 or k <= 0:
        raise ValueError("k and n must be positive")
    return effective_dim((k / n) * symmetrize(sigma_x), a)
