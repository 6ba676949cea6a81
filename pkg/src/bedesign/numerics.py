"""Dense symmetric linear algebra with explicit singularity handling.

Every routine works in float64, treats eigenvalues at or below
``SINGULAR_RTOL`` times the largest eigenvalue as zero, and is
deterministic for a fixed input.
"""

from typing import NamedTuple

import numpy as np

from .errors import NumericalFailure, SingularMatrix

# Relative spectral cutoff below which a matrix counts as singular.
SINGULAR_RTOL = 1e-12
# Allowed relative asymmetry before a matrix is rejected outright.
SYMMETRY_RTOL = 1e-12


class EigenPair(NamedTuple):
    values: np.ndarray  # eigenvalues, nonincreasing
    vectors: np.ndarray  # orthonormal columns, vectors[:, j] pairs with values[j]


def symmetrize(m, rtol=SYMMETRY_RTOL):
    """Return (m + m.T) / 2 after checking `m` is square and near-symmetric.

    Averaging removes the drift that accumulating outer products picks up;
    asymmetry beyond `rtol` relative to the entry magnitudes means the
    caller passed something that was never symmetric, so raise ValueError.
    """
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    gap = np.abs(m - m.T)
    if not np.all(gap <= rtol * (1.0 + np.abs(m) + np.abs(m.T))):
        raise ValueError("matrix is not symmetric to tolerance")
    return 0.5 * (m + m.T)


def sym_eigen(m):
    """Eigendecomposition of a symmetric matrix with eigenvalues nonincreasing."""
    m = symmetrize(m)
    try:
        values, vectors = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigendecomposition failed: {exc}") from exc
    # eigh returns ascending order; flip to nonincreasing
    return EigenPair(values[::-1].copy(), vectors[:, ::-1].copy())


def is_singular(values):
    """Spectral singularity test on eigenvalues of a PSD matrix."""
    values = np.asarray(values, dtype=np.float64)
    top = float(values.max(initial=0.0))
    return top <= 0.0 or float(values.min()) <= SINGULAR_RTOL * top


def psd_solve(m, rhs):
    """Solve m @ x = rhs for symmetric PSD `m`.

    Raises SingularMatrix when the spectrum of `m` fails the relative
    cutoff, instead of returning garbage from a near-singular solve.
    """
    values, vectors = sym_eigen(m)
    if is_singular(values):
        raise SingularMatrix("matrix is singular to tolerance")
    rhs = np.asarray(rhs, dtype=np.float64)
    coeff = vectors.T @ rhs
    if coeff.ndim == 1:
        coeff = coeff / values
    else:
        coeff = coeff / values[:, None]
    return vectors @ coeff


def spd_inverse(m):
    """Inverse of a symmetric positive definite matrix (SingularMatrix otherwise)."""
    return psd_solve(m, np.eye(np.asarray(m).shape[0]))


def logdet(m):
    """log det of a symmetric PSD matrix; -inf when singular to tolerance."""
    m = symmetrize(m)
    try:
        values = np.linalg.eigvalsh(m)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigenvalue computation failed: {exc}") from exc
    if is_singular(values):
        return float("-inf")
    return float(np.sum(np.log(values)))
