"""Design-matrix ingestion: sparse text files, synthetic generators, priors."""

from dataclasses import dataclass
from functools import cached_property
import os

import numpy as np

from .errors import ParseError
from .numerics import symmetrize


@dataclass
class DesignMatrix:
    """An n-by-d matrix whose rows are candidate experiment vectors.

    Treated as immutable after construction; labels are retained for
    provenance only and never enter any design computation.
    """

    rows: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.float64)
        if rows.ndim != 2:
            raise ValueError(f"rows must be 2-d, got shape {rows.shape}")
        n, d = rows.shape
        if n < 1 or d < 1:
            raise ValueError(f"need at least one row and one column, got {rows.shape}")
        if not np.all(np.isfinite(rows)):
            raise ValueError("rows contain non-finite entries")
        object.__setattr__(self, "rows", rows)
        if self.labels is not None:
            labels = np.asarray(self.labels, dtype=np.float64)
            if labels.shape != (n,):
                raise ValueError(f"labels must have shape ({n},), got {labels.shape}")
            object.__setattr__(self, "labels", labels)

    @property
    def n(self):
        return self.rows.shape[0]

    @property
    def d(self):
        return self.rows.shape[1]

    @cached_property
    def gram(self):
        """Full d-by-d Gram matrix X.T @ X, cached for repeated use."""
        return symmetrize(self.rows.T @ self.rows)

    def subset_gram(self, indices):
        """Gram matrix of the selected rows (symmetrized)."""
        sub = self.rows[np.asarray(indices, dtype=int)]
        return symmetrize(sub.T @ sub)


@dataclass
class Prior:
    """Gaussian prior precision A (d-by-d PSD) with an optional direction c."""

    a: np.ndarray
    c: np.ndarray | None = None

    def __post_init__(self):
        a = symmetrize(self.a)
        values = np.linalg.eigvalsh(a)
        top = float(values.max(initial=0.0))
        if values.min(initial=0.0) < -1e-10 * max(top, 1.0):
            raise ValueError("prior precision must be positive semidefinite")
        object.__setattr__(self, "a", a)
        if self.c is not None:
            c = np.asarray(self.c, dtype=np.float64).ravel()
            if c.shape[0] != a.shape[0]:
                raise ValueError("direction c must have length d")
            object.__setattr__(self, "c", c)

    @property
    def d(self):
        return self.a.shape[0]


def identity_prior(d, scale):
    """Prior with precision scale * I_d; scale must be nonnegative."""
    if scale < 0:
        raise ValueError("prior scale must be nonnegative")
    return Prior(a=float(scale) * np.eye(d))


def parse_libsvm(text):
    """Parse sparse `label index:value ...` lines into a DesignMatrix.

    Indices are 1-based and must be strictly increasing within a line; `#`
    starts a comment; blank lines are skipped.  The column count is the
    largest index seen anywhere.  Malformed lines raise ParseError with the
    1-based line number.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    labels = []
    entries = []  # per row: list of (0-based column, value)
    max_index = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        try:
            label = float(tokens[0])
        except ValueError:
            raise ParseError(f"malformed label {tokens[0]!r}", line=lineno) from None
        if not np.isfinite(label):
            raise ParseError(f"non-finite label {tokens[0]!r}", line=lineno)
        row = []
        prev = 0
        for tok in tokens[1:]:
            idx_str, sep, val_str = tok.partition(":")
            if not sep:
                raise ParseError(f"expected index:value, got {tok!r}", line=lineno)
            try:
                idx = int(idx_str)
            except ValueError:
                raise ParseError(f"malformed index {idx_str!r}", line=lineno) from None
            if idx < 1:
                raise ParseError(f"index {idx} is not positive", line=lineno)
            if idx <= prev:
                raise ParseError(
                    f"index {idx} does not increase (previous {prev})", line=lineno
                )
            try:
                val = float(val_str)
            except ValueError:
                raise ParseError(f"malformed value {val_str!r}", line=lineno) from None
            if not np.isfinite(val):
                raise ParseError(f"non-finite value {val_str!r}", line=lineno)
            row.append((idx - 1, val))
            prev = idx
        max_index = max(max_index, prev)
        labels.append(label)
        entries.append(row)
    if not labels:
        raise ParseError("no data lines found")
    if max_index == 0:
        raise ParseError("no feature entries found in any line")
    rows = np.zeros((len(labels), max_index))
    for i, row in enumerate(entries):
        for j, val in row:
            rows[i, j] = val
    return DesignMatrix(rows=rows, labels=np.asarray(labels))


def load_libsvm(path):
    """Read a sparse text file (or '-' for stdin) into a DesignMatrix."""
    if path == "-":
        import sys

        return parse_libsvm(sys.stdin.read())
    if not os.path.exists(path):
        raise ParseError(f"no such file: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        return parse_libsvm(fh.read())


def write_libsvm(x):
    """Serialize a DesignMatrix back to sparse text.

    Every entry is written, zeros included, so the column count survives a
    round trip and parse(write_libsvm(x)) reproduces the rows bit-exactly.
    """
    lines = []
    labels = x.labels if x.labels is not None else np.zeros(x.n)
    for label, row in zip(labels, x.rows):
        parts = [repr(float(label))]
        parts.extend(f"{j + 1}:{v!r}" for j, v in enumerate(row.tolist()))
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


def covariance(x, weights=None):
    """Weighted second-moment matrix sum_i w_i x_i x_i^T (symmetrized).

    With weights omitted this is the plain Gram matrix.  The result is PSD
    whenever all weights are nonnegative.
    """
    rows = x.rows
    if weights is None:
        return x.gram.copy()
    w = np.asarray(weights, dtype=np.float64).ravel()
    if w.shape[0] != x.n:
        raise ValueError(f"weights must have length {x.n}, got {w.shape[0]}")
    if not np.all(np.isfinite(w)):
        raise ValueError("weights contain non-finite entries")
    return symmetrize((rows * w[:, None]).T @ rows)


def synth_lowrank(d, s, eps, n, seed):
    """Synthetic design whose population covariance is low-rank plus a floor.

    The covariance is diagonal: entries (1 - eps) * (d / s) + eps on the s
    leading coordinates and eps elsewhere, so its trace is exactly d.  Rows
    are axis-aligned, each coordinate j contributed by m_j near-equal
    copies of sqrt(diag_j / m_j) * e_j, shuffled into a random order.
    """
    if not (1 <= s <= d):
        raise ValueError(f"need 1 <= s <= d, got s={s}, d={d}")
    if eps <= 0:
        raise ValueError("eps must be positive")
    if n < d:
        raise ValueError(f"need n >= d so every coordinate appears, got n={n}, d={d}")
    diag = np.full(d, float(eps))
    diag[:s] += (1.0 - eps) * (d / s)
    counts = np.full(d, n // d)
    counts[: n % d] += 1
    rows = np.zeros((n, d))
    pos = 0
    for j in range(d):
        rows[pos : pos + counts[j], j] = np.sqrt(diag[j] / counts[j])
        pos += counts[j]
    rng = np.random.default_rng(seed)
    rows = rows[rng.permutation(n)]
    return DesignMatrix(rows=rows)
