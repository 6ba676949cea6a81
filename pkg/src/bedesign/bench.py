"""Benchmark harness: criterion-vs-k sweeps over methods, CSV emission.

Each (method, k, trial) cell runs with its own deterministically derived
seed, so results are reproducible regardless of execution order.  Rows
stream out in canonical order sorted by (method, k, trial).
"""

import hashlib
import time
import warnings
from dataclasses import dataclass

import numpy as np

from .baselines import greedy_bottom_up, predictive_length, uniform_subset
from .criteria import Criterion, effective_dim, evaluate, subset_value
from .dataset import (
    DesignMatrix,
    Prior,
    covariance,
    identity_prior,
    load_libsvm,
    synth_lowrank,
)
from .errors import BedesignError, GuaranteeRegimeWarning, ParseError, TooFewValues
from .selector import select_relaxed, select_uniform

METHOD_NAMES = ("greedy", "predictive-length", "rdpp-sdp", "rdpp-uniform", "uniform")
METHOD_ALIASES = {"plen": "predictive-length"}

CSV_HEADER = "method,k,trial,value,ratio,runtime_ms,seed"
DEFF_HEADER = "covariance,k,d_scaled,d_full"


@dataclass
class ExperimentSpec:
    """Configuration of one benchmark sweep.

    `dataset` is either a path to a sparse text file or a synthetic spec
    of the form "lowrank:d,s,eps,n,seed".  A k grid of None spans [d, 5d].
    `prior_scale` of None means the 1/n default; `timing` False zeroes the
    runtime column so reruns are byte-identical.
    """

    dataset: str
    criterion: str = "A"
    prior_scale: float | None = None
    prior_file: str | None = None
    c_file: str | None = None
    k_grid: tuple[int, ...] | None = None
    trials: int = 25
    seed: int = 0
    methods: tuple[str, ...] = METHOD_NAMES
    normalize: bool = False
    timing: bool = True
    pad: str = "greedy"
    max_attempts: int = 1000

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        methods = tuple(METHOD_ALIASES.get(m, m) for m in self.methods)
        unknown = set(methods) - set(METHOD_NAMES)
        if unknown:
            raise ValueError(f"unknown methods: {sorted(unknown)}")
        object.__setattr__(self, "methods", methods)


@dataclass
class ResultRow:
    method: str
    k: int
    trial: int
    value: float
    ratio: float  # value / criterion at the (k/n)-scaled full covariance
    runtime_ms: float
    seed: int


@dataclass
class DeffRow:
    covariance: str
    k: int
    d_scaled: float  # effective dimension at precision inflated by n/k
    d_full: float


def derive_seed(seed, method, k, trial):
    """Stable 63-bit per-cell seed from the run seed and cell coordinates."""
    key = f"{seed}|{method}|{k}|{trial}".encode()
    digest = hashlib.sha256(key).digest()
    return int.from_bytes(digest[:8], "little") >> 1


def default_k_grid(d, n):
    """Nine near-evenly spaced subset sizes spanning [d, 5d], capped at n."""
    lo, hi = d, min(5 * d, n)
    grid = sorted(set(int(round(v)) for v in np.linspace(lo, hi, 9)))
    return tuple(g for g in grid if 1 <= g <= n)


def load_design(data, normalize=False):
    """Resolve an ExperimentSpec data string to a DesignMatrix."""
    if data.startswith("lowrank:"):
        parts = data[len("lowrank:") :].split(",")
        if len(parts) != 5:
            raise ParseError(f"synthetic spec needs d,s,eps,n,seed: {data!r}")
        try:
            d, s, n, seed = int(parts[0]), int(parts[1]), int(parts[3]), int(parts[4])
            eps = float(parts[2])
        except ValueError:
            raise ParseError(f"malformed synthetic spec: {data!r}") from None
        x = synth_lowrank(d, s, eps, n, seed)
    else:
        x = load_libsvm(data)
    if normalize:
        norms = np.linalg.norm(x.rows, axis=1)
        scale = np.where(norms > 0.0, norms, 1.0)
        x = DesignMatrix(rows=x.rows / scale[:, None], labels=x.labels)
    return x


def load_array(path, what):
    """np.loadtxt with load failures mapped onto ParseError."""
    try:
        return np.asarray(np.loadtxt(path), dtype=np.float64)
    except FileNotFoundError:
        raise ParseError(f"no such {what} file: {path}") from None
    except ValueError as exc:
        raise ParseError(f"malformed {what} file {path}: {exc}") from None


def build_prior(x, prior_scale=None, prior_file=None):
    """Prior from an explicit file, an explicit scale, or the 1/n default."""
    if prior_file is not None:
        mat = np.atleast_2d(load_array(prior_file, "prior"))
        if mat.shape != (x.d, x.d):
            raise ParseError(
                f"prior file must be {x.d}x{x.d}, got {mat.shape[0]}x{mat.shape[1]}"
            )
        return Prior(a=mat)
    scale = (1.0 / x.n) if prior_scale is None else float(prior_scale)
    return identity_prior(x.d, scale)


def build_criterion(kind, x, c_file=None):
    """Criterion object for a kind letter, loading c for kind C as needed."""
    if kind == "C":
        c = load_array(c_file, "direction") if c_file is not None else np.ones(x.d)
        return Criterion(kind="C", c=c)
    if kind == "V":
        return Criterion(kind="V", x_full=x)
    return Criterion(kind=kind)


def run_method(method, x, prior, crit, k, rng, max_attempts=1000, pad="greedy"):
    """Dispatch one selection method by canonical name; returns the subset."""
    method = METHOD_ALIASES.get(method, method)
    if method == "greedy":
        return greedy_bottom_up(x, prior, crit, k).subset
    if method == "uniform":
        return uniform_subset(x.n, k, rng)
    if method == "predictive-length":
        return predictive_length(x, k, rng)
    if method == "rdpp-uniform":
        return select_uniform(
            x, prior, crit, k, rng, max_attempts=max_attempts, pad=pad
        ).subset
    if method == "rdpp-sdp":
        # Relaxation solve plus accept/reject, timed as one call by run()
        return select_relaxed(
            x, prior, crit, k, rng, max_attempts=max_attempts, pad=pad
        ).subset
    raise ValueError(f"unknown method {method!r}")


def run(spec):
    """Yield one ResultRow per (method, k, trial), canonically ordered.

    Method failures inside a cell produce a row with NaN value and ratio
    instead of aborting the sweep.  Guarantee-regime warnings are
    suppressed here because a k sweep intentionally crosses the regime
    boundary.
    """
    x = load_design(spec.dataset, spec.normalize)
    prior = build_prior(x, spec.prior_scale, spec.prior_file)
    crit = build_criterion(spec.criterion, x, spec.c_file)
    n = x.n
    k_grid = spec.k_grid or default_k_grid(x.d, n)
    k_grid = tuple(int(k) for k in k_grid)
    if any(k < 1 or k > n for k in k_grid):
        raise ValueError(f"k grid must lie within [1, {n}], got {k_grid}")
    base = covariance(x)
    for method in sorted(spec.methods):
        for k in sorted(k_grid):
            denom = evaluate(crit, (k / n) * base, prior)
            for trial in range(spec.trials):
                cell_seed = derive_seed(spec.seed, method, k, trial)
                rng = np.random.default_rng(cell_seed)
                start = time.perf_counter()
                try:
                    with warnings.catch_warnings():
                        warnings.simplefilter("ignore", GuaranteeRegimeWarning)
                        subset = run_method(
                            method, x, prior, crit, k, rng,
                            max_attempts=spec.max_attempts, pad=spec.pad,
                        )
                    value = subset_value(x, prior, crit, subset)
                except BedesignError:
                    value = float("nan")
                elapsed_ms = (
                    (time.perf_counter() - start) * 1e3 if spec.timing else 0.0
                )
                yield ResultRow(
                    method=method,
                    k=k,
                    trial=trial,
                    value=value,
                    ratio=value / denom,
                    runtime_ms=elapsed_ms,
                    seed=cell_seed,
                )


def bootstrap_ci(values, level=0.95, resamples=2000, rng=None):
    """Percentile bootstrap interval for the mean of `values`."""
    vals = np.asarray(list(values), dtype=np.float64)
    if vals.size < 2:
        raise TooFewValues(f"need at least 2 values, got {vals.size}")
    if not 0.0 < level < 1.0:
        raise ValueError("level must be in (0, 1)")
    rng = rng if rng is not None else np.random.default_rng(0)
    idx = rng.integers(0, vals.size, size=(resamples, vals.size))
    means = vals[idx].mean(axis=1)
    alpha = 0.5 * (1.0 - level)
    lo, hi = np.quantile(means, [alpha, 1.0 - alpha])
    return float(lo), float(hi)


def deff_compare(d, s, eps, a_scale, k_grid=None, n=160):
    """Effective-dimension sweep for the identity and low-rank covariances.

    For each covariance emits, per k, the scaled effective dimension (the
    one at precision inflated by n/k) next to the full effective
    dimension; n fixes the population size the k/n scaling refers to.
    """
    if not (1 <= s <= d):
        raise ValueError(f"need 1 <= s <= d, got s={s}, d={d}")
    if eps <= 0 or a_scale < 0:
        raise ValueError("eps must be positive and a_scale nonnegative")
    if k_grid is None:
        k_grid = tuple(range(5, 105, 5))
    k_grid = tuple(int(k) for k in k_grid)
    if any(k < 1 or k > n for k in k_grid):
        raise ValueError(f"k grid must lie within [1, {n}], got {k_grid}")
    a = a_scale * np.eye(d)
    low = np.full(d, float(eps))
    low[:s] += (1.0 - eps) * (d / s)
    rows = []
    for name, sigma in (("identity", np.eye(d)), ("lowrank", np.diag(low))):
        d_full = effective_dim(sigma, a)
        for k in sorted(k_grid):
            d_scaled = effective_dim((k / n) * sigma, a)
            rows.append(
                DeffRow(covariance=name, k=k, d_scaled=d_scaled, d_full=d_full)
            )
    return rows


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def result_csv(rows):
    """Render ResultRows as CSV text, shortest round-trip float formatting."""
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(
            ",".join(
                (
                    r.method,
                    str(r.k),
                    str(r.trial),
                    _fmt(float(r.value)),
                    _fmt(float(r.ratio)),
                    _fmt(float(r.runtime_ms)),
                    str(r.seed),
                )
            )
        )
    return "\n".join(lines) + "\n"


def deff_csv(rows):
    lines = [DEFF_HEADER]
    for r in rows:
        lines.append(
            ",".join(
                (r.covariance, str(r.k), _fmt(float(r.d_scaled)), _fmt(float(r.d_full)))
            )
        )
    return "\n".join(lines) + "\n"


def write_csv(text, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
