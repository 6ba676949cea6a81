"""Continuous relaxation of subset selection over the capped simplex.

Minimizes w -> f(sum_i w_i x_i x_i^T) subject to 0 <= w_i <= 1 and
sum_i w_i = k.  Two first-order methods are provided: projected gradient
with Armijo backtracking (default) and exponentiated-gradient mirror
descent followed by the same projection.  For the D criterion the solver
descends the convex surrogate -log det(Sigma_w + A), which has the same
minimizers; the reported objective is always the true criterion value.
"""

from dataclasses import dataclass

import numpy as np

from .criteria import evaluate, grad_w
from .dataset import covariance
from .errors import SingularMatrix
from .numerics import logdet, psd_solve

METHODS = ("projected-gradient", "mirror-descent")
STEP_RULES = ("backtracking", "fixed")


@dataclass
class RelaxConfig:
    method: str = "projected-gradient"
    step_rule: str = "backtracking"
    max_iters: int = 5000
    tol: float = 1e-7  # relative decrease below which progress counts as stalled
    step: float = 1.0  # initial step size; constant when step_rule is "fixed"
    armijo_c: float = 1e-4
    patience: int = 5  # consecutive stalled iterations before declaring convergence

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.step_rule not in STEP_RULES:
            raise ValueError(f"unknown step rule {self.step_rule!r}")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.tol <= 0.0:
            raise ValueError("tol must be positive")


@dataclass
class RelaxSolution:
    w: np.ndarray
    objective: float  # true criterion value at w
    iters: int
    converged: bool


def project_capped_simplex(v, k):
    """Euclidean projection of `v` onto {w : 0 <= w_i <= 1, sum w_i = k}.

    The projection is clip(v - tau, 0, 1) for the shift tau that makes the
    sum come out to k; tau is located by bisection.  Feasible inputs are
    returned unchanged.
    """
    v = np.asarray(v, dtype=np.float64).ravel()
    n = v.shape[0]
    if not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= {n}, got k={k}")
    if v.min(initial=0.0) >= 0.0 and v.max(initial=0.0) <= 1.0 and abs(v.sum() - k) <= 1e-9:
        return v.copy()
    lo = v.min() - 1.0  # sum of clips is n here
    hi = v.max()  # sum of clips is 0 here
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if np.clip(v - mid, 0.0, 1.0).sum() >= k:
            lo = mid
        else:
            hi = mid
    w = np.clip(v - lo, 0.0, 1.0)
    return w


def solve(x, prior, crit, k, cfg=None):
    """Minimize the relaxed objective; returns the weight vector and value.

    Raises SingularMatrix when even the uniform starting point w = k/n
    leaves Sigma_w + A singular, since no descent direction exists there.
    """
    cfg = cfg or RelaxConfig()
    n = x.n
    if not isinstance(k, (int, np.integer)) or not 1 <= k <= n:
        raise ValueError(f"k must be an integer in [1, {n}], got {k!r}")
    k = int(k)
    a = prior.a

    if crit.kind == "D":
        # Convex surrogate; gradient is -x_i^T M^-1 x_i.
        def phi(w):
            ld = logdet(covariance(x, w) + a)
            return float("inf") if ld == float("-inf") else -ld

        def grad(w):
            minv = psd_solve(covariance(x, w) + a, np.eye(x.d))
            return -np.einsum("ij,ij->i", x.rows @ minv, x.rows)

    else:

        def phi(w):
            return evaluate(crit, covariance(x, w), prior)

        def grad(w):
            return grad_w(crit, x, w, prior)

    if k == n:
        w = np.ones(n)
        return RelaxSolution(
            w=w,
            objective=evaluate(crit, covariance(x, w), prior),
            iters=0,
            converged=True,
        )

    w = np.full(n, k / n)
    f = phi(w)
    if f == float("inf"):
        raise SingularMatrix("relaxed objective is singular at the uniform start")

    def propose(w, g, step):
        if cfg.method == "projected-gradient":
            return project_capped_simplex(w - step * g, k)
        # Multiplicative update; exponent clipped against overflow.
        return project_capped_simplex(w * np.exp(np.clip(-step * g, -50.0, 50.0)), k)

    best_w, best_f = w.copy(), f
    step = cfg.step
    stalled = 0
    converged = False
    iters = 0
    for iters in range(1, cfg.max_iters + 1):
        g = grad(w)
        if cfg.step_rule == "fixed":
            trial = propose(w, g, cfg.step)
            ft = phi(trial)
        else:
            # Backtracking: halve until Armijo sufficient decrease holds and
            # the objective does not increase (keeps the sequence monotone).
            accepted = False
            while step >= 1e-16:
                trial = propose(w, g, step)
                ft = phi(trial)
                decrease = cfg.armijo_c * float(g @ (trial - w))
                if ft <= f + decrease and ft <= f:
                    accepted = True
                    break
                step *= 0.5
            if not accepted:
                # No acceptable step above the floor: stationary to precision.
                converged = True
                break
            step = min(step * 1.5, 1e3)
        rel = (f - ft) / max(1.0, abs(f))
        w, f = trial, ft
        if f < best_f:
            best_w, best_f = w.copy(), f
        if rel < cfg.tol:
            stalled += 1
            if stalled >= cfg.patience:
                converged = True
                break
        else:
            stalled = 0

    return RelaxSolution(
        w=best_w,
        objective=evaluate(crit, covariance(x, best_w), prior),
        iters=iters,
        converged=converged,
    )
