"""Capped-simplex projection and the continuous relaxation solver."""

import itertools

import numpy as np
import pytest

from bedesign import (
    Criterion,
    DesignMatrix,
    Prior,
    RelaxConfig,
    covariance,
    evaluate,
    project_capped_simplex,
    solve,
    subset_value,
)
from bedesign.errors import SingularMatrix

from helpers import random_design, random_spd


class TestProjection:
    def test_feasible_passthrough(self):
        v = np.array([0.9, 0.1, 0.0])
        out = project_capped_simplex(v, 1)
        np.testing.assert_array_equal(out, v)
        assert out is not v  # caller keeps ownership of its array

    def test_caps_actives(self):
        out = project_capped_simplex(np.array([2.0, 2.0, 0.0, 0.0]), 2)
        np.testing.assert_allclose(out, [1.0, 1.0, 0.0, 0.0], atol=1e-9)

    def test_extreme_budgets(self):
        v = np.array([0.3, -0.7, 2.0, 0.5])
        np.testing.assert_allclose(project_capped_simplex(v, 4), np.ones(4), atol=1e-9)
        np.testing.assert_allclose(project_capped_simplex(v, 0), np.zeros(4), atol=1e-9)

    def test_random_sweep_feasible_and_idempotent(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            n = int(rng.integers(2, 30))
            k = int(rng.integers(0, n + 1))
            v = rng.normal(size=n) * 3.0
            w = project_capped_simplex(v, k)
            assert w.min() >= -1e-12 and w.max() <= 1.0 + 1e-12
            assert abs(w.sum() - k) <= 1e-9
            np.testing.assert_allclose(project_capped_simplex(w, k), w, atol=1e-9)

    def test_projection_optimality(self):
        # Euclidean projection beats random feasible points in distance
        rng = np.random.default_rng(1)
        v = rng.normal(size=6) * 2.0
        w = project_capped_simplex(v, 3)
        dist = np.sum((w - v) ** 2)
        for _ in range(200):
            other = project_capped_simplex(rng.uniform(-1, 2, size=6), 3)
            assert dist <= np.sum((other - v) ** 2) + 1e-8

    def test_bad_budget(self):
        with pytest.raises(ValueError):
            project_capped_simplex(np.ones(3), 4)


def tiny_problem(seed=7, n=10, d=2, a_scale=0.2):
    rng = np.random.default_rng(seed)
    x = random_design(rng, n, d)
    prior = Prior(a=a_scale * np.eye(d))
    return x, prior


def brute_force_opt(x, prior, crit, k):
    return min(
        subset_value(x, prior, crit, list(s))
        for s in itertools.combinations(range(x.n), k)
    )


class TestSolve:
    def test_full_budget_forced(self):
        x, prior = tiny_problem()
        crit = Criterion(kind="A")
        sol = solve(x, prior, crit, x.n)
        np.testing.assert_array_equal(sol.w, np.ones(x.n))
        assert abs(sol.objective - evaluate(crit, covariance(x), prior)) < 1e-12
        assert sol.converged

    def test_feasibility_and_recompute(self):
        x, prior = tiny_problem()
        for kind in ("A", "C", "D", "V"):
            crit = _crit(kind, x)
            sol = solve(x, prior, crit, 4)
            assert sol.w.min() >= -1e-12 and sol.w.max() <= 1.0 + 1e-12
            assert abs(sol.w.sum() - 4) <= 1e-6
            recomputed = evaluate(crit, covariance(x, sol.w), prior)
            assert abs(sol.objective - recomputed) <= 1e-10

    def test_beats_random_feasible_points(self):
        x, prior = tiny_problem(seed=3)
        crit = Criterion(kind="A")
        sol = solve(x, prior, crit, 4)
        rng = np.random.default_rng(4)
        for _ in range(10_000):
            w = project_capped_simplex(rng.uniform(-0.2, 1.2, size=x.n), 4)
            assert sol.objective <= evaluate(crit, covariance(x, w), prior) + 1e-7

    def test_lower_bounds_brute_force(self):
        x, prior = tiny_problem(seed=5)
        for kind in ("A", "C", "D", "V"):
            crit = _crit(kind, x)
            sol = solve(x, prior, crit, 4)
            opt = brute_force_opt(x, prior, crit, 4)
            assert sol.objective <= opt + 1e-4

    def test_mirror_descent_agrees(self):
        x, prior = tiny_problem(seed=6)
        crit = Criterion(kind="A")
        pg = solve(x, prior, crit, 4)
        md = solve(x, prior, crit, 4, RelaxConfig(method="mirror-descent"))
        assert md.objective <= pg.objective * (1.0 + 1e-3) + 1e-6

    def test_fixed_step_rule(self):
        x, prior = tiny_problem(seed=8)
        crit = Criterion(kind="A")
        ref = solve(x, prior, crit, 4)
        fixed = solve(
            x, prior, crit, 4,
            RelaxConfig(step_rule="fixed", step=0.02, max_iters=3000),
        )
        assert fixed.objective <= ref.objective * 1.01 + 1e-6

    def test_objective_never_above_start(self):
        x, prior = tiny_problem(seed=9)
        crit = Criterion(kind="D")
        start = evaluate(crit, covariance(x, np.full(x.n, 4 / x.n)), prior)
        sol = solve(x, prior, crit, 4)
        assert sol.objective <= start + 1e-12

    def test_d_permutation_invariance(self):
        x, prior = tiny_problem(seed=10)
        crit = Criterion(kind="D")
        sol = solve(x, prior, crit, 5)
        perm = np.random.default_rng(11).permutation(x.n)
        xp = DesignMatrix(rows=x.rows[perm])
        solp = solve(xp, prior, crit, 5)
        assert abs(sol.objective - solp.objective) < 1e-8

    def test_singular_start_raises(self):
        x = DesignMatrix(rows=np.array([[1.0, 0.0], [1.0, 0.0]]))
        with pytest.raises(SingularMatrix):
            solve(x, Prior(a=np.zeros((2, 2))), Criterion(kind="A"), 1)

    def test_bad_k(self):
        x, prior = tiny_problem()
        with pytest.raises(ValueError):
            solve(x, prior, Criterion(kind="A"), 0)
        with pytest.raises(ValueError):
            solve(x, prior, Criterion(kind="A"), x.n + 1)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            RelaxConfig(method="newton")
        with pytest.raises(ValueError):
            RelaxConfig(step_rule="exact")
        with pytest.raises(ValueError):
            RelaxConfig(max_iters=0)
        with pytest.raises(ValueError):
            RelaxConfig(tol=0.0)


def _crit(kind, x):
    if kind == "C":
        return Criterion(kind="C", c=np.arange(1.0, x.d + 1.0))
    if kind == "V":
        return Criterion(kind="V", x_full=x)
    return Criterion(kind=kind)
