"""Acceptance gate: one test per stated requirement.

Each test prints exactly one `[criterion NN] PASS/FAIL` line (visible
under `pytest -s` or in captured output).  The two dataset-backed checks
look for files under $BED_DATA_DIR or <repo>/data and skip loudly when
the files are not provisioned.
"""

import itertools
import math
import os
import time
import warnings
from contextlib import contextmanager
from pathlib import Path

import numpy as np
import pytest
from numpy.testing import assert_allclose

from bedesign import (
    Criterion,
    DesignMatrix,
    ExperimentSpec,
    GuaranteeRegimeWarning,
    Prior,
    build_kernel,
    correlation_kernel,
    covariance,
    deff_compare,
    default_k_grid,
    effective_dim,
    enumerate_law,
    evaluate,
    expected_size,
    grad_w,
    load_libsvm,
    run,
    sample,
    scaled_effective_dim,
    select_relaxed,
    select_uniform,
    solve,
    subset_value,
)

from helpers import random_instance, random_spd

DATA_NAMES = ("mg_scale", "bodyfat_scale", "mpg_scale", "housing_scale")


def data_path(name):
    candidates = []
    env = os.environ.get("BED_DATA_DIR")
    if env:
        candidates.append(Path(env) / name)
    candidates.append(Path(__file__).resolve().parent.parent / "data" / name)
    for cand in candidates:
        if cand.is_file():
            return cand
    return None


@contextmanager
def report(num, desc):
    try:
        yield
    except BaseException:
        print(f"[criterion {num:02d}] FAIL {desc}")
        raise
    print(f"[criterion {num:02d}] PASS {desc}")


def skip_missing_data(num, desc, names):
    missing = [name for name in names if data_path(name) is None]
    if missing:
        reason = (
            f"dataset files not provisioned: {missing}; place them in "
            f"<repo>/data or point BED_DATA_DIR at them"
        )
        print(f"[criterion {num:02d}] SKIP {desc}: {reason}")
        pytest.skip(reason)


def test_criterion_01_pmf_normalization():
    with report(1, "pmf sums to 1 over all subsets (50 random instances)"):
        rng = np.random.default_rng(11)
        start = time.perf_counter()
        for trial in range(50):
            n = int(rng.integers(2, 11))
            d = int(rng.integers(1, 4))
            x, prior, p = random_instance(rng, n, d, spd=bool(trial % 2))
            total = sum(enumerate_law(x, prior, p).values())
            assert abs(total - 1.0) < 1e-8
        assert time.perf_counter() - start < 5.0


def test_criterion_02_sampler_total_variation():
    with report(2, "sampler matches the enumerated law in TV (2e5 draws)"):
        rng = np.random.default_rng(22)
        x, prior, p = random_instance(rng, 6, 2)
        law = enumerate_law(x, prior, p)
        kernel = build_kernel(x, prior, p)
        start = time.perf_counter()
        draws = 200_000
        counts = {}
        for _ in range(draws):
            s, _ = sample(kernel, rng)
            key = tuple(int(i) for i in s)
            counts[key] = counts.get(key, 0) + 1
        tv = 0.5 * sum(
            abs(counts.get(s, 0) / draws - prob) for s, prob in law.items()
        )
        assert tv <= 0.02
        assert time.perf_counter() - start < 30.0


def test_criterion_03_marginal_kernel_identity():
    with report(3, "singleton/pair marginals equal correlation-kernel minors"):
        rng = np.random.default_rng(33)
        for n in (4, 6, 8):
            x, prior, p = random_instance(rng, n, 2)
            law = enumerate_law(x, prior, p)
            kern = correlation_kernel(build_kernel(x, prior, p))
            for i in range(n):
                marg = sum(prob for s, prob in law.items() if i in s)
                assert abs(marg - kern[i, i]) < 1e-6
            for i, j in itertools.combinations(range(n), 2):
                marg = sum(
                    prob for s, prob in law.items() if i in s and j in s
                )
                minor = (
                    kern[i, i] * kern[j, j] - kern[i, j] * kern[j, i]
                )
                assert abs(marg - minor) < 1e-6


def test_criterion_04_expected_size():
    with report(4, "E|S| equals the kernel trace and obeys the size bound"):
        rng = np.random.default_rng(44)
        for trial in range(100):
            n = int(rng.integers(2, 8))
            d = int(rng.integers(1, 4))
            x, prior, p = random_instance(rng, n, d, spd=bool(trial % 2))
            law = enumerate_law(x, prior, p)
            mean_size = sum(len(s) * prob for s, prob in law.items())
            kernel = build_kernel(x, prior, p)
            est = expected_size(kernel)
            trace = float(np.trace(correlation_kernel(kernel)))
            assert abs(mean_size - trace) < 1e-8
            assert abs(mean_size - est.exact) < 1e-8
            assert mean_size <= est.bound + 1e-8
            assert abs(
                est.bound
                - (effective_dim(covariance(x, p), prior) + p.sum())
            ) < 1e-10
        # hand instance: two copies of the scalar row 1, unit prior, p = 1/2
        x = DesignMatrix(rows=np.ones((2, 1)))
        prior = Prior(a=np.eye(1))
        est = expected_size(build_kernel(x, prior, np.full(2, 0.5)))
        assert abs(est.exact - 1.25) < 1e-12
        assert abs(est.bound - 1.5) < 1e-12


def test_criterion_05_expectation_inequalities():
    with report(5, "inverse/determinant expectation inequalities hold"):
        rng = np.random.default_rng(55)
        for trial in range(20):
            spd = trial < 12
            x, prior, p = random_instance(rng, int(rng.integers(3, 7)), 2, spd=spd)
            a = prior.a
            z = a + covariance(x, p)
            z_inv = np.linalg.inv(z)
            law = enumerate_law(x, prior, p)
            e_inv = np.zeros_like(a)
            e_det_inv = 0.0
            det_mass = 0.0
            for s, prob in law.items():
                if prob <= 1e-14:
                    continue
                m = x.subset_gram(np.asarray(s, dtype=int)) + a
                det = np.linalg.det(m)
                if det > 1e-12:
                    e_det_inv += prob / det
                    det_mass += prob
                if spd:
                    e_inv += prob * np.linalg.inv(m)
            if spd:
                diff = z_inv - e_inv
                assert np.linalg.eigvalsh(diff).min() >= -1e-8
                assert np.abs(diff).max() <= 1e-8  # equality when A is SPD
            assert det_mass > 0.0
            assert 1.0 / np.linalg.det(z) - e_det_inv >= -1e-8


def test_criterion_06_acceptance_certificate():
    with report(6, "bound-accepted subsets satisfy the stated inequality"):
        rng0 = np.random.default_rng(66)
        x = DesignMatrix(rows=rng0.normal(size=(200, 5)))
        prior = Prior(a=0.1 * np.eye(5))
        crit = Criterion(kind="A")
        k = 25
        d_w = scaled_effective_dim(x.gram, prior, k, x.n)
        assert k >= 4.0 * d_w  # the regime the certificate covers
        factor = 1.0 + 8.0 * d_w / k + 8.0 * math.sqrt(math.log(k / d_w) / k)
        baseline = evaluate(crit, (k / x.n) * x.gram, prior)
        accepted = 0
        for seed in range(25):
            res = select_uniform(x, prior, crit, k, np.random.default_rng(seed))
            if res.accepted_by == "bound-accept":
                accepted += 1
                assert res.value <= factor * baseline * (1.0 + 1e-12)
        assert accepted >= 24


def test_criterion_07_relaxation_oracle():
    with report(7, "relaxation lower-bounds OPT_k; rounded value <= 1.5 OPT_k"):
        rng = np.random.default_rng(77)
        crit = Criterion(kind="A")
        for trial in range(20):
            x = DesignMatrix(rows=rng.normal(size=(10, 2)))
            prior = Prior(a=random_spd(rng, 2))
            k = 4 + trial % 5
            opt = min(
                subset_value(x, prior, crit, np.asarray(s, dtype=int))
                for s in itertools.combinations(range(10), k)
            )
            sol = solve(x, prior, crit, k)
            assert sol.objective <= opt + 1e-4
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", GuaranteeRegimeWarning)
                res = select_relaxed(
                    x, prior, crit, k, np.random.default_rng(trial)
                )
            assert res.value <= 1.5 * opt


def test_criterion_08_gradient_correctness():
    with report(8, "analytic weight gradients match central differences"):
        rng = np.random.default_rng(88)
        h = 1e-6
        for kind in ("A", "C", "D", "V"):
            for _ in range(20):
                n, d = 8, 3
                x = DesignMatrix(rows=rng.normal(size=(n, d)))
                prior = Prior(a=random_spd(rng, d))
                if kind == "C":
                    crit = Criterion(kind="C", c=rng.normal(size=d))
                elif kind == "V":
                    crit = Criterion(kind="V", x_full=x)
                else:
                    crit = Criterion(kind=kind)
                w = rng.uniform(0.2, 0.9, size=n)
                grad = grad_w(crit, x, w, prior)
                fd = np.empty(n)
                for i in range(n):
                    wp, wm = w.copy(), w.copy()
                    wp[i] += h
                    wm[i] -= h
                    fp = evaluate(crit, covariance(x, wp), prior)
                    fm = evaluate(crit, covariance(x, wm), prior)
                    fd[i] = (fp - fm) / (2.0 * h)
                assert_allclose(grad, fd, rtol=1e-5, atol=1e-7)


def test_criterion_09_effective_dimension_sweep():
    with report(9, "effective-dimension sweep reproduces the stated values"):
        start = time.perf_counter()
        rows = deff_compare(100, 10, 1e-2, 1e-2)
        elapsed = time.perf_counter() - start
        by_cov = {}
        for r in rows:
            by_cov.setdefault(r.covariance, []).append(r)
        low_full = by_cov["lowrank"][0].d_full
        ident_full = by_cov["identity"][0].d_full
        assert abs(low_full - 55.0) <= 1.0
        assert abs(ident_full - 99.0099) <= 1e-3
        for r in rows:
            assert r.d_scaled <= r.d_full + 1e-12
        assert elapsed < 1.0


def test_criterion_10_benchmark_reproduction():
    desc = "benchmark sweep on mg_scale reproduces the qualitative claims"
    skip_missing_data(10, desc, ("mg_scale",))
    with report(10, desc):
        path = str(data_path("mg_scale"))
        x = load_libsvm(path)
        d, n = x.d, x.n
        spec = ExperimentSpec(
            dataset=path,
            criterion="A",
            prior_scale=1e-5,
            k_grid=default_k_grid(d, n),
            trials=25,
            seed=0,
        )
        start = time.perf_counter()
        rows = list(run(spec))
        elapsed = time.perf_counter() - start
        assert elapsed < 600.0
        values = {}
        ratios = {}
        runtimes = {}
        for r in rows:
            values.setdefault((r.method, r.k), []).append(r.value)
            ratios.setdefault((r.method, r.k), []).append(r.ratio)
            runtimes.setdefault((r.method, r.k), []).append(r.runtime_ms)
        ks = sorted(spec.k_grid)
        below = sum(
            np.median(values[("rdpp-uniform", k)])
            < np.median(values[("uniform", k)])
            for k in ks
        )
        assert below >= 0.8 * len(ks)
        for k in ks:
            assert min(ratios[("rdpp-sdp", k)]) >= 0.5
        for k in ks:
            if k >= 2 * d:
                g = np.median(values[("greedy", k)])
                s = np.median(values[("rdpp-sdp", k)])
                assert max(g, s) / min(g, s) <= 1.05
        for k in ks:
            tg = np.median(runtimes[("greedy", k)])
            tr = np.median(runtimes[("rdpp-uniform", k)])
            assert max(tg, tr) / max(min(tg, tr), 1e-9) <= 10.0


def test_criterion_11_parser_shape_regression():
    desc = "published dataset files parse to their documented shapes"
    skip_missing_data(11, desc, DATA_NAMES)
    with report(11, desc):
        expected = {
            "mg_scale": (1385, 6),
            "bodyfat_scale": (252, 14),
            "mpg_scale": (392, 7),
            "housing_scale": (506, 13),
        }
        for name, (n, d) in expected.items():
            x = load_libsvm(str(data_path(name)))
            assert (x.n, x.d) == (n, d)
