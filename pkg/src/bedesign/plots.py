"""Figure rendering for benchmark outputs.

Renders matplotlib figures to files next to the CSV a run produces:
median criterion curves with bootstrap confidence bands, ratio and
runtime curves, effective-dimension sweeps, and subset-size histograms.
"""

from collections import defaultdict

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .bench import bootstrap_ci


def _series(rows, attr):
    """method -> (sorted ks, per-k list of finite values of `attr`)."""
    per_method = defaultdict(lambda: defaultdict(list))
    for r in rows:
        v = float(getattr(r, attr))
        if np.isfinite(v):
            per_method[r.method][r.k].append(v)
    out = {}
    for method, by_k in per_method.items():
        ks = sorted(by_k)
        out[method] = (ks, [by_k[k] for k in ks])
    return out


def _curve_with_band(ax, ks, groups, label):
    med = [float(np.median(g)) for g in groups]
    line = ax.plot(ks, med, marker="o", markersize=3, label=label)[0]
    los, his = [], []
    for g in groups:
        if len(g) >= 2:
            lo, hi = bootstrap_ci(g)
        else:
            lo = hi = g[0]
        los.append(lo)
        his.append(hi)
    ax.fill_between(ks, los, his, alpha=0.2, color=line.get_color())


def plot_metric_vs_k(rows, attr, ylabel, out_path, logy=False):
    fig, ax = plt.subplots(figsize=(6, 4))
    series = _series(rows, attr)
    for method, (ks, groups) in sorted(series.items()):
        _curve_with_band(ax, ks, groups, method)
    positive = any(v > 0 for _, gs in series.values() for g in gs for v in g)
    ax.set_xlabel("k")
    ax.set_ylabel(ylabel)
    if logy and positive:
        ax.set_yscale("log")
    _maybe_legend(ax)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def _maybe_legend(ax):
    if ax.get_legend_handles_labels()[0]:
        ax.legend(fontsize=8)


def plot_value_vs_k(rows, out_path):
    return plot_metric_vs_k(rows, "value", "criterion value", out_path)


def plot_ratio_vs_k(rows, out_path):
    fig, ax = plt.subplots(figsize=(6, 4))
    for method, (ks, groups) in sorted(_series(rows, "ratio").items()):
        _curve_with_band(ax, ks, groups, method)
    ax.axhline(1.0, color="gray", linewidth=0.8, linestyle="--")
    ax.set_xlabel("k")
    ax.set_ylabel("value / scaled-covariance baseline")
    _maybe_legend(ax)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def plot_runtime_vs_k(rows, out_path):
    return plot_metric_vs_k(rows, "runtime_ms", "runtime (ms)", out_path, logy=True)


def plot_deff(rows, out_path):
    """Scaled effective dimension vs k per covariance, with d_full and y=k."""
    fig, ax = plt.subplots(figsize=(6, 4))
    by_cov = defaultdict(list)
    for r in rows:
        by_cov[r.covariance].append(r)
    for name, group in sorted(by_cov.items()):
        group = sorted(group, key=lambda r: r.k)
        ks = [r.k for r in group]
        line = ax.plot(
            ks, [r.d_scaled for r in group], marker="o", markersize=3,
            label=f"{name}: scaled",
        )[0]
        ax.axhline(
            group[0].d_full, color=line.get_color(), linewidth=0.8, linestyle="--"
        )
    all_k = sorted({r.k for r in rows})
    if all_k:
        ax.plot(all_k, all_k, color="black", linewidth=0.8, label="k")
    ax.set_xlabel("k")
    ax.set_ylabel("effective dimension")
    _maybe_legend(ax)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def plot_size_hist(sizes, counts, out_path):
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(sizes, counts, width=0.8)
    ax.set_xlabel("|S|")
    ax.set_ylabel("draws")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path
