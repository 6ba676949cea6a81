"""Command-line interface.

Subcommands: `design` (pick one subset and print it), `bench run`
(method-by-k sweep to CSV plus figures), `bench deff` (effective
dimension sweep to CSV plus figure), `sample` (subset-size histogram of
the determinantal law).  Exit codes: 0 ok, 1 usage or bad request, 2
data error, 3 numerical failure.  `BED_SEED` supplies the seed when no
--seed flag is given.
"""

import argparse
import os
import sys

import numpy as np

from . import bench
from .criteria import subset_value
from .errors import BedesignError, NoSizeFeasibleDraw, NumericalFailure, ParseError
from .rdpp import build_kernel, expected_size, sample

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

DESIGN_METHODS = ("rdpp-sdp", "rdpp-uniform", "greedy", "uniform", "plen")


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the CLI contract reserves 2 for data."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _resolve_seed(value):
    if value is not None:
        return value
    env = os.environ.get("BED_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ValueError(f"BED_SEED must be an integer, got {env!r}") from None
    return 0


def _parse_int_list(text):
    try:
        return tuple(int(tok) for tok in text.split(",") if tok.strip())
    except ValueError:
        raise ValueError(f"expected comma-separated integers, got {text!r}") from None


def _parse_p(spec_str, n):
    """Bernoulli floor from 'uniform:VALUE', 'uniform:K/N', or a file of n reals."""
    if spec_str.startswith("uniform:"):
        body = spec_str[len("uniform:") :]
        try:
            if "/" in body:
                num, den = body.split("/", 1)
                value = float(num) / float(den)
            else:
                value = float(body)
        except (ValueError, ZeroDivisionError):
            raise ValueError(f"malformed probability spec {spec_str!r}") from None
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"probability {value} outside [0, 1]")
        return np.full(n, value)
    p = bench.load_array(spec_str, "probability").ravel()
    if p.shape[0] != n:
        raise ParseError(f"probability file must hold {n} values, got {p.shape[0]}")
    return p


def _add_prior_flags(parser):
    parser.add_argument("--prior-scale", type=float, default=None,
                        help="prior precision A = SCALE * I (default 1/n)")
    parser.add_argument("--prior-file", default=None,
                        help="text file with a d-by-d prior precision matrix")


def _cmd_design(args):
    x = bench.load_design(args.data, args.normalize)
    prior = bench.build_prior(x, args.prior_scale, args.prior_file)
    crit = bench.build_criterion(args.criterion, x, args.c_vector)
    rng = np.random.default_rng(_resolve_seed(args.seed))
    subset = bench.run_method(
        args.method, x, prior, crit, args.k, rng,
        max_attempts=args.max_attempts, pad=args.pad,
    )
    value = subset_value(x, prior, crit, subset)
    print("subset:", " ".join(str(int(i)) for i in subset))
    print("value:", repr(float(value)))
    return 0


def _spec_from_toml(path):
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except FileNotFoundError:
        raise ParseError(f"no such spec file: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ParseError(f"malformed spec file {path}: {exc}") from None
    known = {
        "dataset", "criterion", "prior_scale", "prior_file", "c_file", "k_grid",
        "trials", "seed", "methods", "normalize", "timing", "pad", "max_attempts",
    }
    unknown = set(raw) - known
    if unknown:
        raise ParseError(f"unknown spec keys: {sorted(unknown)}")
    if "dataset" not in raw:
        raise ParseError("spec file must set 'dataset'")
    for key in ("k_grid", "methods"):
        if key in raw:
            raw[key] = tuple(raw[key])
    return bench.ExperimentSpec(**raw)


def _spec_from_flags(args):
    if args.data is None:
        raise ValueError("either --spec or --data is required")
    kwargs = dict(
        dataset=args.data,
        criterion=args.criterion,
        prior_scale=args.prior_scale,
        prior_file=args.prior_file,
        c_file=args.c_vector,
        trials=args.trials,
        seed=_resolve_seed(args.seed),
        normalize=args.normalize,
        timing=not args.no_timing,
        pad=args.pad,
        max_attempts=args.max_attempts,
    )
    if args.k_grid is not None:
        kwargs["k_grid"] = _parse_int_list(args.k_grid)
    if args.methods is not None:
        kwargs["methods"] = tuple(
            tok.strip() for tok in args.methods.split(",") if tok.strip()
        )
    return bench.ExperimentSpec(**kwargs)


def _cmd_bench_run(args):
    spec = _spec_from_toml(args.spec) if args.spec else _spec_from_flags(args)
    rows = list(bench.run(spec))
    bench.write_csv(bench.result_csv(rows), args.out)
    print(f"wrote {args.out} ({len(rows)} rows)")
    if not args.no_figures:
        from . import plots

        stem = os.path.splitext(args.out)[0]
        for name, fn in (
            ("value", plots.plot_value_vs_k),
            ("ratio", plots.plot_ratio_vs_k),
            ("runtime", plots.plot_runtime_vs_k),
        ):
            path = fn(rows, f"{stem}_{name}.png")
            print(f"wrote {path}")
    return 0


def _cmd_bench_deff(args):
    k_grid = _parse_int_list(args.k_grid) if args.k_grid else None
    rows = bench.deff_compare(
        args.d, args.s, args.eps, args.a_scale, k_grid=k_grid, n=args.n
    )
    bench.write_csv(bench.deff_csv(rows), args.out)
    print(f"wrote {args.out} ({len(rows)} rows)")
    if not args.no_figures:
        from . import plots

        path = plots.plot_deff(rows, os.path.splitext(args.out)[0] + ".png")
        print(f"wrote {path}")
    return 0


def _cmd_sample(args):
    x = bench.load_design(args.data, False)
    prior = bench.build_prior(x, args.prior_scale, args.prior_file)
    p = _parse_p(args.p, x.n)
    kernel = build_kernel(x, prior, p)
    rng = np.random.default_rng(_resolve_seed(args.seed))
    sizes = np.zeros(args.draws, dtype=int)
    for i in range(args.draws):
        subset, _ = sample(kernel, rng)
        sizes[i] = subset.shape[0]
    counts = np.bincount(sizes)
    lines = ["size,count"]
    lines.extend(f"{size},{int(c)}" for size, c in enumerate(counts))
    bench.write_csv("\n".join(lines) + "\n", args.out)
    est = expected_size(kernel)
    print(f"wrote {args.out}")
    print(f"mean size: {sizes.mean():.6f}")
    print(f"expected size: {est.exact!r} (bound {est.bound!r})")
    if not args.no_figures:
        from . import plots

        path = plots.plot_size_hist(
            np.arange(counts.shape[0]), counts, os.path.splitext(args.out)[0] + ".png"
        )
        print(f"wrote {path}")
    return 0


def build_parser():
    parser = _Parser(prog="bedesign", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_design = sub.add_parser("design", help="select one subset and print it")
    p_design.add_argument("--data", required=True, help="data file or lowrank:... spec")
    p_design.add_argument("--criterion", choices=("A", "C", "D", "V"), default="A")
    p_design.add_argument("--k", type=int, required=True)
    p_design.add_argument("--method", choices=DESIGN_METHODS, required=True)
    _add_prior_flags(p_design)
    p_design.add_argument("--c-vector", default=None,
                          help="text file with the d-vector for criterion C")
    p_design.add_argument("--seed", type=int, default=None)
    p_design.add_argument("--pad", choices=("greedy", "random"), default="greedy")
    p_design.add_argument("--normalize", action="store_true")
    p_design.add_argument("--max-attempts", type=int, default=1000)
    p_design.set_defaults(func=_cmd_design)

    p_bench = sub.add_parser("bench", help="benchmark sweeps")
    bench_sub = p_bench.add_subparsers(dest="bench_command", required=True)

    p_run = bench_sub.add_parser("run", help="method-by-k sweep to CSV")
    p_run.add_argument("--spec", default=None, help="TOML experiment spec file")
    p_run.add_argument("--data", default=None)
    p_run.add_argument("--criterion", choices=("A", "C", "D", "V"), default="A")
    _add_prior_flags(p_run)
    p_run.add_argument("--c-vector", default=None)
    p_run.add_argument("--k-grid", default=None, help="comma-separated subset sizes")
    p_run.add_argument("--trials", type=int, default=25)
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--methods", default=None, help="comma-separated method names")
    p_run.add_argument("--normalize", action="store_true")
    p_run.add_argument("--pad", choices=("greedy", "random"), default="greedy")
    p_run.add_argument("--max-attempts", type=int, default=1000)
    p_run.add_argument("--no-timing", action="store_true",
                       help="write runtime_ms as 0 for byte-identical reruns")
    p_run.add_argument("--out", default="results.csv")
    p_run.add_argument("--no-figures", action="store_true")
    p_run.set_defaults(func=_cmd_bench_run)

    p_deff = bench_sub.add_parser("deff", help="effective-dimension sweep to CSV")
    p_deff.add_argument("--d", type=int, required=True)
    p_deff.add_argument("--s", type=int, required=True)
    p_deff.add_argument("--eps", type=float, required=True)
    p_deff.add_argument("--a-scale", type=float, required=True)
    p_deff.add_argument("--n", type=int, default=160,
                        help="population size the k/n scaling refers to")
    p_deff.add_argument("--k-grid", default=None)
    p_deff.add_argument("--out", default="deff.csv")
    p_deff.add_argument("--no-figures", action="store_true")
    p_deff.set_defaults(func=_cmd_bench_deff)

    p_sample = sub.add_parser("sample", help="subset-size histogram of the law")
    p_sample.add_argument("--data", required=True)
    p_sample.add_argument("--p", required=True,
                          help="'uniform:VALUE', 'uniform:K/N', or a file of n reals")
    p_sample.add_argument("--draws", type=int, required=True)
    _add_prior_flags(p_sample)
    p_sample.add_argument("--seed", type=int, default=None)
    p_sample.add_argument("--out", default="sample_hist.csv")
    p_sample.add_argument("--no-figures", action="store_true")
    p_sample.set_defaults(func=_cmd_sample)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"bedesign: data error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"bedesign: data error: {exc}", file=sys.stderr)
        return 2
    except (NumericalFailure, NoSizeFeasibleDraw) as exc:
        print(f"bedesign: numerical failure: {exc}", file=sys.stderr)
        return 3
    except (ValueError, BedesignError) as exc:
        print(f"bedesign: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
