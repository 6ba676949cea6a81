"""Bayesian experimental design by regularized determinantal sampling.

Pick k of n candidate measurement vectors to minimize a posterior
covariance functional (A/C/D/V-optimality) under a Gaussian prior with
precision A.  The core is an exact sampler for the regularized
determinantal law, an accept/reject selector with an explicit
multiplicative optimality certificate, a continuous-relaxation solver,
and classical baselines, plus a benchmark harness.
"""

from .baselines import (
    DesignResult,
    greedy_augment,
    greedy_bottom_up,
    predictive_length,
    uniform_subset,
)
from .bench import (
    CSV_HEADER,
    DEFF_HEADER,
    METHOD_NAMES,
    DeffRow,
    ExperimentSpec,
    ResultRow,
    bootstrap_ci,
    build_criterion,
    build_prior,
    deff_compare,
    deff_csv,
    default_k_grid,
    derive_seed,
    load_design,
    result_csv,
    run,
    run_method,
    write_csv,
)
from .criteria import (
    Criterion,
    effective_dim,
    evaluate,
    grad_w,
    scaled_effective_dim,
    subset_value,
)
from .dataset import (
    DesignMatrix,
    Prior,
    covariance,
    identity_prior,
    load_libsvm,
    parse_libsvm,
    synth_lowrank,
    write_libsvm,
)
from .errors import (
    AllZeroRows,
    BedesignError,
    GuaranteeRegimeWarning,
    InfeasibleWeights,
    NoSizeFeasibleDraw,
    NumericalFailure,
    ParseError,
    SingularMatrix,
    TooFewValues,
    TooLarge,
)
from .rdpp import (
    SampleDiag,
    SpectralKernel,
    build_kernel,
    correlation_kernel,
    enumerate_law,
    expected_size,
    pmf,
    sample,
)
from .relax import RelaxConfig, RelaxSolution, project_capped_simplex, solve
from .selector import select, select_relaxed, select_uniform

__version__ = "0.1.0"
