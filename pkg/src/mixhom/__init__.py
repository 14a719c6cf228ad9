"""Numerical laboratory for singular integrals whose kernels mix isotropic
and parabolic homogeneity: Littlewood-Paley analysis on a periodic grid,
discrete Calderon reconstruction, product kernels with cancellation,
truncated and maximal operators, and function-space norms."""

from .grid import (
    FrequencyField,
    Grid,
    GridField,
    Metric,
    MetricKind,
    convolve,
    delta_field,
    dilate_point,
    lp_norm,
    metric_norm,
    random_band_limited,
    sup_norm,
)
from .lp import (
    HardyVariant,
    LatticeConvention,
    LPGenerator,
    ScaleRange,
    build_generator,
    hardy_norm,
    square_function,
    square_function_com,
)
from .calderon import calderon_reconstruct, probe_decay_fit, psi_jk
from .kernels import (
    Boundary,
    ProductKernel,
    Regime,
    classify_regime,
    enforce_cancellation,
    hormander_constant,
    make_kernel,
    spherical_mean,
    truncated_apply,
    truncation_sweep,
)
from .maximal import (
    MaximalConfig,
    cotlar_fit,
    hl_maximal,
    maximal_truncation,
    strong_maximal,
    weak_type_probe,
)
from .spaces import (
    LipschitzParams,
    TestFunctionParams,
    decay_exponent_fit,
    lip_norm,
    lip_norm_com,
    lip_norm_lp,
    test_norm,
)
from .experiments import EXPERIMENTS, run_experiment, smooth_suite

__version__ = "0.1.0"
