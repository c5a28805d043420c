"""Analytics, sampling and risk measurement for refracted skew Brownian motion:
Brownian motion with one drift below a level, another above it, and a
local-time skew at the level itself.
"""

from .core import (
    Coeffs,
    ModelParams,
    Roots,
    coeffs,
    erfc,
    erfcx,
    fundamental_solutions,
    norm_cdf,
    norm_pdf,
    norm_quantile,
    roots,
    wronskian_form,
)
from .density import (
    cdf_general,
    cdf_origin,
    cdf_origin_grid,
    density_alternating,
    density_jump,
    density_one_drift,
    first_passage_kernel,
    first_passage_kernel_laplace,
    stationary_density,
    transition_density,
    transition_density_grid,
    transition_density_origin,
    transition_density_origin_grid,
)
from .exit_times import (
    UnsupportedRegimeError,
    escape_probabilities,
    expected_hitting_time,
    hitting_probability,
    one_sided_hitting_laplace,
    two_sided_exit_down,
    two_sided_exit_up,
)
from .potential import (
    laplace_density_oracle,
    potential_density,
    potential_density_one_barrier,
    potential_density_origin,
    potential_density_two_barriers,
)
from .quadrature import DEFAULT_QUAD, QuadConfig, QuadratureAccuracyError, integrate, integrate_semi_infinite
from .risk import RiskReport, cvar_mixture, mc_var_cvar, var_from_cdf, var_mixture
from .sampler import (
    CdfTable,
    FitConfig,
    FitError,
    MixtureTruncatedNormal,
    PathSimConfig,
    fit_tna,
    inverse_cdf_table,
    mixture_cdf,
    mixture_pdf,
    mixture_quantile,
    sample_oracle,
    sample_tna,
    simulate_paths,
    tabulate_cdf,
)
from .stats import KsResult, ks_pvalue, ks_statistic, ks_test

__version__ = "0.1.0"
