"""Symmetric variance-gamma distributions, their Stein equation and approximation bounds."""

from .distribution import (
    SvgParams, VgParams, density_at_center, svg_absolute_moment, svg_cdf, svg_cumulants, svg_moments,
    svg_pdf, svg_ppf, svg_sample, vg_cdf, vg_pdf, vg_sample,
)
from .errors import BoundValidityError, DomainError, QuadratureError, SingularityError
from .reports import BoundReport
from .special import bessel_i, bessel_k, int_i_lower, int_k_tail, inequality_suite
from .stein import (
    SteinSolution, TestFunction, apply_t_r, indicator, lipschitz, sign, sine, smoothed_indicator, solve,
    solve_d1, solve_d2, verify_solution_bounds,
)
from .transforms import (
    DistributionSpec, analytic_density, centered_equilibrium_density, centered_equilibrium_sample,
    finite_discrete, g_r_apply, rademacher, sampler_spec, square_bias_density, square_bias_sample, svg_spec,
    transform_moment, zero_bias_density, zero_bias_sample,
)
from .distances import (
    MetricValue, bounded_wasserstein_proxy, concentration_bound, kolmogorov_empirical,
    kolmogorov_from_wasserstein, kolmogorov_two_sample, wasserstein_empirical, wasserstein_two_sample,
)
from .bounds import (
    BOUND_IDS, general_coupling_bounds, product_clt_bounds, random_sum_bounds, six_moment_bound,
    suggest_beta, vg_svg_bounds,
)

__version__ = "0.1.0"
