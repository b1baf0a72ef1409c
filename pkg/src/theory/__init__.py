"""Closed-form rates, the Gaussian Hessian recursion and polynomial-decay bounds"""
from .rates import (
    RateCertificate, SETTINGS, SETTING_PARAMS, contraction_main, rate_catalog, default_catalog_sweep,
)
from .gaussian import (
    MatrixPair, gaussian_recursion, gaussian_limits, limit_eigenvalues, linear_rate, binfty_residual,
    warm_start_lower_bound, eigen_traces, eventually_monotone,
)
from .bounds import (
    lighttail_cov_bound, lipschitz_cov_bound, polynomial_bound, polynomial_rate_theorem, polynomial_constant,
    recursion_previous, recursion_as_stated,
)

__all__ = [
    'RateCertificate', 'SETTINGS', 'SETTING_PARAMS', 'contraction_main', 'rate_catalog',
    'default_catalog_sweep', 'MatrixPair', 'gaussian_recursion', 'gaussian_limits', 'limit_eigenvalues',
    'linear_rate', 'binfty_residual', 'eventually_monotone',
    'warm_start_lower_bound', 'eigen_traces', 'lighttail_cov_bound', 'lipschitz_cov_bound',
    'polynomial_bound', 'polynomial_rate_theorem', 'polynomial_constant', 'recursion_previous',
    'recursion_as_stated',
]
