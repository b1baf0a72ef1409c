"""Checks of the identities and inequalities satisfied along Sinkhorn runs"""
from .conditionals import (
    conditional_given_y, conditional_at_point, conditional_mean_cov, weighted_mean_cov, extended_psi,
    gradient_identity_residual, hessian_identity_residual,
)
from .semiconcavity import (
    ProbeSpec, SemiconcavityEstimate, estimate_lambda, semiconcavity_profile_check, conditional_kl_check,
)
from .identities import entropy_difference_identity, wrong_marginal_crosscheck, IdentityRecorder
from .stability import (
    StabilityReport, stability_gap, perturbation_family, perturbation_with_kl, heavy_tail_decay_fit,
)

__all__ = [
    'conditional_given_y', 'conditional_at_point', 'conditional_mean_cov', 'weighted_mean_cov',
    'extended_psi', 'gradient_identity_residual', 'hessian_identity_residual', 'ProbeSpec',
    'SemiconcavityEstimate', 'estimate_lambda', 'semiconcavity_profile_check', 'conditional_kl_check',
    'entropy_difference_identity', 'wrong_marginal_crosscheck', 'IdentityRecorder', 'StabilityReport',
    'stability_gap', 'perturbation_family', 'perturbation_with_kl', 'heavy_tail_decay_fit',
]
