"""Entropic and exact optimal transport on discrete measures"""
from .plans import DiscretePlan
from .divergences import kl, kl_from_log
from .sinkhorn import (
    SinkhornState, init_state, softmin_over_nu, softmin_over_rho, sinkhorn_step, plan,
    wrong_marginals, marginal_error, solve_reference,
)
from .trace import SinkhornTrace, run_sinkhorn, monotonicity_violations
from .exact_ot import TransportPlanExact, exact_transport, monotone_coupling_1d, w2_squared, w_omega
from .inequalities import TIProbeReport, ti_probe

__all__ = [
    'DiscretePlan', 'kl', 'kl_from_log', 'SinkhornState', 'init_state', 'softmin_over_nu',
    'softmin_over_rho', 'sinkhorn_step', 'plan', 'wrong_marginals', 'marginal_error',
    'solve_reference', 'SinkhornTrace', 'run_sinkhorn', 'monotonicity_violations',
    'TransportPlanExact', 'exact_transport', 'monotone_coupling_1d', 'w2_squared', 'w_omega',
    'TIProbeReport', 'ti_probe',
]
