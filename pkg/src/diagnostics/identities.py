"""Exact identities along Sinkhorn's algorithm, checked on consecutive states"""
import logging

import numpy as np

from transport.divergences import kl, kl_from_log
from transport.plans import DiscretePlan
from transport.sinkhorn import init_state, plan, plan_log_weights, sinkhorn_step, wrong_marginals
from utils.errors import RunMismatchError

logger = logging.getLogger(__name__)


def _reference_log(reference):
    if isinstance(reference, DiscretePlan):
        return reference.log_weights
    return plan_log_weights(reference, "nn")


def _check_consecutive(state_prev, state_next):
    if state_prev.run_id != state_next.run_id or state_next.iteration != state_prev.iteration + 1:
        raise RunMismatchError("states are not consecutive iterations of the same run")
    if not state_prev.has_previous:
        raise RunMismatchError("the earlier state must have completed at least one step")


def entropy_difference_identity(state_prev, state_next, reference):
    """(lhs, rhs) of KL(π*|π^{n+1,n}) − KL(π*|π^{n,n−1}) = −(KL(ρ|ρ^{n,n}) + KL(ν|ν^{n,n−1}))

    `state_prev` is at iteration n and `state_next` at n + 1; `reference` is the converged
    state (or its plan) giving π*.
    """
    _check_consecutive(state_prev, state_next)
    ref = _reference_log(reference)
    lhs = (kl_from_log(ref, plan_log_weights(state_next, "n_plus_1_n"))
           - kl_from_log(ref, plan_log_weights(state_prev, "n_plus_1_n")))
    _, rho_nn = wrong_marginals(state_next)
    nu_prev, _ = wrong_marginals(state_prev)
    rhs = -(kl(state_next.rho, rho_nn) + kl(state_prev.nu, nu_prev))
    return lhs, rhs


def wrong_marginal_crosscheck(state):
    """Largest TV gap between the wrong marginals and the literal marginals of the plans"""
    nu_wrong, rho_wrong = wrong_marginals(state)
    nu_literal = plan(state, "n_plus_1_n").col_marginal()
    rho_literal = plan(state, "prev_nn").row_marginal()
    return max(nu_wrong.total_variation(nu_literal), rho_wrong.total_variation(rho_literal))


def enforced_marginal_errors(state):
    """TV errors of the constraints enforced by the last two half-steps: (π^{n,n} vs ν, π^{n,n−1} vs ρ)"""
    col_error = plan(state, "nn").col_tv_error()
    row_error = plan(state, "n_plus_1_n").row_tv_error() if state.has_previous else 0.0
    return col_error, row_error


class IdentityRecorder:
    """Sinkhorn observer recording identity discrepancies at every step"""

    def __init__(self, reference):
        self.reference = reference
        self.identity_gaps = []
        self.crosscheck_gaps = []
        self.marginal_gaps = []

    def __call__(self, state_prev, state_next):
        if state_prev.has_previous:
            lhs, rhs = entropy_difference_identity(state_prev, state_next, self.reference)
            self.identity_gaps.append((state_prev.iteration, abs(lhs - rhs)))
        self.crosscheck_gaps.append((state_next.iteration, wrong_marginal_crosscheck(state_next)))
        self.marginal_gaps.append((state_next.iteration, max(enforced_marginal_errors(state_next))))

    @staticmethod
    def _worst(pairs):
        return max((gap for _, gap in pairs), default=0.0)

    @property
    def worst_identity_gap(self):
        return self._worst(self.identity_gaps)

    @property
    def worst_crosscheck_gap(self):
        return self._worst(self.crosscheck_gaps)

    @property
    def worst_marginal_gap(self):
        return self._worst(self.marginal_gaps)

    def summary(self):
        return {
            "identity": self.worst_identity_gap,
            "crosscheck": self.worst_crosscheck_gap,
            "marginal": self.worst_marginal_gap,
            "steps": len(self.marginal_gaps),
        }


def gauge_invariance_gap(rho, nu, cost, epsilon, shift, iterations=5):
    """Largest entrywise gap between the plans of runs started from φ⁰ = 0 and φ⁰ ≡ shift"""
    a = init_state(rho, nu, cost, epsilon)
    b = init_state(rho, nu, cost, epsilon, phi0=np.full(len(rho), float(shift)), cost_matrix=a.cost_matrix)
    worst = 0.0
    for _ in range(iterations):
        a, b = sinkhorn_step(a), sinkhorn_step(b)
        for kind in ("nn", "n_plus_1_n"):
            worst = max(worst, float(np.max(np.abs(np.exp(plan_log_weights(a, kind))
                                                   - np.exp(plan_log_weights(b, kind))))))
    return worst
