"""Sinkhorn runs recorded against a reference plan"""
import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from transport.divergences import kl, kl_from_log
from transport.sinkhorn import (
    init_state, marginal_error, plan_log_weights, sinkhorn_step, solve_reference, wrong_marginals,
)
from utils.errors import RunMismatchError
from utils.io import write_csv

logger = logging.getLogger(__name__)

TRACE_COLUMNS = ("n", "kl_plan_nn", "kl_plan_n1n", "kl_rho_wrong", "kl_nu_wrong", "marginal_tv_error")
MONOTONICITY_TOL = 1e-9


@dataclass(frozen=True)
class TraceRow:
    n: int
    kl_plan_nn: float       # KL(π* | π^{n,n})
    kl_plan_n1n: float      # KL(π* | π^{n+1,n})
    kl_rho_wrong: float     # KL(ρ | ρ^{n,n})
    kl_nu_wrong: float      # KL(ν | ν^{n+1,n})
    marginal_tv_error: float

    def as_tuple(self):
        return (self.n, self.kl_plan_nn, self.kl_plan_n1n, self.kl_rho_wrong, self.kl_nu_wrong,
                self.marginal_tv_error)


@dataclass
class SinkhornTrace:
    epsilon: float
    reference: object
    rows: List[TraceRow] = field(default_factory=list)
    final_state: Optional[object] = None
    stopped_early: bool = False

    def __len__(self):
        return len(self.rows)

    def column(self, name):
        if name not in TRACE_COLUMNS:
            raise KeyError(f"unknown trace column: {name}")
        return np.array([getattr(row, name) for row in self.rows], dtype=float)

    def step_ratios(self):
        """KL(π* | π^{n+1,n+1}) / KL(π* | π^{n,n}) for consecutive rows with positive KL"""
        kl_nn = self.column("kl_plan_nn")
        ratios = []
        for n in range(len(kl_nn) - 1):
            if kl_nn[n] > 0:
                ratios.append((n, kl_nn[n + 1] / kl_nn[n]))
        return ratios

    def to_csv(self, path, stamp=True):
        return write_csv(path, TRACE_COLUMNS, [row.as_tuple() for row in self.rows], stamp=stamp)


def _check_reference(reference, rho, nu):
    if not (reference.rho.same_support(rho) and reference.nu.same_support(nu)):
        raise RunMismatchError("reference plan was solved on different marginals")
    if not reference.converged:
        logger.warning(f"Reference plan is not converged (TV {reference.residual:.2e}); "
                       f"KL values are relative to an approximate optimum")


def run_sinkhorn(rho, nu, cost, epsilon, iterations, reference=None, phi0=None, stop_kl=None,
                 observers=()):
    """Run `iterations` Sinkhorn steps and record one TraceRow per iteration n

    Args:
        reference: converged SinkhornState for the same problem; solved here when omitted
        stop_kl: stop once KL(π* | π^{n,n}) falls below this value
        observers: callables f(state_n, state_n_plus_1) invoked after every step
    """
    if iterations < 0:
        raise ValueError("iterations must be nonnegative")
    if reference is None:
        reference = solve_reference(rho, nu, cost, epsilon)
    _check_reference(reference, rho, nu)
    reference_log = plan_log_weights(reference, "nn")

    state = init_state(rho, nu, cost, epsilon, phi0=phi0, cost_matrix=reference.cost_matrix)
    trace = SinkhornTrace(float(epsilon), reference)

    for n in range(iterations):
        kl_nn = kl_from_log(reference_log, plan_log_weights(state, "nn"))
        if stop_kl is not None and kl_nn < stop_kl:
            trace.stopped_early = True
            break
        tv = marginal_error(state)
        next_state = sinkhorn_step(state)
        kl_n1n = kl_from_log(reference_log, plan_log_weights(next_state, "n_plus_1_n"))
        nu_wrong, rho_wrong = wrong_marginals(next_state)
        trace.rows.append(TraceRow(n, kl_nn, kl_n1n, kl(rho, rho_wrong), kl(nu, nu_wrong), tv))
        for observer in observers:
            observer(state, next_state)
        state = next_state
        logger.debug(f"ε={epsilon} n={n}: KL nn {kl_nn:.3e}, KL n1n {kl_n1n:.3e}, TV {tv:.3e}")

    trace.final_state = state
    logger.info(f"Sinkhorn trace ε={epsilon}: {len(trace)} iterations recorded")
    return trace


def monotonicity_violations(trace, tol=MONOTONICITY_TOL):
    """Links of KL(π*|π^{n+1,n+1}) ≤ KL(π*|π^{n+1,n}) ≤ KL(π*|π^{n,n}) broken by more than `tol`

    Returns a list of (n, link, excess) where link is "n1n<=nn" or "next_nn<=n1n".
    """
    violations = []
    rows = trace.rows
    for k, row in enumerate(rows):
        excess = row.kl_plan_n1n - row.kl_plan_nn
        if excess > tol:
            violations.append((row.n, "n1n<=nn", excess))
        if k + 1 < len(rows):
            excess = rows[k + 1].kl_plan_nn - row.kl_plan_n1n
            if excess > tol:
                violations.append((row.n, "next_nn<=n1n", excess))
    return violations
