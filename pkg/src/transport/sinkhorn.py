"""Log-domain Sinkhorn iteration on discrete marginals

Plans are written exp(−(c + φ ⊕ ψ)/ε) against ρ ⊗ ν. One step maps (φⁿ, ψⁿ) to

    φⁿ⁺¹ = −Ψ(ψⁿ),    ψⁿ⁺¹ = −Φ(φⁿ⁺¹),

where Ψ and Φ are the ε-softmin operators over ν and ρ. After the ψ half-step the plan
π^{n,n} has second marginal ν; after the φ half-step π^{n+1,n} has first marginal ρ.
The gauge Σᵢ ρᵢ φᵢ = 0 is re-imposed after every φ half-step, the constant moving into the
ψ that the new φ is paired with, so every stored pair describes the same plans as the raw
iteration.
"""
import dataclasses
import itertools
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import logsumexp

from measures.discrete_measure import DiscreteMeasure
from transport.plans import DiscretePlan

logger = logging.getLogger(__name__)

REFERENCE_TOL = 1e-13
REFERENCE_MAX_ITER = 100000
PLAN_KINDS = ("nn", "n_plus_1_n", "prev_nn")

_run_ids = itertools.count(1)


@dataclass(frozen=True, eq=False)
class SinkhornState:
    """Immutable snapshot of one Sinkhorn run after `iteration` full steps

    `half_psi` and `prev_phi` hold ψ^{n−1} and φ^{n−1} expressed in the gauge of φⁿ,
    so (phi, half_psi) is π^{n,n−1} and (prev_phi, half_psi) is π^{n−1,n−1}.
    """

    epsilon: float
    rho: DiscreteMeasure
    nu: DiscreteMeasure
    cost: object
    cost_matrix: np.ndarray
    phi: np.ndarray
    psi: np.ndarray
    iteration: int = 0
    half_psi: Optional[np.ndarray] = None
    prev_phi: Optional[np.ndarray] = None
    converged: bool = False
    residual: float = np.nan
    run_id: int = 0
    gauge: str = "rho-mean-zero"

    @property
    def has_previous(self):
        return self.half_psi is not None


def _softmin_nu(C, log_nu, psi, epsilon):
    return -epsilon * logsumexp(log_nu[None, :] - (C + psi[None, :]) / epsilon, axis=1)


def _softmin_rho(C, log_rho, phi, epsilon):
    return -epsilon * logsumexp(log_rho[:, None] - (C + phi[:, None]) / epsilon, axis=0)


def cost_matrix_for(rho, nu, cost):
    cost.check_geometry(rho.geometry)
    cost.check_geometry(nu.geometry)
    C = np.asarray(cost.matrix(rho.points, nu.points), dtype=float)
    if not np.all(np.isfinite(C)):
        raise ValueError("cost matrix has non-finite entries")
    C.setflags(write=False)
    return C


def init_state(rho, nu, cost, epsilon, phi0=None, cost_matrix=None):
    """Iteration-0 state: gauged φ⁰ (default 0) and ψ⁰ = −Φ(φ⁰)"""
    if not epsilon > 0:
        raise ValueError("ε must be positive")
    C = cost_matrix_for(rho, nu, cost) if cost_matrix is None else cost_matrix
    phi = np.zeros(len(rho)) if phi0 is None else np.array(phi0, dtype=float)
    if phi.shape != (len(rho),):
        raise ValueError("φ⁰ must have one value per ρ atom")
    phi = phi - rho.weights @ phi
    psi = -_softmin_rho(C, rho.log_weights, phi, epsilon)
    return SinkhornState(float(epsilon), rho, nu, cost, C, phi, psi, run_id=next(_run_ids))


def softmin_over_nu(state, query_points=None, psi=None):
    """Ψ(ψ) at the ρ atoms, or at `query_points` when given"""
    psi = state.psi if psi is None else np.asarray(psi, dtype=float)
    if query_points is None:
        C = state.cost_matrix
    else:
        C = state.cost.matrix(np.atleast_2d(query_points), state.nu.points)
    return _softmin_nu(C, state.nu.log_weights, psi, state.epsilon)


def softmin_over_rho(state, query_points=None, phi=None):
    """Φ(φ) at the ν atoms, or at `query_points` when given"""
    phi = state.phi if phi is None else np.asarray(phi, dtype=float)
    if query_points is None:
        C = state.cost_matrix
    else:
        C = state.cost.matrix(state.rho.points, np.atleast_2d(query_points))
    return _softmin_rho(C, state.rho.log_weights, phi, state.epsilon)


def sinkhorn_step(state):
    """One full iteration: φ half-step, gauge, ψ half-step"""
    phi_raw = -_softmin_nu(state.cost_matrix, state.nu.log_weights, state.psi, state.epsilon)
    shift = float(state.rho.weights @ phi_raw)
    phi = phi_raw - shift
    psi = -_softmin_rho(state.cost_matrix, state.rho.log_weights, phi, state.epsilon)
    return dataclasses.replace(
        state,
        phi=phi,
        psi=psi,
        iteration=state.iteration + 1,
        half_psi=state.psi + shift,
        prev_phi=state.phi - shift,
        converged=False,
        residual=np.nan,
    )


def _pair(state, kind):
    if kind == "nn":
        return state.phi, state.psi
    if kind not in PLAN_KINDS:
        raise ValueError(f"unknown plan kind: {kind}")
    if not state.has_previous:
        raise ValueError(f"plan {kind} needs a state with at least one completed step")
    if kind == "n_plus_1_n":
        return state.phi, state.half_psi
    return state.prev_phi, state.half_psi


def plan_log_weights(state, kind="nn"):
    phi, psi = _pair(state, kind)
    return (state.rho.log_weights[:, None] + state.nu.log_weights[None, :]
            - (state.cost_matrix + phi[:, None] + psi[None, :]) / state.epsilon)


def plan(state, kind="nn"):
    """Sinkhorn plan π^{n,n} ("nn"), π^{n,n−1} ("n_plus_1_n") or π^{n−1,n−1} ("prev_nn")"""
    return DiscretePlan(plan_log_weights(state, kind), state.rho, state.nu)


def wrong_marginals(state):
    """(ν^{n,n−1}, ρ^{n−1,n−1}) from the potential differences of the last step"""
    if not state.has_previous:
        raise ValueError("wrong marginals need a state with at least one completed step")
    eps = state.epsilon
    nu_wrong = DiscreteMeasure.from_log_weights(
        state.nu.points, state.nu.log_weights - (state.half_psi - state.psi) / eps,
        state.nu.geometry, drop_zero=False)
    rho_wrong = DiscreteMeasure.from_log_weights(
        state.rho.points, state.rho.log_weights - (state.prev_phi - state.phi) / eps,
        state.rho.geometry, drop_zero=False)
    return nu_wrong, rho_wrong


def marginal_error(state):
    """TV distance between the free (first) marginal of π^{n,n} and ρ"""
    return plan(state, "nn").row_tv_error()


def solve_reference(rho, nu, cost, epsilon, tol=REFERENCE_TOL, max_iter=REFERENCE_MAX_ITER, phi0=None,
                    cost_matrix=None):
    """Iterate until the free marginal is within `tol` in TV; non-convergence is flagged"""
    if not tol > 0:
        raise ValueError("tol must be positive")
    state = init_state(rho, nu, cost, epsilon, phi0=phi0, cost_matrix=cost_matrix)
    error = np.inf
    for _ in range(max_iter):
        state = sinkhorn_step(state)
        error = marginal_error(state)
        if state.iteration % 1000 == 0:
            logger.debug(f"reference solve ε={epsilon}: iteration {state.iteration}, TV error {error:.3e}")
        if error <= tol:
            logger.info(f"Reference plan converged in {state.iteration} iterations (ε={epsilon}, TV {error:.2e})")
            return dataclasses.replace(state, converged=True, residual=error)
    logger.warning(f"Reference solve did not reach TV {tol:.1e} in {max_iter} iterations (ε={epsilon}, "
                   f"TV {error:.2e})")
    return dataclasses.replace(state, converged=False, residual=error)
