"""Conditionals π(dx | y) of Sinkhorn plans and the derivative identities of ψⁿ

ψⁿ is extended off the ν-support by ψⁿ = −Φ(φⁿ), evaluated at arbitrary query points.
Its derivatives are then conditional moments of the cost derivatives:

    ∇ψⁿ(y)  = −E[∇₂c(X, y)]
    ∇²ψⁿ(y) = −E[∇₂²c(X, y)] + Cov(∇₂c(X, y)) / ε

with X distributed as the conditional at y.
"""
import numpy as np

from measures.discrete_measure import DiscreteMeasure
from transport.sinkhorn import softmin_over_rho
from utils import finite_diff
from utils.errors import ProbeError
from utils.linalg import symmetrize


def _conditional_log_weights(state, cost_column, phi=None):
    phi = state.phi if phi is None else phi
    return state.rho.log_weights - (cost_column + phi) / state.epsilon


def conditional_given_y(state, y_index):
    """π^{n,n}(dx | y_j) on the ρ-support; ψ(y_j) cancels in the normalization"""
    if not 0 <= y_index < len(state.nu):
        raise IndexError(f"y index {y_index} out of range")
    log_w = _conditional_log_weights(state, state.cost_matrix[:, y_index])
    return DiscreteMeasure.from_log_weights(state.rho.points, log_w, state.rho.geometry, drop_zero=False)


def conditional_at_point(state, y, phi=None):
    """Conditional at an arbitrary point y through the everywhere-extension of the plan density"""
    y = np.asarray(y, dtype=float)
    column = state.cost.matrix(state.rho.points, y[None, :])[:, 0]
    log_w = _conditional_log_weights(state, column, phi)
    return DiscreteMeasure.from_log_weights(state.rho.points, log_w, state.rho.geometry, drop_zero=False)


def weighted_mean_cov(weights, values):
    """Two-pass weighted mean and covariance of the rows of `values`"""
    weights = np.asarray(weights, dtype=float)
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    weights = weights / weights.sum()
    mean = weights @ values
    centered = values - mean
    cov = (centered * weights[:, None]).T @ centered
    return mean, symmetrize(cov)


def conditional_mean_cov(state, y, grad_map=None):
    """Mean and covariance of grad_map(X, y) under π(dx | y); defaults to ∇₂c"""
    y = np.asarray(y, dtype=float)
    conditional = conditional_at_point(state, y)
    grad_map = state.cost.grad2_many if grad_map is None else grad_map
    return weighted_mean_cov(conditional.weights, grad_map(state.rho.points, y))


def extended_psi(state, points, phi=None):
    """ψ = −Φ(φ) at arbitrary points (rows of `points`)"""
    return -softmin_over_rho(state, np.atleast_2d(points), phi=phi)


def psi_gradient(state, y):
    """∇ψⁿ(y) from the conditional-mean identity"""
    mean, _ = conditional_mean_cov(state, y)
    return -mean


def psi_hessian(state, y):
    """∇²ψⁿ(y) from the conditional-covariance identity (ambient coordinates on the sphere)"""
    y = np.asarray(y, dtype=float)
    conditional = conditional_at_point(state, y)
    X = state.rho.points
    w = conditional.weights
    _, cov = weighted_mean_cov(w, state.cost.grad2_many(X, y))
    expected_hess = np.einsum("i,ijk->jk", w, state.cost.hess2_many(X, y))
    return symmetrize(-expected_hess + cov / state.epsilon)


def _psi_function(state):
    return lambda z: float(extended_psi(state, z)[0])


def _check_stencil(y, step, box):
    if box is None:
        return
    box = np.asarray(box, dtype=float)
    reach = 2.0 * step
    if np.any(y - reach < box[:, 0]) or np.any(y + reach > box[:, 1]):
        raise ProbeError("query point too close to the box boundary for the stencil")


def gradient_identity_residual(state, y, fd_step=finite_diff.GRADIENT_STEP, box=None):
    """|FD gradient of the extended ψⁿ − (−E[∇₂c])| at y"""
    y = np.asarray(y, dtype=float)
    geometry = state.nu.geometry
    f = _psi_function(state)
    if geometry.is_sphere:
        fd = finite_diff.geodesic_gradient(f, y, geometry.tangent_basis(y), geometry.exp_map, fd_step)
    else:
        _check_stencil(y, fd_step, box)
        fd = finite_diff.gradient(f, y, fd_step)
    return float(np.linalg.norm(fd - psi_gradient(state, y)))


def hessian_identity_residual(state, y, fd_step=finite_diff.HESSIAN_STEP, box=None):
    """FD Hessian of the extended ψⁿ minus −E[∇₂²c] + Cov(∇₂c)/ε at y

    On the sphere both sides are expressed in an orthonormal tangent basis at y.
    Raises ProbeError when the stencil leaves `box`.
    """
    y = np.asarray(y, dtype=float)
    geometry = state.nu.geometry
    f = _psi_function(state)
    formula = psi_hessian(state, y)
    if geometry.is_sphere:
        basis = geometry.tangent_basis(y)
        fd = finite_diff.geodesic_hessian(f, y, basis, geometry.exp_map, fd_step)
        return fd - basis.T @ formula @ basis
    _check_stencil(y, fd_step, box)
    return finite_diff.hessian(f, y, fd_step) - formula
