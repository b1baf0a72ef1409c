"""Central finite-difference stencils, flat and along sphere geodesics"""
import itertools

import numpy as np

GRADIENT_STEP = 1e-5
HESSIAN_STEP = 1e-3


def gradient(f, x, step=GRADIENT_STEP):
    """Central-difference gradient of a scalar function"""
    x = np.array(x, dtype=float)
    grad = np.zeros(len(x))
    for ii in range(len(x)):
        x[ii] += step
        f_hi = f(x)
        x[ii] -= 2.0 * step
        f_lo = f(x)
        x[ii] += step
        grad[ii] = (f_hi - f_lo) / (2.0 * step)
    return grad


def jacobian(g, x, step=GRADIENT_STEP):
    """Central-difference Jacobian of a vector function; row k is dg_k/dx"""
    x = np.array(x, dtype=float)
    columns = []
    for ii in range(len(x)):
        x[ii] += step
        g_hi = np.asarray(g(x), dtype=float)
        x[ii] -= 2.0 * step
        g_lo = np.asarray(g(x), dtype=float)
        x[ii] += step
        columns.append((g_hi - g_lo) / (2.0 * step))
    return np.stack(columns, axis=1)


def hessian(f, x, step=HESSIAN_STEP):
    """Central-difference Hessian of a scalar function

    Diagonal entries use the three-point second difference, off-diagonal entries the four-corner cross
    difference; both are exact on quadratics and carry O(step²) error otherwise. Round-off grows like
    machine-eps / step², so the step should stay above the fourth root of machine precision.
    """
    x = np.asarray(x, dtype=float)
    n = len(x)
    shifts = step * np.eye(n)
    centre = f(x)
    H = np.empty((n, n))
    for ii in range(n):
        e_i = shifts[ii]
        H[ii, ii] = (f(x + e_i) - 2.0 * centre + f(x - e_i)) / step ** 2
    for ii, jj in itertools.combinations(range(n), 2):
        e_i, e_j = shifts[ii], shifts[jj]
        corners = f(x + e_i + e_j) - f(x + e_i - e_j) - f(x - e_i + e_j) + f(x - e_i - e_j)
        H[ii, jj] = H[jj, ii] = corners / (4.0 * step ** 2)
    return H


def geodesic_derivative(f, y, v, exp_map, step):
    """d/dt f(exp_y(t v)) at t = 0"""
    return (f(exp_map(y, v, step)) - f(exp_map(y, v, -step))) / (2.0 * step)


def geodesic_second_derivative(f, y, v, exp_map, step):
    """d²/dt² f(exp_y(t v)) at t = 0"""
    return (f(exp_map(y, v, step)) - 2.0 * f(y) + f(exp_map(y, v, -step))) / step ** 2


def geodesic_gradient(f, y, basis, exp_map, step):
    """Riemannian gradient in ambient coordinates from directional derivatives along a tangent basis

    Args:
        basis: (d+1, d) matrix whose columns are an orthonormal basis of the tangent space at y
    """
    coords = np.array([geodesic_derivative(f, y, basis[:, k], exp_map, step)
                       for k in range(basis.shape[1])])
    return basis @ coords


def geodesic_hessian(f, y, basis, exp_map, step):
    """Riemannian Hessian in tangent-basis coordinates by polarization of second derivatives"""
    d = basis.shape[1]
    H = np.zeros((d, d))
    for k in range(d):
        H[k, k] = geodesic_second_derivative(f, y, basis[:, k], exp_map, step)
    for k, l in itertools.combinations(range(d), 2):
        u = (basis[:, k] + basis[:, l]) / np.sqrt(2.0)
        H[k, l] = geodesic_second_derivative(f, y, u, exp_map, step) - 0.5 * (H[k, k] + H[l, l])
        H[l, k] = H[k, l]
    return H


def geodesic_hessian_from_gradient(grad, y, basis, exp_map, transport, step):
    """Riemannian Hessian in tangent-basis coordinates from central differences of an analytical gradient

    The gradients at exp_y(±h e_k) are read against the basis transported along the same geodesic.
    `transport(base, tangent, w, t)` moves w along t ↦ exp_base(t · tangent).
    """
    d = basis.shape[1]
    H = np.zeros((d, d))
    for k in range(d):
        u = basis[:, k]
        plus = np.array([transport(y, u, basis[:, j], step) for j in range(d)])
        minus = np.array([transport(y, u, basis[:, j], -step) for j in range(d)])
        H[:, k] = (plus @ grad(exp_map(y, u, step)) - minus @ grad(exp_map(y, u, -step))) / (2.0 * step)
    return 0.5 * (H + H.T)
