"""Covariance bounds for conditionals of Sinkhorn plans and polynomial-decay bounds"""
import logging

import numpy as np
from scipy import optimize

logger = logging.getLogger(__name__)


def lighttail_cov_bound(H, h, L, R, C, delta, epsilon, alpha=None):
    """Bound on sup_y ‖Cov(∇₂c(X, y))‖ under π^{n,n}(· | y) when ρ has light tails

    ∇²U_ρ ≽ C|x|^δ outside B_R and ≽ −L inside, h ≼ ∇²c, ‖∇₁∇₂c‖ ∨ ‖∇₁²c‖ ≤ H. The bound holds
    for every α > 0; without `alpha` the choice α = ε + δ_H is used.
    """
    if H < h:
        raise ValueError("H must be at least h")
    if not (C > 0 and delta > 0 and epsilon > 0):
        raise ValueError("C, δ and ε must be positive")
    if L < 0 or R < 0:
        raise ValueError("L and R must be nonnegative")
    dh = H - h
    if alpha is None:
        spread = max(R ** 2, C ** (-2.0 / delta) * (1.0 + 2.0 * dh / epsilon) ** (2.0 / delta))
        return 2.0 * H ** 2 * (1.0 + (L + 2.0) ** 2 * spread)
    if not alpha > 0:
        raise ValueError("α must be positive")
    spread = max(R ** 2, ((alpha + dh) / (epsilon * C)) ** (2.0 / delta))
    return 2.0 * H ** 2 * (epsilon / alpha + (L * epsilon / alpha + (alpha + dh) / alpha) ** 2 * spread)


def lipschitz_cov_bound(H, C_rho, lip, epsilon):
    """2H²C_ρ(1 + 4C_ρ Lip²/ε²) for costs Lipschitz in x and ρ satisfying LSI(C_ρ)"""
    if not (C_rho > 0 and epsilon > 0):
        raise ValueError("C_rho and ε must be positive")
    return 2.0 * H ** 2 * C_rho * (1.0 + 4.0 * C_rho * lip ** 2 / epsilon ** 2)


def polynomial_bound(alpha_exp, C, a_start, k):
    """(k(α − 1)/C + a_start^{−(α−1)})^{−1/(α−1)}: decay of a sequence with aₙ₋₁ − aₙ ≥ aₙ₋₁^α / C"""
    if not alpha_exp > 1:
        raise ValueError("the exponent must exceed 1")
    if not (C > 0 and a_start > 0):
        raise ValueError("C and a_start must be positive")
    if k < 0:
        raise ValueError("k must be nonnegative")
    p = alpha_exp - 1.0
    return (k * p / C + a_start ** (-p)) ** (-1.0 / p)


def polynomial_rate_theorem(gamma, M, kl_start, k):
    """Bound on KL(π* | π^{n+1,n}) after k = n − N + 1 steps in a (Λ, ω)-semiconcave setting

    kl_start is KL(π* | π^{N,N−1}); the bound decays like k^{−γ/(1−γ)}.
    """
    if not 0 < gamma < 1:
        raise ValueError("γ must lie in (0, 1)")
    if not (M > 0 and kl_start > 0):
        raise ValueError("M and kl_start must be positive")
    if k < 0:
        raise ValueError("k must be nonnegative")
    ratio = (1.0 - gamma) / gamma
    return ((1.0 - gamma) * k / (gamma * M ** (1.0 / gamma)) + kl_start ** (-ratio)) ** (-1.0 / ratio)


def polynomial_constant(gamma, tau, lam, epsilon, kl_nu_wrong, kl_wrong_nu):
    """M = 2^{1−γ} max{KL(ν|ν^{N,N−1})^{1−γ}, (τΛ/2ε)(1 + KL(ν^{N,N−1}|ν)^{1−γ})}"""
    if not 0 < gamma < 1:
        raise ValueError("γ must lie in (0, 1)")
    q = 1.0 - gamma
    return 2.0 ** q * max(kl_nu_wrong ** q, tau * lam / (2.0 * epsilon) * (1.0 + kl_wrong_nu ** q))


def _broadcast(alpha_exp, C, a_start):
    alpha_exp, C, a_start = np.broadcast_arrays(np.asarray(alpha_exp, dtype=float), np.asarray(C, dtype=float),
                                                np.asarray(a_start, dtype=float))
    if np.any(alpha_exp <= 1) or np.any(C <= 0) or np.any(a_start < 0):
        raise ValueError("need α > 1, C > 0 and a_start ≥ 0")
    return alpha_exp, C, a_start


def recursion_previous(alpha_exp, C, a_start, steps):
    """aₙ = aₙ₋₁ − aₙ₋₁^α / C for n = 1, …, steps

    Parameters broadcast together, so several sequences run at once; the result has shape
    (steps + 1,) + broadcast shape. a_start ≤ C^{1/(α−1)} keeps the sequence nonnegative.
    """
    alpha_exp, C, a_start = _broadcast(alpha_exp, C, a_start)
    if np.any(a_start ** (alpha_exp - 1.0) > C):
        raise ValueError("a_start must not exceed C^(1/(α−1))")
    values = np.empty((steps + 1,) + a_start.shape)
    values[0] = a_start
    for n in range(1, steps + 1):
        prev = values[n - 1]
        values[n] = prev - prev ** alpha_exp / C
    return values


def recursion_as_stated(alpha_exp, C, a_start, steps):
    """aₙ solving aₙ + aₙ^α / C = aₙ₋₁ for n = 1, …, steps (broadcasting like recursion_previous)"""
    alpha_exp, C, a_start = _broadcast(alpha_exp, C, a_start)
    values = np.empty((steps + 1,) + a_start.shape)
    values[0] = a_start

    def excess(a, prev):
        return a + a ** alpha_exp / C - prev

    def slope(a, prev):
        return 1.0 + alpha_exp * a ** (alpha_exp - 1.0) / C

    for n in range(1, steps + 1):
        prev = values[n - 1]
        # convex and increasing on [0, prev]: Newton from prev approaches the root from the right
        try:
            root = optimize.newton(excess, prev, fprime=slope, args=(prev,), tol=1e-15, maxiter=100)
        except RuntimeError:
            logger.debug(f"Newton failed at step {n}; falling back to Brent's method")
            root = np.array([optimize.brentq(lambda a, p=p, al=al, c=c: a + a ** al / c - p, 0.0, p, xtol=1e-15)
                             if p > 0 else 0.0
                             for p, al, c in zip(prev.ravel(), alpha_exp.ravel(), C.ravel())]).reshape(prev.shape)
        values[n] = np.clip(root, 0.0, prev)
    return values
