"""Hessian bounds of Sinkhorn potentials for anisotropic quadratic costs

With ∇²U_ρ ≽ α, ∇²U_ν ≼ β and c(x, y) = ⟨x − y, Σ(x − y)⟩/2, the potentials satisfy
∇²φⁿ ≽ −Σ + AₙΣ and ∇²ψⁿ ≼ −Σ + BₙΣ where

    Bₙ   = Σ(AₙΣ + εα)⁻¹
    Aₙ₊₁ = Σ(BₙΣ + εβ)⁻¹

All iterates commute with Σ, so everything is computed eigenvalue by eigenvalue in the
shared eigenbasis of Σ and A₀.
"""
import logging
from dataclasses import dataclass
from typing import List

import numpy as np

from utils.errors import ShapeMismatchError
from utils.linalg import commutator_norm, from_eigen, shared_eigenbasis, symmetrize

logger = logging.getLogger(__name__)

COMMUTE_TOL = 1e-10


@dataclass
class MatrixPair:
    A: np.ndarray
    B: np.ndarray

    def commutator_gap(self, Sigma):
        """Largest of ‖AΣ − ΣA‖, ‖BΣ − ΣB‖"""
        return max(commutator_norm(self.A, Sigma), commutator_norm(self.B, Sigma))


def _sigma_spectrum(Sigma, *others, tol=COMMUTE_TOL):
    Sigma = symmetrize(Sigma)
    if Sigma.ndim != 2 or Sigma.shape[0] != Sigma.shape[1]:
        raise ShapeMismatchError("Σ must be a square matrix")
    for M in others:
        if np.shape(M) != Sigma.shape:
            raise ShapeMismatchError(f"expected a {Sigma.shape} matrix, got {np.shape(M)}")
        if commutator_norm(symmetrize(M), Sigma) > tol * max(1.0, np.linalg.norm(Sigma, 2)):
            raise ShapeMismatchError("A0 does not commute with Σ")
    Q, diagonals = shared_eigenbasis(Sigma, *others)
    if np.any(diagonals[0] <= 0):
        raise ValueError("Σ must be positive definite")
    return Q, diagonals


def _check_weights(alpha, beta, epsilon):
    if not (alpha > 0 and beta > 0):
        raise ValueError("α and β must be positive")
    if epsilon < 0:
        raise ValueError("ε must be nonnegative")


def gaussian_recursion(Sigma, alpha, beta, epsilon, A0, steps) -> List[MatrixPair]:
    """Pairs (Aₙ, Bₙ) for n = 0, …, steps

    ε = 0 reduces each half-step to an inversion and needs A₀ nonsingular.
    """
    _check_weights(alpha, beta, epsilon)
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    Q, (s, a) = _sigma_spectrum(Sigma, A0)
    if np.any(a < -COMMUTE_TOL):
        raise ValueError("A0 must be positive semidefinite")
    a = np.clip(a, 0.0, None)
    if epsilon == 0 and np.any(a == 0):
        raise ValueError("ε = 0 needs a nonsingular A0")

    pairs = []
    for _ in range(steps + 1):
        b = s / (a * s + epsilon * alpha)
        pairs.append(MatrixPair(from_eigen(Q, a), from_eigen(Q, b)))
        a = s / (b * s + epsilon * beta)
    logger.debug(f"Gaussian recursion ε={epsilon}, α={alpha}, β={beta}: {steps} steps")
    return pairs


def limit_eigenvalues(s, alpha, beta, epsilon):
    """Eigenvalues (a∞, b∞) for the Σ-eigenvalues s"""
    s = np.asarray(s, dtype=float)
    # −x + √(x² + r) written as r / (x + √(x² + r)) to avoid cancellation
    xa = epsilon * alpha / (2.0 * s)
    xb = epsilon * beta / (2.0 * s)
    a_inf = (alpha / beta) / (xa + np.sqrt(xa ** 2 + alpha / beta))
    b_inf = (beta / alpha) / (xb + np.sqrt(xb ** 2 + beta / alpha))
    return a_inf, b_inf


def gaussian_limits(Sigma, alpha, beta, epsilon):
    """(A∞, B∞) with A∞ = −(εα/2)Σ⁻¹ + ((ε²α²/4)Σ⁻² + α/β)^{1/2} and its β ↔ α counterpart"""
    _check_weights(alpha, beta, epsilon)
    Q, (s,) = _sigma_spectrum(Sigma)
    a_inf, b_inf = limit_eigenvalues(s, alpha, beta, epsilon)
    return MatrixPair(from_eigen(Q, a_inf), from_eigen(Q, b_inf))


def binfty_residual(Sigma, alpha, beta, epsilon, limits=None):
    """‖B∞ − [(B∞ + εβΣ⁻¹)⁻¹ + εαΣ⁻¹]⁻¹‖ (max over eigenvalues)"""
    Q, (s,) = _sigma_spectrum(Sigma)
    if limits is None:
        _, b = limit_eigenvalues(s, alpha, beta, epsilon)
    else:
        b = np.diag(Q.T @ limits.B @ Q)
    fixed = 1.0 / (1.0 / (b + epsilon * beta / s) + epsilon * alpha / s)
    return float(np.max(np.abs(b - fixed)))


def linear_rate(Sigma, alpha, beta, epsilon):
    """Asymptotic per-step factor max (a∞b∞)² by which ‖Aₙ − A∞‖ shrinks"""
    _check_weights(alpha, beta, epsilon)
    _, (s,) = _sigma_spectrum(Sigma)
    a_inf, b_inf = limit_eigenvalues(s, alpha, beta, epsilon)
    return float(np.max((a_inf * b_inf) ** 2))


def warm_start_lower_bound(Sigma, alpha, beta, epsilon):
    """−Σ − εα/2 + (ε²α²/4 + (α/β)Σ²)^{1/2}

    A first potential with ∇²φ⁰ above this bound keeps ∇²ψⁿ ≼ −Σ + B∞Σ for every n.
    """
    _check_weights(alpha, beta, epsilon)
    Q, (s,) = _sigma_spectrum(Sigma)
    half = 0.5 * epsilon * alpha
    return from_eigen(Q, -s - half + np.sqrt(half ** 2 + (alpha / beta) * s ** 2))


def eigen_traces(pairs, Sigma):
    """Eigenvalue sequences (aₙᵏ), (bₙᵏ) as arrays of shape (len(pairs), d) in Σ's eigenbasis"""
    Q, _ = _sigma_spectrum(Sigma)
    a = np.array([np.diag(Q.T @ p.A @ Q) for p in pairs])
    b = np.array([np.diag(Q.T @ p.B @ Q) for p in pairs])
    return a, b


def eventually_monotone(sequence, tol=1e-14):
    """True when the sequence is monotone from some index on (up to `tol`)"""
    diffs = np.diff(np.asarray(sequence, dtype=float))
    significant = diffs[np.abs(diffs) > tol]
    if significant.size == 0:
        return True
    signs = np.sign(significant)
    # at most one sign change, and the tail keeps the last sign
    return int(np.count_nonzero(signs[1:] != signs[:-1])) <= 1
