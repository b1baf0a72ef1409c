"""Small linear-algebra helpers: commuting eigenbases, spectral functions, tangent bases"""
import numpy as np
from scipy import linalg

from utils.errors import ShapeMismatchError

# generic weight for the combination Σ + t·A whose eigenvectors diagonalize both
_MIX_WEIGHT = 0.6180339887498949


def symmetrize(M):
    M = np.asarray(M, dtype=float)
    return 0.5 * (M + M.T)


def commutator_norm(A, B):
    """Spectral norm of AB − BA"""
    return np.linalg.norm(A @ B - B @ A, 2)


def shared_eigenbasis(S, *others, tol=1e-9):
    """Orthonormal Q diagonalizing S and every matrix in `others` simultaneously

    The matrices must be symmetric and commute with S. Returns (Q, diagonals) where
    diagonals[k] holds the eigenvalues of the k-th input (S first) in Q's column order.
    """
    S = symmetrize(S)
    mats = [S] + [symmetrize(M) for M in others]
    scale = max(1.0, max(np.linalg.norm(M, 2) for M in mats))

    combo = S.copy()
    for k, M in enumerate(mats[1:], start=1):
        combo = combo + (_MIX_WEIGHT ** k) * M
    _, Q = linalg.eigh(combo)

    diagonals = []
    for M in mats:
        D = Q.T @ M @ Q
        off = D - np.diag(np.diag(D))
        if np.max(np.abs(off), initial=0.0) > tol * scale:
            raise ShapeMismatchError("matrices do not share an eigenbasis")
        diagonals.append(np.diag(D).copy())
    return Q, diagonals


def from_eigen(Q, values):
    """Q diag(values) Qᵀ"""
    return (Q * values) @ Q.T


def tangent_basis(y):
    """Orthonormal basis (columns) of the tangent space {v : ⟨v, y⟩ = 0} at a unit vector y"""
    y = np.asarray(y, dtype=float)
    # last n-1 left singular vectors of y span its orthogonal complement
    U, _, _ = np.linalg.svd(y.reshape(-1, 1), full_matrices=True)
    return U[:, 1:]
