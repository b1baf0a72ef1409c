"""Convexity profiles and the weak log-concavity defect"""
import numpy as np

DEFAULT_PROFILE_BOX = 3.0


def convexity_profile(model, radii, sample_count=2000, rng_seed=0, box=None):
    """Sampled convexity profile κ̂_U(r)

    For each radius, antipodal pairs x = c − r u/2, x̂ = c + r u/2 are drawn around uniform
    centers c in `box` with uniform unit directions u; the minimum of
    ⟨∇U(x̂) − ∇U(x), x̂ − x⟩ / r² over the pairs is returned. Sampling can only
    overestimate the infimum.
    """
    radii = list(radii)
    if not radii:
        return []
    if any(r <= 0 for r in radii):
        raise ValueError("radii must be positive")
    dim = model.params.get("dim", 1)
    if box is None:
        box = [(-DEFAULT_PROFILE_BOX, DEFAULT_PROFILE_BOX)] * dim
    box = np.asarray(box, dtype=float)

    rng = np.random.default_rng(rng_seed)
    profile = []
    for r in radii:
        centers = rng.uniform(box[:, 0], box[:, 1], size=(sample_count, dim))
        directions = rng.standard_normal((sample_count, dim))
        directions /= np.linalg.norm(directions, axis=1, keepdims=True)
        x = centers - 0.5 * r * directions
        x_hat = centers + 0.5 * r * directions
        quotient = np.sum((model.gradient(x_hat) - model.gradient(x)) * (x_hat - x), axis=1) / r ** 2
        profile.append((float(r), float(np.min(quotient))))
    return profile


def f_weak(r, L):
    """2√L·tanh(√L·r/2)"""
    if L < 0:
        raise ValueError("L must be nonnegative")
    root = np.sqrt(L)
    return 2.0 * root * np.tanh(0.5 * root * np.asarray(r, dtype=float))


def weak_concavity_check(model, alpha, L, radii, sample_count=2000, rng_seed=0, box=None):
    """Worst sampled margin κ̂_U(r) − (α − f_L(r)/r); negative values falsify (α, L)-weak log-concavity"""
    profile = convexity_profile(model, radii, sample_count, rng_seed, box)
    margins = [kappa - (alpha - float(f_weak(r, L)) / r) for r, kappa in profile]
    return min(margins) if margins else 0.0
