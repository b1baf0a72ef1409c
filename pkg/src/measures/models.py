"""Log-density models U with ρ(dx) ∝ exp(−U(x)) dx

Potentials, gradients and Hessians are vectorized over leading axes: they accept a point
of shape (d,) or a batch of shape (n, d).
"""
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from utils.errors import ConfigError

TAGS = ("strongly-log-concave", "weakly-log-concave", "light-tails", "custom")


@dataclass(frozen=True)
class LogDensityModel:
    potential: Callable
    gradient: Callable
    hessian: Optional[Callable] = None
    tag: str = "custom"
    params: dict = field(default_factory=dict)
    name: str = "custom"

    def __post_init__(self):
        if self.tag not in TAGS:
            raise ValueError(f"unknown model tag: {self.tag}")
        p = self.params
        if self.tag == "strongly-log-concave" and not p.get("alpha", 0) > 0:
            raise ValueError("strongly-log-concave models need α > 0")
        if self.tag == "weakly-log-concave":
            if not p.get("alpha", 0) > 0 or p.get("L", -1) < 0:
                raise ValueError("weakly-log-concave models need α > 0 and L ≥ 0")
        if self.tag == "light-tails":
            if not (p.get("C", 0) > 0 and p.get("delta", 0) > 0):
                raise ValueError("light-tails models need C, δ > 0")
            if p.get("R", 0) < 0 or p.get("L", 0) < 0:
                raise ValueError("light-tails models need R, L ≥ 0")


def _norm2(x):
    x = np.asarray(x, dtype=float)
    return np.sum(x * x, axis=-1)


def gaussian_model(alpha=1.0, dim=1, center=None):
    """U(x) = α|x − m|²/2, α-log-concave"""
    m = np.zeros(dim) if center is None else np.asarray(center, dtype=float)

    def potential(x):
        return 0.5 * alpha * _norm2(np.asarray(x, dtype=float) - m)

    def gradient(x):
        return alpha * (np.asarray(x, dtype=float) - m)

    def hessian(x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(alpha * np.eye(dim), x.shape[:-1] + (dim, dim)).copy()

    return LogDensityModel(potential, gradient, hessian, "strongly-log-concave",
                           {"alpha": float(alpha), "dim": dim}, name="gaussian")


def uniform_model(dim=1):
    def potential(x):
        return np.zeros(np.shape(x)[:-1])

    def gradient(x):
        return np.zeros(np.shape(x))

    return LogDensityModel(potential, gradient, None, "custom", {"dim": dim}, name="uniform")


def weakly_log_concave_model(potential, gradient, alpha, L, hessian=None):
    return LogDensityModel(potential, gradient, hessian, "weakly-log-concave",
                           {"alpha": float(alpha), "L": float(L)}, name="weakly-log-concave")


def double_well_model(depth=1.0, dim=1):
    """U(x) = |x|⁴ − depth·|x|², convex outside a ball only"""

    def potential(x):
        r2 = _norm2(x)
        return r2 * r2 - depth * r2

    def gradient(x):
        x = np.asarray(x, dtype=float)
        return (4.0 * _norm2(x) - 2.0 * depth)[..., None] * x

    def hessian(x):
        x = np.asarray(x, dtype=float)
        eye = np.eye(x.shape[-1])
        return ((4.0 * _norm2(x) - 2.0 * depth)[..., None, None] * eye
                + 8.0 * x[..., :, None] * x[..., None, :])

    return LogDensityModel(potential, gradient, hessian, "custom", {"depth": float(depth), "dim": dim},
                           name="double-well")


def light_tail_model(C=1.0, delta=1.0, dim=1):
    """U(x) = C(1 + |x|²)^{1+δ/2}/(2+δ), so that ∇²U ≽ C|x|^δ everywhere (R = L = 0)"""
    s = 1.0 + 0.5 * delta

    def potential(x):
        return C * (1.0 + _norm2(x)) ** s / (2.0 * s)

    def gradient(x):
        x = np.asarray(x, dtype=float)
        return (C * (1.0 + _norm2(x)) ** (s - 1.0))[..., None] * x

    def hessian(x):
        x = np.asarray(x, dtype=float)
        base = 1.0 + _norm2(x)
        eye = np.eye(x.shape[-1])
        return ((C * base ** (s - 1.0))[..., None, None] * eye
                + (2.0 * C * (s - 1.0) * base ** (s - 2.0))[..., None, None] * x[..., :, None] * x[..., None, :])

    return LogDensityModel(potential, gradient, hessian, "light-tails",
                           {"C": float(C), "delta": float(delta), "R": 0.0, "L": 0.0, "dim": dim},
                           name="light-tail")


def heavy_rho_model(power=3.0, quadratic=0.1, dim=1):
    """U(x) = |x|^q + δ|x|², the fast-decaying marginal of the heavy-tail setting"""

    def potential(x):
        r2 = _norm2(x)
        return r2 ** (0.5 * power) + quadratic * r2

    def gradient(x):
        x = np.asarray(x, dtype=float)
        r2 = _norm2(x)
        return (power * r2 ** (0.5 * power - 1.0) + 2.0 * quadratic)[..., None] * x

    return LogDensityModel(potential, gradient, None, "custom",
                           {"power": float(power), "quadratic": float(quadratic), "dim": dim}, name="heavy-rho")


def heavy_nu_model(power=1.5, dim=1):
    """U(y) = min(|y|², Σ|yᵢ|^p), Gaussian core with stretched-exponential tails"""

    def potential(y):
        y = np.asarray(y, dtype=float)
        return np.minimum(_norm2(y), np.sum(np.abs(y) ** power, axis=-1))

    def gradient(y):
        y = np.asarray(y, dtype=float)
        quad = _norm2(y) <= np.sum(np.abs(y) ** power, axis=-1)
        tail = power * np.sign(y) * np.abs(y) ** (power - 1.0)
        return np.where(quad[..., None], 2.0 * y, tail)

    return LogDensityModel(potential, gradient, None, "custom", {"power": float(power), "dim": dim},
                           name="heavy-nu")


def ti_constant(model):
    """Talagrand constant τ = 1/α for α-log-concave models"""
    if model.tag != "strongly-log-concave":
        raise ValueError("no closed-form TI constant; use ti_probe")
    return 1.0 / model.params["alpha"]


MODEL_BUILDERS = {
    "gaussian": lambda spec, dim: gaussian_model(spec.get("alpha", 1.0), dim, spec.get("center")),
    "uniform": lambda spec, dim: uniform_model(dim),
    "double-well": lambda spec, dim: double_well_model(spec.get("depth", 1.0), dim),
    "light-tail": lambda spec, dim: light_tail_model(spec.get("C", 1.0), spec.get("delta", 1.0), dim),
    "heavy-rho": lambda spec, dim: heavy_rho_model(spec.get("power", 3.0), spec.get("quadratic", 0.1), dim),
    "heavy-nu": lambda spec, dim: heavy_nu_model(spec.get("power", 1.5), dim),
}


def model_from_config(spec, dim):
    kind = spec.get("type")
    if kind not in MODEL_BUILDERS:
        raise ConfigError(f"unknown model type: {kind!r} (expected one of {', '.join(MODEL_BUILDERS)})")
    try:
        return MODEL_BUILDERS[kind](spec, dim)
    except ValueError as e:
        raise ConfigError(f"model {kind}: {e}")
