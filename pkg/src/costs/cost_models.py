"""Cost families with evaluation and derivative oracles

Every family implements batched kernels (`matrix`, `grad2_many`, `hess2_many`) used by the
Sinkhorn and diagnostics code; the pointwise oracles delegate to them. Sphere families
return gradients and Hessians as ambient (d+1)-vectors and (d+1)×(d+1) matrices acting on
the tangent space at the differentiated point, with the normal direction projected out.
"""
import logging

import numpy as np

from costs.geometry import UNIT_TOL, clamp_inner
from utils.errors import ConfigError, CostDomainError, GeometryMismatchError

logger = logging.getLogger(__name__)


class CostModel:
    """Base class for all cost families"""

    family = "CostModel"
    geometry_kind = "euclidean"
    smooth = True

    def __init__(self, dim=None):
        self.dim = dim

    def __repr__(self):
        return f"{self.family}({self.describe()})"

    def describe(self):
        return ""

    # -- geometry checks -------------------------------------------------

    def check_geometry(self, geometry):
        """Reject measures living on a different geometry than the cost"""
        if geometry.kind != self.geometry_kind:
            raise GeometryMismatchError(f"{self.family} needs {self.geometry_kind} points, got {geometry}")
        if self.dim is not None and geometry.ambient_dim != self.dim:
            raise GeometryMismatchError(f"{self.family} is {self.dim}-dimensional, got {geometry}")

    def _check_pair(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if x.shape != y.shape or x.ndim != 1:
            raise GeometryMismatchError("cost arguments must be points of the same dimension")
        if self.dim is not None and x.shape[0] != self.dim:
            raise GeometryMismatchError(f"{self.family} is {self.dim}-dimensional, got {x.shape[0]}")
        if self.geometry_kind == "sphere":
            if abs(np.linalg.norm(x) - 1.0) > UNIT_TOL or abs(np.linalg.norm(y) - 1.0) > UNIT_TOL:
                raise GeometryMismatchError(f"{self.family} requires unit vectors")
        return x, y

    # -- batched kernels (overridden) ------------------------------------

    def matrix(self, X, Y):
        raise NotImplementedError

    def grad2_many(self, X, y):
        raise NotImplementedError

    def hess2_many(self, X, y):
        raise NotImplementedError

    def crosshess(self, x, y):
        raise NotImplementedError

    def hessian_bounds(self):
        """(h, H) with h ≼ ∇²c ≼ H when the family has known bounds, else None"""
        return None

    # -- pointwise oracles -----------------------------------------------

    def eval(self, x, y):
        x, y = self._check_pair(x, y)
        return float(self.matrix(x[None, :], y[None, :])[0, 0])

    def grad2(self, x, y):
        x, y = self._check_pair(x, y)
        return self.grad2_many(x[None, :], y)[0]

    def hess2(self, x, y):
        x, y = self._check_pair(x, y)
        return self.hess2_many(x[None, :], y)[0]

    # all families are symmetric, c(x, y) = c(y, x)
    def grad1(self, x, y):
        return self.grad2(y, x)

    def hess1(self, x, y):
        return self.hess2(y, x)


class TranslationInvariantCost(CostModel):
    """c(x, y) = k(x − y) on flat space"""

    def profile(self, v):
        raise NotImplementedError

    def profile_grad(self, v):
        raise NotImplementedError

    def profile_hess(self, v):
        raise NotImplementedError

    def matrix(self, X, Y):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        return self.profile(X[:, None, :] - Y[None, :, :])

    def grad2_many(self, X, y):
        return -self.profile_grad(np.asarray(X, dtype=float) - np.asarray(y, dtype=float))

    def hess2_many(self, X, y):
        return self.profile_hess(np.asarray(X, dtype=float) - np.asarray(y, dtype=float))

    def crosshess(self, x, y):
        x, y = self._check_pair(x, y)
        return -self.profile_hess(x - y)


class HalfSquaredEuclidean(TranslationInvariantCost):
    family = "HalfSquaredEuclidean"

    def profile(self, v):
        return 0.5 * np.sum(v * v, axis=-1)

    def profile_grad(self, v):
        return v

    def profile_hess(self, v):
        eye = np.eye(v.shape[-1])
        return np.broadcast_to(eye, v.shape[:-1] + eye.shape).copy()

    def hessian_bounds(self):
        return 1.0, 1.0


class AnisotropicQuadratic(TranslationInvariantCost):
    """c(x, y) = ⟨x − y, Σ(x − y)⟩ / 2"""

    family = "AnisotropicQuadratic"

    def __init__(self, sigma):
        sigma = np.atleast_2d(np.asarray(sigma, dtype=float))
        if sigma.shape[0] != sigma.shape[1]:
            raise ValueError("Σ must be square")
        if not np.allclose(sigma, sigma.T, atol=1e-12):
            raise ValueError("Σ must be symmetric")
        eigenvalues = np.linalg.eigvalsh(sigma)
        if eigenvalues[0] <= 0:
            raise ValueError("Σ must be positive definite")
        super().__init__(dim=sigma.shape[0])
        self.sigma = 0.5 * (sigma + sigma.T)
        self.eigenvalues = eigenvalues

    def describe(self):
        return f"dim={self.dim}"

    @property
    def sigma_norm(self):
        return float(self.eigenvalues[-1])

    def profile(self, v):
        return 0.5 * np.einsum("...i,ij,...j->...", v, self.sigma, v)

    def profile_grad(self, v):
        return v @ self.sigma

    def profile_hess(self, v):
        return np.broadcast_to(self.sigma, v.shape[:-1] + self.sigma.shape).copy()

    def hessian_bounds(self):
        return float(self.eigenvalues[0]), float(self.eigenvalues[-1])


def orthogonal_projector(A):
    """A^⊥ = Id − Aᵀ(AAᵀ)⁻¹A, projector onto the kernel of a full-row-rank A"""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if np.linalg.matrix_rank(A) != A.shape[0]:
        raise ValueError("A must have full row rank")
    return np.eye(A.shape[1]) - A.T @ np.linalg.solve(A @ A.T, A)


class SubspaceElastic(AnisotropicQuadratic):
    """|x − y|²/2 + γ|A^⊥(x − y)|²/2, realized with Σ = Id + γA^⊥"""

    family = "SubspaceElastic"

    def __init__(self, gamma, A):
        if gamma < 0:
            raise ValueError("γ must be nonnegative")
        self.gamma = float(gamma)
        self.A = np.atleast_2d(np.asarray(A, dtype=float))
        self.projector = orthogonal_projector(self.A)
        super().__init__(np.eye(self.A.shape[1]) + self.gamma * self.projector)

    def describe(self):
        return f"gamma={self.gamma}, A={self.A.shape}"


class STVS(TranslationInvariantCost):
    """|x − y|²/2 plus the coordinate-separable vanishing-shrinkage penalty

    The penalty has a kink at vᵢ = 0, where the zero subgradient is returned.
    """

    family = "STVS"
    smooth = False

    def __init__(self, gamma, dim=None):
        if gamma <= 0:
            raise ValueError("γ must be positive")
        super().__init__(dim=dim)
        self.gamma = float(gamma)

    def describe(self):
        return f"gamma={self.gamma}"

    def profile(self, v):
        a = np.arcsinh(np.abs(v) / (2.0 * self.gamma))
        penalty = self.gamma ** 2 * (a + 0.5 - 0.5 * np.exp(-2.0 * a))
        return 0.5 * np.sum(v * v, axis=-1) + np.sum(penalty, axis=-1)

    def profile_grad(self, v):
        return 0.5 * v + np.sign(v) * np.sqrt(self.gamma ** 2 + 0.25 * v * v)

    def profile_hess(self, v):
        diag = 0.5 + np.abs(v) / (2.0 * np.sqrt(4.0 * self.gamma ** 2 + v * v))
        return diag[..., :, None] * np.eye(v.shape[-1])

    def hessian_bounds(self):
        return 0.5, 1.0


def stvs_eval(gamma, x, y):
    """Evaluate the STVS cost between two points"""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    return float(STVS(gamma).profile(x - y))


class PCost(TranslationInvariantCost):
    """(1 + |x − y|²)^{p/2} − 1"""

    family = "PCost"

    def __init__(self, p, dim=None):
        if not 1.0 < p < 2.0:
            raise ValueError("p must lie in (1, 2)")
        super().__init__(dim=dim)
        self.p = float(p)

    def describe(self):
        return f"p={self.p}"

    def profile(self, v):
        return (1.0 + np.sum(v * v, axis=-1)) ** (0.5 * self.p) - 1.0

    def profile_grad(self, v):
        base = 1.0 + np.sum(v * v, axis=-1, keepdims=True)
        return self.p * base ** (0.5 * self.p - 1.0) * v

    def profile_hess(self, v):
        base = 1.0 + np.sum(v * v, axis=-1)
        eye = np.eye(v.shape[-1])
        first = (self.p * base ** (0.5 * self.p - 1.0))[..., None, None] * eye
        second = (self.p * (self.p - 2.0) * base ** (0.5 * self.p - 2.0))[..., None, None]
        return first + second * v[..., :, None] * v[..., None, :]


class SphereInnerProductCost(CostModel):
    """c(x, y) = g(⟨x, y⟩) on the unit sphere, derivatives from g′ and g″"""

    geometry_kind = "sphere"

    def g(self, s):
        raise NotImplementedError

    def g1(self, s):
        raise NotImplementedError

    def g2(self, s):
        raise NotImplementedError

    def matrix(self, X, Y):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        return self.g(clamp_inner(X @ Y.T))

    def grad2_many(self, X, y):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        y = np.asarray(y, dtype=float)
        s = clamp_inner(X @ y)
        W = X - s[:, None] * y
        return self.g1(s)[:, None] * W

    def hess2_many(self, X, y):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        y = np.asarray(y, dtype=float)
        s = clamp_inner(X @ y)
        W = X - s[:, None] * y
        P = np.eye(len(y)) - np.outer(y, y)
        first = (-s * self.g1(s))[:, None, None] * P
        second = self.g2(s)[:, None, None] * W[:, :, None] * W[:, None, :]
        H = first + second
        return 0.5 * (H + np.swapaxes(H, 1, 2))

    def crosshess(self, x, y):
        x, y = self._check_pair(x, y)
        s = float(clamp_inner(np.dot(x, y)))
        Px = np.eye(len(x)) - np.outer(x, x)
        Py = np.eye(len(y)) - np.outer(y, y)
        return self.g2(np.array(s)) * np.outer(Px @ y, Py @ x) + self.g1(np.array(s)) * (Px @ Py)


class SphereRegular(SphereInnerProductCost):
    """1 − ⟨x, y⟩"""

    family = "SphereRegular"

    def g(self, s):
        return 1.0 - s

    def g1(self, s):
        return -np.ones_like(s)

    def g2(self, s):
        return np.zeros_like(s)

    def hessian_bounds(self):
        return -1.0, 1.0


class SphereDelta(SphereInnerProductCost):
    """arccos(δ⟨x, y⟩)² with δ ∈ (0, 1)"""

    family = "SphereDelta"

    def __init__(self, delta):
        if not 0.0 < delta < 1.0:
            raise ValueError("δ must lie in (0, 1)")
        super().__init__()
        self.delta = float(delta)

    def describe(self):
        return f"delta={self.delta}"

    def _gap(self, s):
        gap = 1.0 - (self.delta * s) ** 2
        if np.any(gap <= 0):
            raise CostDomainError("outside smooth domain")
        return gap

    def g(self, s):
        return np.arccos(self.delta * s) ** 2

    def g1(self, s):
        return -2.0 * self.delta * np.arccos(self.delta * s) / np.sqrt(self._gap(s))

    def g2(self, s):
        gap = self._gap(s)
        theta = np.arccos(self.delta * s)
        return 2.0 * self.delta ** 2 / gap - 2.0 * self.delta ** 3 * s * theta / gap ** 1.5


def cost_eval(c, x, y):
    return c.eval(x, y)


def cost_grad2(c, x, y):
    return c.grad2(x, y)


def cost_hess2(c, x, y):
    return c.hess2(x, y)


def _matrix_param(spec, key, dim=None):
    value = np.asarray(spec[key], dtype=float)
    if value.ndim == 1:
        dim = int(spec.get("dim", dim or round(np.sqrt(value.size))))
        value = value.reshape(dim, -1)
    return value


COST_FAMILIES = ("HalfSquaredEuclidean", "AnisotropicQuadratic", "SubspaceElastic", "STVS",
                 "PCost", "SphereRegular", "SphereDelta")


def cost_from_config(spec):
    """Build a cost from a config mapping like {"family": "STVS", "gamma": 1.0}"""
    if isinstance(spec, str):
        spec = {"family": spec}
    family = spec.get("family")
    try:
        if family == "HalfSquaredEuclidean":
            return HalfSquaredEuclidean(dim=spec.get("dim"))
        if family == "AnisotropicQuadratic":
            return AnisotropicQuadratic(_matrix_param(spec, "sigma"))
        if family == "SubspaceElastic":
            A = np.asarray(spec["A"], dtype=float)
            if A.ndim == 1:
                A = A.reshape(-1, int(spec["dim"]))
            return SubspaceElastic(spec.get("gamma", 1.0), A)
        if family == "STVS":
            return STVS(spec.get("gamma", 1.0), dim=spec.get("dim"))
        if family == "PCost":
            return PCost(spec.get("p", 1.5), dim=spec.get("dim"))
        if family == "SphereRegular":
            return SphereRegular()
        if family == "SphereDelta":
            return SphereDelta(spec.get("delta", 0.9))
    except KeyError as e:
        raise ConfigError(f"cost {family}: missing parameter {e}")
    except ValueError as e:
        raise ConfigError(f"cost {family}: {e}")
    raise ConfigError(f"unknown cost family: {family!r} (expected one of {', '.join(COST_FAMILIES)})")
