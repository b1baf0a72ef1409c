"""Geometries carried by measures and costs: flat space and the unit sphere"""
from dataclasses import dataclass

import numpy as np

from utils.errors import CostDomainError, GeometryMismatchError, MeasureError
from utils.linalg import tangent_basis

UNIT_TOL = 1e-12
TANGENT_TOL = 1e-10


def clamp_inner(s):
    """Clamp inner products feeding arccos"""
    return np.clip(s, -1.0, 1.0)


def sphere_exp(y, v, t=1.0):
    """Point reached at time t along the great circle leaving y with velocity v"""
    y = np.asarray(y, dtype=float)
    v = np.asarray(v, dtype=float)
    if abs(np.linalg.norm(y) - 1.0) > UNIT_TOL:
        raise CostDomainError("base point is not a unit vector")
    if abs(np.dot(y, v)) > TANGENT_TOL:
        raise CostDomainError("velocity is not tangent at the base point")
    speed = np.linalg.norm(v)
    if speed == 0.0:
        return y.copy()
    angle = t * speed
    return np.cos(angle) * y + np.sin(angle) * v / speed


@dataclass(frozen=True)
class Geometry:
    """Tag plus metric primitives; `dim` is the intrinsic dimension"""

    kind: str
    dim: int

    def __post_init__(self):
        if self.kind not in ("euclidean", "sphere"):
            raise ValueError(f"unknown geometry kind: {self.kind}")
        if self.dim < 1:
            raise ValueError("geometry dimension must be positive")

    @property
    def is_sphere(self):
        return self.kind == "sphere"

    @property
    def ambient_dim(self):
        return self.dim + 1 if self.is_sphere else self.dim

    def __str__(self):
        return f"{'Sphere' if self.is_sphere else 'Euclidean'}({self.dim})"

    def require(self, other):
        if self != other:
            raise GeometryMismatchError(f"geometry mismatch: {self} vs {other}")

    def check_points(self, points):
        points = np.asarray(points, dtype=float)
        if points.ndim != 2 or points.shape[1] != self.ambient_dim:
            raise MeasureError(f"points must have shape (n, {self.ambient_dim}) for {self}")
        if not np.all(np.isfinite(points)):
            raise MeasureError("points must be finite")
        if self.is_sphere:
            norms = np.linalg.norm(points, axis=1)
            if np.any(np.abs(norms - 1.0) > UNIT_TOL):
                raise MeasureError("sphere points must have unit norm")
        return points

    def distance(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.is_sphere:
            return np.arccos(clamp_inner(np.sum(x * y, axis=-1)))
        return np.linalg.norm(x - y, axis=-1)

    def squared_distance_matrix(self, X, Y):
        X = np.asarray(X, dtype=float)
        Y = np.asarray(Y, dtype=float)
        if self.is_sphere:
            return np.arccos(clamp_inner(X @ Y.T)) ** 2
        diff = X[:, None, :] - Y[None, :, :]
        return np.einsum("ijk,ijk->ij", diff, diff)

    def log_map(self, base, target):
        base = np.asarray(base, dtype=float)
        target = np.asarray(target, dtype=float)
        if not self.is_sphere:
            return target - base
        w = target - np.dot(base, target) * base
        norm = np.linalg.norm(w)
        if norm < 1e-15:
            return np.zeros_like(base)
        return self.distance(base, target) * w / norm

    def exp_map(self, base, tangent, t=1.0):
        if self.is_sphere:
            return sphere_exp(base, tangent, t)
        return np.asarray(base, dtype=float) + t * np.asarray(tangent, dtype=float)

    def project_tangent(self, base, v):
        v = np.asarray(v, dtype=float)
        if not self.is_sphere:
            return v
        base = np.asarray(base, dtype=float)
        return v - np.dot(base, v) * base

    def parallel_transport(self, base, tangent, w, t=1.0):
        """Transport of the tangent vector w at `base` along t ↦ exp_base(t · tangent)"""
        w = np.asarray(w, dtype=float)
        if not self.is_sphere:
            return w.copy()
        base = np.asarray(base, dtype=float)
        tangent = np.asarray(tangent, dtype=float)
        speed = np.linalg.norm(tangent)
        if speed == 0.0:
            return w.copy()
        u = tangent / speed
        angle = t * speed
        return w + np.dot(w, u) * ((np.cos(angle) - 1.0) * u - np.sin(angle) * base)

    def tangent_basis(self, base):
        if self.is_sphere:
            return tangent_basis(base)
        return np.eye(self.dim)

    def random_points(self, rng, count, box=None):
        """Uniform points on the sphere, or uniform in `box` (list of (lo, hi)) in flat space"""
        if self.is_sphere:
            g = rng.standard_normal((count, self.ambient_dim))
            return g / np.linalg.norm(g, axis=1, keepdims=True)
        box = np.asarray(box, dtype=float)
        return rng.uniform(box[:, 0], box[:, 1], size=(count, self.dim))

    def random_unit_tangent(self, rng, base):
        g = self.project_tangent(base, rng.standard_normal(self.ambient_dim))
        return g / np.linalg.norm(g)


def euclidean(dim):
    return Geometry("euclidean", dim)


def sphere(dim):
    return Geometry("sphere", dim)
