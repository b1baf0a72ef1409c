"""Transport gauges ω(y, z) used by the generalized transport inequalities"""
import numpy as np


def omega_lpa(r, p, a):
    """Quadratic below a, p-power growth above a, matched in value and slope at r = a"""
    if not 1.0 < p <= 2.0:
        raise ValueError("p must lie in (1, 2]")
    if a <= 0:
        raise ValueError("a must be positive")
    r = np.asarray(r, dtype=float)
    outer = a ** (2.0 - p) * np.abs(r) ** p / p + a ** 2 * (p - 2.0) / (2.0 * p)
    value = np.where(r <= a, 0.5 * r * r, outer)
    return float(value) if value.ndim == 0 else value


class SquaredDistance:
    """ω = d² on the given geometry"""

    name = "squared-distance"

    def __init__(self, geometry):
        self.geometry = geometry

    def matrix(self, Y, Z):
        return self.geometry.squared_distance_matrix(Y, Z)

    def __call__(self, y, z):
        return float(self.geometry.distance(y, z) ** 2)


class RadialGauge:
    """ω(y, z) = profile(d(y, z)) for a vectorized profile"""

    def __init__(self, profile, geometry, name="radial"):
        self.profile = profile
        self.geometry = geometry
        self.name = name

    def matrix(self, Y, Z):
        return np.asarray(self.profile(np.sqrt(self.geometry.squared_distance_matrix(Y, Z))), dtype=float)

    def __call__(self, y, z):
        return float(self.profile(self.geometry.distance(y, z)))


def lpa_gauge(p, a, geometry):
    return RadialGauge(lambda r: omega_lpa(r, p, a), geometry, name=f"L_{{{p},{a}}}")


def gauge_matrix(omega, Y, Z):
    """Pairwise gauge values; plain callables of two points are evaluated entry by entry"""
    if hasattr(omega, "matrix"):
        return np.asarray(omega.matrix(Y, Z), dtype=float)
    return np.array([[float(omega(y, z)) for z in Z] for y in Y])
