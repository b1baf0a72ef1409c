"""Weighted finite point sets on a declared geometry"""
import logging

import numpy as np
from scipy.special import logsumexp

from costs.geometry import Geometry, euclidean
from utils.errors import MeasureError
from utils.io import read_csv, write_csv

logger = logging.getLogger(__name__)

# normalized weights below this are dropped before renormalizing
DROP_THRESHOLD = 1e-300
LOG_DROP_THRESHOLD = np.log(DROP_THRESHOLD)


class DiscreteMeasure:
    """Probability measure with finitely many atoms

    Points and weights are stored read-only. Weights are kept in log form as well so
    kernels never take log(0). Measures built with ``drop_zero=False`` keep every atom
    (used for Sinkhorn marginals, whose supports must stay aligned atom-by-atom).
    """

    def __init__(self, points, weights, geometry=None, drop_zero=True):
        weights = np.asarray(weights, dtype=float)
        if np.any(weights < 0) or not np.all(np.isfinite(weights)):
            raise MeasureError("weights must be finite and nonnegative")
        with np.errstate(divide="ignore"):
            log_weights = np.log(weights)
        self._build(points, log_weights, geometry, drop_zero)

    @classmethod
    def from_log_weights(cls, points, log_weights, geometry=None, drop_zero=True):
        measure = cls.__new__(cls)
        measure._build(points, np.asarray(log_weights, dtype=float), geometry, drop_zero)
        return measure

    def _build(self, points, log_weights, geometry, drop_zero):
        points = np.asarray(points, dtype=float)
        if points.ndim == 1:
            points = points[:, None]
        if geometry is None:
            geometry = euclidean(points.shape[1])
        if not isinstance(geometry, Geometry):
            raise MeasureError("geometry must be a Geometry")
        points = geometry.check_points(points)
        log_weights = log_weights.reshape(-1)
        if len(log_weights) != len(points):
            raise MeasureError("points and weights differ in length")
        if np.any(np.isnan(log_weights)) or np.any(log_weights == np.inf):
            raise MeasureError("weights must be finite")

        total = logsumexp(log_weights) if len(log_weights) else -np.inf
        if not np.isfinite(total):
            raise MeasureError("empty support after normalization")
        log_weights = log_weights - total

        if drop_zero:
            keep = log_weights >= LOG_DROP_THRESHOLD
            if not np.all(keep):
                logger.debug(f"Dropping {int(np.sum(~keep))} atoms with negligible weight")
                points = points[keep]
                log_weights = log_weights[keep]
                log_weights = log_weights - logsumexp(log_weights)

        self.geometry = geometry
        self.points = points
        self.log_weights = log_weights
        self.weights = np.exp(log_weights)
        for array in (self.points, self.log_weights, self.weights):
            array.setflags(write=False)

    def __len__(self):
        return len(self.weights)

    def __repr__(self):
        return f"DiscreteMeasure(atoms={len(self)}, geometry={self.geometry})"

    @property
    def size(self):
        return len(self)

    @property
    def dim(self):
        return self.points.shape[1]

    # -- constructors ----------------------------------------------------

    @classmethod
    def dirac(cls, point, geometry=None):
        return cls(np.atleast_2d(np.asarray(point, dtype=float)), [1.0], geometry)

    @classmethod
    def uniform(cls, points, geometry=None):
        points = np.asarray(points, dtype=float)
        return cls(points, np.ones(len(points)), geometry)

    def reweighted(self, log_factors, drop_zero=True):
        """Measure with weights ∝ weights · exp(log_factors) on the same points"""
        return DiscreteMeasure.from_log_weights(self.points, self.log_weights + np.asarray(log_factors),
                                                self.geometry, drop_zero=drop_zero)

    # -- comparisons -----------------------------------------------------

    def same_support(self, other, atol=0.0):
        return (self.geometry == other.geometry and self.points.shape == other.points.shape
                and np.allclose(self.points, other.points, rtol=0.0, atol=atol))

    def require_same_geometry(self, other):
        self.geometry.require(other.geometry)

    def total_variation(self, other):
        if not self.same_support(other):
            raise MeasureError("total variation needs aligned supports")
        return 0.5 * float(np.sum(np.abs(self.weights - other.weights)))

    def index_in(self, other, atol=1e-12):
        """Index of each atom of self among the atoms of other, -1 when absent"""
        self.require_same_geometry(other)
        index = np.full(len(self), -1, dtype=int)
        for i, point in enumerate(self.points):
            hits = np.flatnonzero(np.all(np.abs(other.points - point) <= atol, axis=1))
            if len(hits):
                index[i] = hits[0]
        return index

    # -- moments ---------------------------------------------------------

    def mean(self):
        return self.weights @ self.points

    def covariance(self):
        centered = self.points - self.mean()
        return (centered * self.weights[:, None]).T @ centered

    # -- serialization ---------------------------------------------------

    def to_csv(self, path, stamp=False):
        header = [f"x_{k + 1}" for k in range(self.dim)] + ["weight"]
        rows = [list(point) + [weight] for point, weight in zip(self.points, self.weights)]
        return write_csv(path, header, rows, stamp=stamp)

    @classmethod
    def from_csv(cls, path, geometry=None):
        header, rows = read_csv(path)
        if not header or header[-1] != "weight":
            raise MeasureError(f"{path}: header must end with a weight column")
        data = np.array([[float(v) for v in row] for row in rows], dtype=float)
        if data.size == 0:
            raise MeasureError("empty support after normalization")
        return cls(data[:, :-1], data[:, -1], geometry)
