"""Discretizations of log-density models on regular grids and sphere point sets"""
import logging

import numpy as np

from costs.geometry import euclidean, sphere
from measures.discrete_measure import DiscreteMeasure
from utils.errors import MeasureError

logger = logging.getLogger(__name__)


def grid_points(box, resolution):
    """Regular grid in C order (first axis slowest)"""
    box = np.atleast_2d(np.asarray(box, dtype=float))
    dim = box.shape[0]
    if np.isscalar(resolution) or np.ndim(resolution) == 0:
        resolution = [int(resolution)] * dim
    if len(resolution) != dim:
        raise ValueError("resolution must give one count per axis")
    if any(int(n) < 2 for n in resolution):
        raise ValueError("resolution must be at least 2 per axis")
    if np.any(box[:, 1] <= box[:, 0]):
        raise ValueError("box must be non-degenerate")
    axes = [np.linspace(lo, hi, int(n)) for (lo, hi), n in zip(box, resolution)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.reshape(-1) for m in mesh], axis=1)


def build_grid_measure(model, box, resolution):
    """Atoms on the grid with weights ∝ exp(−U), normalized in log space"""
    points = grid_points(box, resolution)
    with np.errstate(over="ignore", invalid="ignore"):
        U = np.asarray(model.potential(points), dtype=float).reshape(-1)
    U = np.where(np.isnan(U), np.inf, U)
    if not np.any(np.isfinite(U)):
        raise MeasureError("empty support after normalization")
    measure = DiscreteMeasure.from_log_weights(points, -U, euclidean(points.shape[1]))
    logger.debug(f"Built {model.name} grid measure with {len(measure)} atoms")
    return measure


def fibonacci_sphere(count):
    """Nearly uniform points on S²"""
    k = np.arange(count) + 0.5
    z = 1.0 - 2.0 * k / count
    radius = np.sqrt(1.0 - z * z)
    angle = np.pi * (1.0 + np.sqrt(5.0)) * k
    return np.stack([radius * np.cos(angle), radius * np.sin(angle), z], axis=1)


def sphere_grid_measure(count, dim=2, kappa=0.0, mean=None):
    """von Mises–Fisher weights ∝ exp(κ⟨m, x⟩) on equiangular (S¹) or Fibonacci (S²) points"""
    if dim == 1:
        angles = 2.0 * np.pi * np.arange(count) / count
        points = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    elif dim == 2:
        points = fibonacci_sphere(count)
    else:
        raise ValueError("sphere measures are available on S¹ and S² only")
    points = points / np.linalg.norm(points, axis=1, keepdims=True)
    if mean is None:
        mean = np.eye(dim + 1)[-1]
    mean = np.asarray(mean, dtype=float)
    mean = mean / np.linalg.norm(mean)
    return DiscreteMeasure.from_log_weights(points, kappa * (points @ mean), sphere(dim))
