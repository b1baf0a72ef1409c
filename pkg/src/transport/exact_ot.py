"""Exact optimal transport on small instances

The linear program is solved by POT's network simplex (`ot.emd`), which also returns the
dual potentials used for the duality-gap check. One-dimensional problems with a convex
increasing cost of |z − y| can use the monotone (quantile) coupling instead.
"""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
import ot

from costs.gauges import gauge_matrix
from utils.errors import ProblemSizeError
from utils.io import write_csv

logger = logging.getLogger(__name__)

MAX_PAIRS = 10 ** 6
EMD_MAX_ITER = 1_000_000


@dataclass
class TransportPlanExact:
    coupling: np.ndarray
    objective: float
    cost_kind: str
    dual_u: Optional[np.ndarray] = None
    dual_v: Optional[np.ndarray] = None
    duality_gap: float = np.nan
    method: str = "network-simplex"

    def row_error(self, a):
        return float(np.max(np.abs(self.coupling.sum(axis=1) - a)))

    def col_error(self, b):
        return float(np.max(np.abs(self.coupling.sum(axis=0) - b)))

    def to_csv(self, path, stamp=False):
        rows = [(i, j, self.coupling[i, j]) for i, j in zip(*np.nonzero(self.coupling))]
        return write_csv(path, ["i", "j", "weight"], rows, stamp=stamp)


def _check_size(n, m):
    if n * m > MAX_PAIRS:
        raise ProblemSizeError(f"{n}x{m} atom pairs exceed the exact solver limit of {MAX_PAIRS}; "
                               f"subsample the measures first")


def exact_transport(a, b, M, cost_kind="custom"):
    """Optimal coupling of weight vectors a, b for cost matrix M, with duals and duality gap"""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    M = np.ascontiguousarray(M, dtype=np.float64)
    _check_size(len(a), len(b))

    G, log = ot.emd(a, b, M, numItermax=EMD_MAX_ITER, log=True)
    if log.get("warning"):
        logger.warning(f"Network simplex ({cost_kind}): {log['warning']}")
    objective = float(np.sum(G * M))
    dual = float(a @ log["u"] + b @ log["v"])
    return TransportPlanExact(G, objective, cost_kind, log["u"], log["v"], abs(objective - dual))


def monotone_coupling_1d(mu, nu, cost_matrix=None, cost_kind="squared-distance"):
    """Quantile coupling of two measures on the line

    Masses are matched along the merged cumulative distribution functions of the sorted
    atoms. With `cost_matrix` absent the cost is the squared distance.
    """
    if mu.geometry.is_sphere or mu.dim != 1 or nu.dim != 1:
        raise ValueError("the monotone coupling needs measures on the real line")
    x = mu.points[:, 0]
    y = nu.points[:, 0]
    ix = np.argsort(x, kind="stable")
    jy = np.argsort(y, kind="stable")
    A = np.cumsum(mu.weights[ix])
    B = np.cumsum(nu.weights[jy])
    A[-1] = B[-1] = 1.0

    breaks = np.unique(np.concatenate([[0.0], A, B]))
    lengths = np.diff(breaks)
    mids = 0.5 * (breaks[:-1] + breaks[1:])
    i = np.minimum(np.searchsorted(A, mids), len(x) - 1)
    j = np.minimum(np.searchsorted(B, mids), len(y) - 1)

    G = np.zeros((len(x), len(y)))
    np.add.at(G, (ix[i], jy[j]), lengths)
    if cost_matrix is None:
        cost_matrix = (x[:, None] - y[None, :]) ** 2
    return TransportPlanExact(G, float(np.sum(G * cost_matrix)), cost_kind, method="monotone")


def w2_squared(mu, nu, method="auto"):
    """W₂²(μ, ν) and an optimal coupling

    Args:
        method: "auto" (monotone coupling on the line, network simplex elsewhere), "lp" or "monotone"
    """
    mu.require_same_geometry(nu)
    _check_size(len(mu), len(nu))
    on_line = not mu.geometry.is_sphere and mu.dim == 1
    if method == "monotone" or (method == "auto" and on_line):
        result = monotone_coupling_1d(mu, nu)
    elif method in ("auto", "lp"):
        M = mu.geometry.squared_distance_matrix(mu.points, nu.points)
        result = exact_transport(mu.weights, nu.weights, M, "squared-distance")
    else:
        raise ValueError(f"unknown method: {method}")
    return result.objective, result


def w_omega(mu, nu, omega):
    """W_ω(μ, ν) = min over couplings of Σ π_{ij} ω(y_i, z_j)"""
    mu.require_same_geometry(nu)
    _check_size(len(mu), len(nu))
    M = gauge_matrix(omega, mu.points, nu.points)
    if np.any(M < 0) or not np.all(np.isfinite(M)):
        raise ValueError("ω must be finite and nonnegative")
    name = getattr(omega, "name", "custom")
    result = exact_transport(mu.weights, nu.weights, M, f"omega({name})")
    return result.objective, result
