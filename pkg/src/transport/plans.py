"""Couplings between two discrete measures, stored by log weights"""
import numpy as np
from scipy.special import logsumexp

from measures.discrete_measure import DiscreteMeasure
from utils.errors import ShapeMismatchError
from utils.io import write_csv


class DiscretePlan:
    """Plan on supp(row_measure) × supp(col_measure)"""

    def __init__(self, log_weights, row_measure, col_measure):
        log_weights = np.asarray(log_weights, dtype=float)
        if log_weights.shape != (len(row_measure), len(col_measure)):
            raise ShapeMismatchError("plan shape does not match its marginal supports")
        self.log_weights = log_weights
        self.row_measure = row_measure
        self.col_measure = col_measure

    def __repr__(self):
        return f"DiscretePlan({self.shape[0]}x{self.shape[1]})"

    @property
    def shape(self):
        return self.log_weights.shape

    @property
    def weights(self):
        return np.exp(self.log_weights)

    @property
    def log_mass(self):
        return float(logsumexp(self.log_weights))

    def row_log_marginal(self):
        return logsumexp(self.log_weights, axis=1)

    def col_log_marginal(self):
        return logsumexp(self.log_weights, axis=0)

    def row_marginal(self):
        return DiscreteMeasure.from_log_weights(self.row_measure.points, self.row_log_marginal(),
                                                self.row_measure.geometry, drop_zero=False)

    def col_marginal(self):
        return DiscreteMeasure.from_log_weights(self.col_measure.points, self.col_log_marginal(),
                                                self.col_measure.geometry, drop_zero=False)

    def row_tv_error(self):
        """TV distance between the raw row sums and the row measure"""
        return 0.5 * float(np.sum(np.abs(np.exp(self.row_log_marginal()) - self.row_measure.weights)))

    def col_tv_error(self):
        return 0.5 * float(np.sum(np.abs(np.exp(self.col_log_marginal()) - self.col_measure.weights)))

    def transpose(self):
        return DiscretePlan(self.log_weights.T, self.col_measure, self.row_measure)

    def to_csv(self, path, stamp=False):
        weights = self.weights
        rows = [(i, j, weights[i, j]) for i, j in zip(*np.nonzero(weights))]
        return write_csv(path, ["i", "j", "weight"], rows, stamp=stamp)
