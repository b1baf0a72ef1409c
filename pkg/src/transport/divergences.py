"""Kullback–Leibler divergence between aligned measures or plans"""
import numpy as np
from scipy.special import rel_entr

from measures.discrete_measure import DiscreteMeasure
from transport.plans import DiscretePlan
from utils.errors import ShapeMismatchError


def kl_from_log(log_p, log_q):
    """Σ p log(p/q) from log weights, with 0·log(0/q) = 0 and +∞ where p charges a q-null atom"""
    log_p = np.asarray(log_p, dtype=float)
    log_q = np.asarray(log_q, dtype=float)
    if log_p.shape != log_q.shape:
        raise ShapeMismatchError(f"kl: shapes {log_p.shape} and {log_q.shape} differ")
    charged = log_p > -np.inf
    if np.any(charged & (log_q == -np.inf)):
        return np.inf
    p = np.exp(log_p[charged])
    value = float(np.sum(p * (log_p[charged] - log_q[charged])))
    return max(value, 0.0)


def kl(p, q):
    """KL(p | q) for two DiscretePlans, two DiscreteMeasures, or two probability arrays"""
    if isinstance(p, DiscretePlan) and isinstance(q, DiscretePlan):
        return kl_from_log(p.log_weights, q.log_weights)
    if isinstance(p, DiscreteMeasure) and isinstance(q, DiscreteMeasure):
        if not p.same_support(q):
            raise ShapeMismatchError("kl: measures must be supported on the same atoms")
        return kl_from_log(p.log_weights, q.log_weights)
    if isinstance(p, (DiscretePlan, DiscreteMeasure)) or isinstance(q, (DiscretePlan, DiscreteMeasure)):
        raise ShapeMismatchError("kl: operands must be of the same kind")
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ShapeMismatchError(f"kl: shapes {p.shape} and {q.shape} differ")
    return float(np.sum(rel_entr(p, q)))
