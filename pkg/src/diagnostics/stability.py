"""Stability of optimal plans under changes of the second marginal, and the heavy-tail decay fit"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy import optimize, stats

from measures.discrete_measure import DiscreteMeasure
from transport.divergences import kl, kl_from_log
from transport.exact_ot import w2_squared, w_omega
from transport.sinkhorn import plan_log_weights, solve_reference

logger = logging.getLogger(__name__)

PERTURBATION_KINDS = ("reweight", "linear-tilt", "radial-tilt", "bump", "sparse-tilt")
DECAY_KL_FLOOR = 1e-12


@dataclass
class StabilityReport:
    kl_plans: float
    kl_marginals: float
    transport_term: float
    lam: float
    epsilon: float
    bound: float
    absolutely_continuous: bool = True
    gauge: str = "squared-distance"
    references_converged: bool = True

    @property
    def slack(self):
        """bound − KL(π^μ | π^ν); +∞ when μ is not absolutely continuous w.r.t. ν"""
        if not self.absolutely_continuous:
            return np.inf
        return self.bound - self.kl_plans


def embed_on_support(mu, nu):
    """μ written on the atoms of ν (zero weight where μ has no atom), or None when μ charges other atoms"""
    if mu.same_support(nu):
        return mu
    index = mu.index_in(nu)
    if np.any(index < 0):
        return None
    log_weights = np.full(len(nu), -np.inf)
    log_weights[index] = mu.log_weights
    return DiscreteMeasure.from_log_weights(nu.points, log_weights, nu.geometry, drop_zero=False)


def stability_gap(rho, nu, mu, cost, epsilon, lam, omega=None, reference_nu=None):
    """Both sides of KL(π^μ | π^ν) ≤ KL(μ|ν) + (λ/2ε)·W(μ, ν), W = W₂² or W_ω"""
    gauge = "squared-distance" if omega is None else getattr(omega, "name", "custom")
    embedded = embed_on_support(mu, nu)
    if embedded is None:
        logger.warning("μ charges atoms outside the support of ν; the stability bound is +∞")
        return StabilityReport(np.inf, np.inf, np.nan, lam, epsilon, np.inf, False, gauge)

    if reference_nu is None:
        reference_nu = solve_reference(rho, nu, cost, epsilon)
    reference_mu = solve_reference(rho, embedded, cost, epsilon,
                                   cost_matrix=reference_nu.cost_matrix)
    kl_plans = kl_from_log(plan_log_weights(reference_mu, "nn"), plan_log_weights(reference_nu, "nn"))
    kl_marginals = kl(embedded, nu)
    transport = w2_squared(mu, nu)[0] if omega is None else w_omega(mu, nu, omega)[0]
    bound = kl_marginals + lam * transport / (2.0 * epsilon)
    report = StabilityReport(kl_plans, kl_marginals, transport, lam, epsilon, bound, True, gauge,
                             reference_nu.converged and reference_mu.converged)
    logger.debug(f"stability ε={epsilon}: KL plans {kl_plans:.4e} ≤ bound {bound:.4e} (slack {report.slack:.2e})")
    return report


def _log_factors(nu, kind, rng):
    """Unit-scale log perturbation of the given kind, drawn from rng"""
    points = nu.points
    spread = np.sqrt(max(np.trace(nu.covariance()), 1e-12))
    center = nu.mean()
    if kind == "reweight":
        return rng.standard_normal(len(nu))
    if kind == "linear-tilt":
        direction = rng.standard_normal(points.shape[1])
        return points @ (direction / np.linalg.norm(direction)) / spread
    if kind == "radial-tilt":
        return -np.sum((points - center) ** 2, axis=1) / spread ** 2
    if kind == "bump":
        anchor = points[rng.integers(len(nu))]
        width = 0.25 * spread
        return np.exp(-0.5 * np.sum((points - anchor) ** 2, axis=1) / width ** 2)
    if kind == "sparse-tilt":
        axis = rng.integers(points.shape[1])
        return (points[:, axis] - center[axis]) / spread
    raise ValueError(f"unknown perturbation kind: {kind}")


def perturbation_family(nu, kind, scale, rng_seed=0):
    """ν reweighted by exp(scale · f) for a random f of the given kind; supports stay aligned"""
    factors = _log_factors(nu, kind, np.random.default_rng(rng_seed))
    return nu.reweighted(scale * factors, drop_zero=False)


def perturbation_with_kl(nu, kind, target_kl, rng_seed=0, max_scale=1e3):
    """Member of a perturbation family whose KL(μ|ν) equals `target_kl`

    KL(ν_t|ν) is nondecreasing in the tilt size t, so the scale is found by bracketing and
    Brent's method.
    """
    factors = _log_factors(nu, kind, np.random.default_rng(rng_seed))

    def excess(scale):
        return kl(nu.reweighted(scale * factors, drop_zero=False), nu) - target_kl

    upper = 1e-3
    while excess(upper) < 0:
        upper *= 2.0
        if upper > max_scale:
            raise ValueError(f"{kind} perturbations cannot reach KL {target_kl}")
    scale = optimize.brentq(excess, 0.0, upper, xtol=1e-14)
    return nu.reweighted(scale * factors, drop_zero=False), scale


@dataclass
class DecayFit:
    slope: float
    intercept: float
    r_squared: float
    points: int

    @property
    def geometric(self):
        return self.slope < 0


def heavy_tail_decay_fit(trace, first=3, last=30, floor=DECAY_KL_FLOOR):
    """Least-squares line through log KL(π* | π^{n,n}) for first ≤ n ≤ last, above `floor`"""
    n = np.array([row.n for row in trace.rows])
    values = trace.column("kl_plan_nn")
    mask = (n >= first) & (n <= last) & (values > floor)
    if np.count_nonzero(mask) < 3:
        logger.warning(f"decay fit: only {np.count_nonzero(mask)} iterations above KL {floor:.0e}")
        return DecayFit(np.nan, np.nan, np.nan, int(np.count_nonzero(mask)))
    fit = stats.linregress(n[mask], np.log(values[mask]))
    return DecayFit(float(fit.slope), float(fit.intercept), float(fit.rvalue ** 2), int(np.count_nonzero(mask)))
