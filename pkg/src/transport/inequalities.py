"""Empirical probing of transport–entropy inequalities

Candidates μ share the support of ν, so KL(μ|ν) stays finite. The probe can only falsify
an inequality: a nonpositive worst violation is consistent with it, never a proof.
"""
import logging
from dataclasses import dataclass, field

import numpy as np

from costs.gauges import SquaredDistance
from transport.divergences import kl
from transport.exact_ot import w2_squared, w_omega

logger = logging.getLogger(__name__)

FORMS = ("TI", "TI_omega", "gamma")
CANDIDATE_FAMILIES = ("reweight", "tilt", "bump")
SCALE_RANGE = (1e-3, 2.0)


@dataclass
class TIProbeReport:
    form: str
    tau: float
    max_violation: float
    worst_family: str
    worst_scale: float
    candidate_count: int
    rng_seed: int
    family_maxima: dict = field(default_factory=dict)
    families: tuple = CANDIDATE_FAMILIES


def ti_candidates(nu, candidate_count, rng_seed=0):
    """Yield (family, scale, μ) with μ = ν first and then reweightings, linear tilts and bumps of ν"""
    rng = np.random.default_rng(rng_seed)
    yield "identity", 0.0, nu
    points = nu.points
    spread = np.sqrt(max(np.trace(nu.covariance()), 1e-12))
    for k in range(candidate_count - 1):
        family = CANDIDATE_FAMILIES[k % len(CANDIDATE_FAMILIES)]
        scale = float(np.exp(rng.uniform(*np.log(SCALE_RANGE))))
        if family == "reweight":
            log_factors = scale * rng.standard_normal(len(nu))
        elif family == "tilt":
            direction = rng.standard_normal(points.shape[1])
            direction /= np.linalg.norm(direction)
            log_factors = scale * (points @ direction) / spread
        else:
            center = points[rng.integers(len(nu))]
            width = spread * rng.uniform(0.1, 0.5)
            log_factors = scale * np.exp(-0.5 * np.sum((points - center) ** 2, axis=1) / width ** 2)
        yield family, scale, nu.reweighted(log_factors, drop_zero=False)


def ti_probe(nu, tau, form="TI", candidate_count=500, rng_seed=0, omega=None, gamma=None):
    """Worst value of LHS − RHS over generated candidates μ

    Forms:
        TI:        W₂²(μ, ν) ≤ 2τ KL(μ|ν)
        TI_omega:  W_ω(μ, ν) ≤ 2τ KL(μ|ν)
        gamma:     W_ω(μ, ν) ≤ τ (KL(μ|ν) + KL(μ|ν)^γ)
    """
    if form not in FORMS:
        raise ValueError(f"unknown inequality form: {form}")
    if tau < 0:
        raise ValueError("τ must be nonnegative")
    if candidate_count < 1:
        raise ValueError("candidate_count must be positive")
    if form == "gamma" and (gamma is None or gamma <= 0):
        raise ValueError("the gamma form needs γ > 0")
    if form != "TI" and omega is None:
        omega = SquaredDistance(nu.geometry)

    report = TIProbeReport(form, float(tau), -np.inf, "identity", 0.0, candidate_count, rng_seed)
    for family, scale, mu in ti_candidates(nu, candidate_count, rng_seed):
        divergence = kl(mu, nu)
        if form == "TI":
            lhs = w2_squared(mu, nu)[0]
            rhs = 2.0 * tau * divergence
        else:
            lhs = w_omega(mu, nu, omega)[0]
            rhs = 2.0 * tau * divergence if form == "TI_omega" else tau * (divergence + divergence ** gamma)
        violation = lhs - rhs
        report.family_maxima[family] = max(report.family_maxima.get(family, -np.inf), violation)
        if violation > report.max_violation:
            report.max_violation = float(violation)
            report.worst_family = family
            report.worst_scale = scale

    logger.info(f"{form} probe τ={tau}: worst violation {report.max_violation:.3e} "
                f"({report.worst_family}, {candidate_count} candidates, seed {rng_seed})")
    return report
