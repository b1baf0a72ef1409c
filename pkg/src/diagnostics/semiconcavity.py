"""Sampled estimates of the semiconcavity constant of y ↦ c(x, y) + ψⁿ(y)

Two modes:
    definition-probe  max over (x, y, z) of 2[f(z) − f(y) − ⟨∇f(y), log_y z⟩] / ω(y, z), ω = d² by default
    hessian-sup       max over (x, y) of λ_max[∇₂²c(x, y) + ∇²ψⁿ(y)]
Both only see finitely many samples and so under-estimate the supremum.
"""
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from diagnostics.conditionals import conditional_at_point, extended_psi, psi_gradient, psi_hessian
from transport.divergences import kl
from utils.errors import ProbeError

logger = logging.getLogger(__name__)

MODES = ("definition-probe", "hessian-sup")
MIN_PROBE_DISTANCE = 1e-8
DEFAULT_SEED = 0


@dataclass
class ProbeSpec:
    """Sampling plan for a probe

    Attributes:
        samples: number of base points y (and of (y, z) pairs in definition-probe mode)
        box: per-axis (lo, hi) sampling box for flat geometries
        max_radius: largest |z − y| (flat) or geodesic radius (sphere, capped at π/2)
    """

    samples: int = 200
    box: Optional[list] = None
    rng_seed: int = DEFAULT_SEED
    mode: str = "hessian-sup"
    max_radius: float = 1.0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown probe mode: {self.mode}")
        if self.samples < 1:
            raise ValueError("samples must be positive")
        if not self.max_radius > 0:
            raise ValueError("max_radius must be positive")


@dataclass
class SemiconcavityEstimate:
    lambda_hat: float
    probe_count: int
    worst_triple: tuple
    mode: str
    rng_seed: int
    skipped: int = 0
    gauge: str = "squared-distance"
    notes: list = field(default_factory=list)


def _working_box(state, spec):
    if spec.box is not None:
        return np.asarray(spec.box, dtype=float)
    # bounding box of the ν support, flat axes widened to unit length
    points = state.nu.points
    lo, hi = points.min(axis=0), points.max(axis=0)
    pad = np.where(hi > lo, 0.0, 0.5)
    return np.stack([lo - pad, hi + pad], axis=1)


def _sample_pairs(state, spec, rng):
    """(y, z, tangent v with exp_y(v) = z, distance) probe pairs"""
    geometry = state.nu.geometry
    pairs = []
    if geometry.is_sphere:
        radius = min(spec.max_radius, 0.5 * np.pi)
        for y in geometry.random_points(rng, spec.samples):
            u = geometry.random_unit_tangent(rng, y)
            r = rng.uniform(0.0, radius)
            pairs.append((y, geometry.exp_map(y, u, r), r * u, r))
        return pairs
    box = _working_box(state, spec)
    attempts = 0
    while len(pairs) < spec.samples and attempts < 100 * spec.samples:
        attempts += 1
        y = rng.uniform(box[:, 0], box[:, 1])
        u = rng.standard_normal(len(y))
        u /= np.linalg.norm(u)
        r = rng.uniform(0.0, spec.max_radius)
        z = y + r * u
        if np.all(z >= box[:, 0]) and np.all(z <= box[:, 1]):
            pairs.append((y, z, r * u, r))
    return pairs


def _definition_probe(state, spec, omega=None):
    rng = np.random.default_rng(spec.rng_seed)
    X = state.rho.points
    best, worst, skipped = -np.inf, None, 0
    pairs = _sample_pairs(state, spec, rng)
    for y, z, v, r in pairs:
        if r < MIN_PROBE_DISTANCE:
            skipped += 1
            continue
        scale = r ** 2 if omega is None else float(omega(y, z))
        if scale <= 0:
            skipped += 1
            continue
        costs = state.cost.matrix(X, np.stack([y, z]))
        psi_y, psi_z = extended_psi(state, np.stack([y, z]))
        grad = state.cost.grad2_many(X, y) + psi_gradient(state, y)
        gaps = costs[:, 1] - costs[:, 0] + psi_z - psi_y - grad @ v
        quotients = 2.0 * gaps / scale
        i = int(np.argmax(quotients))
        if quotients[i] > best:
            best, worst = float(quotients[i]), (i, y.copy(), z.copy())
    return best, worst, len(pairs) - skipped, skipped


def _hessian_sup(state, spec):
    rng = np.random.default_rng(spec.rng_seed)
    geometry = state.nu.geometry
    X = state.rho.points
    if geometry.is_sphere:
        ys = geometry.random_points(rng, spec.samples)
    else:
        box = _working_box(state, spec)
        ys = rng.uniform(box[:, 0], box[:, 1], size=(spec.samples, geometry.dim))
    best, worst = -np.inf, None
    for y in ys:
        H = state.cost.hess2_many(X, y) + psi_hessian(state, y)[None, :, :]
        if geometry.is_sphere:
            basis = geometry.tangent_basis(y)
            H = np.einsum("ak,nab,bl->nkl", basis, H, basis)
        top = np.linalg.eigvalsh(H)[:, -1]
        i = int(np.argmax(top))
        if top[i] > best:
            best, worst = float(top[i]), (i, y.copy(), y.copy())
    return best, worst, len(ys), 0


def estimate_lambda(state, probe_spec=None):
    """Sampled Λ̂ for y ↦ c(x, y) + ψⁿ(y), uniformly over the ρ atoms x"""
    spec = ProbeSpec() if probe_spec is None else probe_spec
    if spec.mode == "definition-probe":
        lam, worst, count, skipped = _definition_probe(state, spec)
    else:
        lam, worst, count, skipped = _hessian_sup(state, spec)
    if count == 0:
        raise ProbeError("no admissible probe could be drawn")
    logger.debug(f"Λ̂ ({spec.mode}, ε={state.epsilon}) = {lam:.6g} over {count} probes, seed {spec.rng_seed}")
    return SemiconcavityEstimate(lam, count, worst, spec.mode, spec.rng_seed, skipped)


def semiconcavity_profile_check(state, omega, probe_spec=None):
    """(Λ, ω) version of the definition probe: max of 2[f(z) − f(y) − ⟨∇f(y), log_y z⟩]/ω(y, z)"""
    spec = ProbeSpec(mode="definition-probe") if probe_spec is None else probe_spec
    lam, worst, count, skipped = _definition_probe(state, spec, omega=omega)
    if count == 0:
        raise ProbeError("no admissible probe could be drawn")
    return SemiconcavityEstimate(lam, count, worst, "definition-probe", spec.rng_seed, skipped,
                                 gauge=getattr(omega, "name", "custom"))


def conditional_kl_check(state, lam, pair_count=200, rng_seed=DEFAULT_SEED, max_radius=None):
    """Worst KL(π(·|y) | π(·|z)) − (λ/2ε) d²(y, z) over sampled pairs of ν atoms"""
    rng = np.random.default_rng(rng_seed)
    nu = state.nu
    geometry = nu.geometry
    worst = -np.inf
    for _ in range(pair_count):
        j, k = rng.integers(len(nu), size=2)
        y, z = nu.points[j], nu.points[k]
        d2 = float(geometry.distance(y, z) ** 2)
        if max_radius is not None and d2 > max_radius ** 2:
            continue
        excess = kl(conditional_at_point(state, y), conditional_at_point(state, z)) - lam * d2 / (2.0 * state.epsilon)
        worst = max(worst, excess)
    if not np.isfinite(worst):
        worst = 0.0
    logger.debug(f"conditional KL check λ={lam:.4g}: worst excess {worst:.3e} (seed {rng_seed})")
    return float(worst)
