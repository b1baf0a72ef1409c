"""Closed-form exponential rates for Sinkhorn's algorithm

The general statement: if y ↦ c(x, y) + ψⁿ(y) is Λ-semiconcave uniformly in x and n, and ν
satisfies a Talagrand inequality with constant τ, then

    KL(π* | π^{n+1,n+1}) ≤ κ · KL(π* | π^{n,n})

with κ = 1 − min{τΛ, ε}/(min{τΛ, ε} + τΛ) for every ε (variant i), and κ = 1 − ε/(ε + τΛ)
once ε ≤ τΛ (variant ii). Each catalog entry supplies Λ for one class of marginals and costs,
together with the rate and ε-threshold as displayed for that class.
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np

logger = logging.getLogger(__name__)

VARIANTS = ("i", "ii")


def _require_positive(**values):
    for name, value in values.items():
        if value is None:
            raise ValueError(f"missing parameter: {name}")
        if not (np.isfinite(value) and value > 0):
            raise ValueError(f"{name} must be positive, got {value}")


def _require_nonnegative(**values):
    for name, value in values.items():
        if value is None:
            raise ValueError(f"missing parameter: {name}")
        if not (np.isfinite(value) and value >= 0):
            raise ValueError(f"{name} must be nonnegative, got {value}")


def contraction_main(epsilon, tau, lam, variant="ii"):
    """Per-step contraction factor of KL(π* | π^{n,n})"""
    _require_positive(epsilon=epsilon, tau=tau, lam=lam)
    t = tau * lam
    if variant == "i":
        m = min(t, epsilon)
        return 1.0 - m / (m + t)
    if variant == "ii":
        return 1.0 - epsilon / (epsilon + t)
    raise ValueError(f"unknown variant: {variant!r} (expected 'i' or 'ii')")


@dataclass
class RateCertificate:
    setting: str
    formula: str
    lam: float
    tau: float
    epsilon: float
    contraction: float
    threshold: float
    threshold_ok: bool
    theorem_contraction: float
    certified: bool = True
    params: dict = field(default_factory=dict)

    def as_row(self):
        params = ";".join(f"{k}={v}" for k, v in sorted(self.params.items()))
        return (self.setting, params, self.tau, self.epsilon, self.lam, self.contraction, self.threshold,
                self.threshold_ok, self.theorem_contraction, self.certified)

    def describe(self):
        status = "within" if self.threshold_ok else "above"
        text = (f"{self.setting}: Λ = {self.lam:.6g}, contraction = {self.contraction:.6g} "
                f"(ε = {self.epsilon:g} {status} threshold {self.threshold:.6g}; "
                f"general-ε contraction {self.theorem_contraction:.6g})")
        if not self.certified:
            text += " [not certified: K is user-supplied]"
        return text


CERTIFICATE_COLUMNS = ("setting", "params", "tau", "epsilon", "lambda", "contraction", "threshold",
                       "threshold_ok", "theorem_contraction", "certified")


# Each entry maps (tau, epsilon, params) to (Λ, displayed contraction, ε-threshold).

def _anisotropic(tau, eps, p):
    _require_positive(sigma_norm=p.get("sigma_norm"), alpha=p.get("alpha"), beta=p.get("beta"))
    lam = math.sqrt(p["beta"] / p["alpha"]) * p["sigma_norm"]
    return lam, 1.0 - eps / (eps + tau * lam), tau * lam


def _log_concave(tau, eps, p):
    _require_positive(sigma_norm=p.get("sigma_norm"), alpha=p.get("alpha"))
    s, a = p["sigma_norm"], p["alpha"]
    lam = s ** 2 / (eps * a)
    return lam, 1.0 - eps ** 2 * a / (eps ** 2 * a + tau * s ** 2), s * math.sqrt(tau / a)


def _weakly(tau, eps, p):
    _require_positive(alpha=p.get("alpha"))
    _require_nonnegative(L=p.get("L"))
    a, L = p["alpha"], p["L"]
    lam = 1.0 / (eps * a) + L / (eps * a ** 2)
    contraction = 1.0 - eps ** 2 * a ** 2 / (eps ** 2 * a ** 2 + tau * (a + L))
    return lam, contraction, math.sqrt(tau * (a + L)) / a


def _compact(tau, eps, p):
    g = p.get("g", p.get("R"))
    _require_positive(g=g)
    return g ** 2 / eps, 1.0 - eps ** 2 / (eps ** 2 + tau * g ** 2), math.sqrt(tau) * g


def _two_term(tau, eps, delta_h, grad_sq):
    """Λ = δ_H + G²/ε with its threshold (τδ_H + √(τ²δ_H² + 4τG²))/2"""
    lam = delta_h + grad_sq / eps
    contraction = 1.0 - eps ** 2 / (eps ** 2 + tau * eps * delta_h + tau * grad_sq)
    threshold = 0.5 * (tau * delta_h + math.sqrt(tau ** 2 * delta_h ** 2 + 4.0 * tau * grad_sq))
    return lam, contraction, threshold


def _delta_h(p):
    H, h = p.get("H"), p.get("h")
    if H is None or h is None:
        raise ValueError("missing parameter: H and h")
    if H < h:
        raise ValueError("H must be at least h")
    return H - h


def _compact_both(tau, eps, p):
    _require_positive(G=p.get("G"))
    return _two_term(tau, eps, _delta_h(p), p["G"] ** 2)


def _lipschitz_y(tau, eps, p):
    _require_positive(lip=p.get("lip"))
    return _two_term(tau, eps, _delta_h(p), p["lip"] ** 2)


def _lipschitz_x(tau, eps, p):
    _require_positive(C_rho=p.get("C_rho"))
    _require_nonnegative(lip=p.get("lip"), H=p.get("H"))
    dh, H, C, lip = _delta_h(p), p["H"], p["C_rho"], p["lip"]
    lam = dh + 2.0 * H ** 2 * C * (1.0 + 4.0 * C * lip ** 2 / eps ** 2) / eps
    contraction = 1.0 - eps ** 4 / (eps ** 4 + tau * eps ** 3 * dh
                                    + 2.0 * tau * H ** 2 * C * (eps ** 2 + 4.0 * C * lip ** 2))
    threshold = min(1.0, (tau * dh + 2.0 * tau * H ** 2 * C * (1.0 + 4.0 * C * lip ** 2)) ** 0.25)
    return lam, contraction, threshold


def _sphere_regular(tau, eps, p):
    lam = 2.0 + 1.0 / eps
    return lam, 1.0 - eps ** 2 / (eps ** 2 + 2.0 * tau * eps + tau), tau + math.sqrt(tau + tau ** 2)


def _sphere_delta(tau, eps, p):
    d = p.get("delta")
    if d is None or not 0 < d < 1:
        raise ValueError("sphere-delta needs δ ∈ (0, 1)")
    k1 = d ** 2 + 2.0 * math.pi / math.sqrt(1.0 - d ** 2)
    k2 = 4.0 * math.pi ** 2 / (1.0 - d ** 2)
    lam = 2.0 * k1 + k2 / eps
    contraction = 1.0 - eps ** 2 / (eps ** 2 + 2.0 * tau * eps * k1 + k2 * tau)
    threshold = tau * k1 + math.sqrt(tau ** 2 * k1 ** 2 + k2 * tau)
    return lam, contraction, threshold


def _light_tail_params(p):
    _require_positive(C=p.get("C"), delta=p.get("delta"))
    _require_nonnegative(L=p.get("L", 0.0), R=p.get("R", 0.0))
    return p["C"], p["delta"], p.get("L", 0.0), p.get("R", 0.0)


def _light_tails(tau, eps, p):
    C, d, L, R = _light_tail_params(p)
    H = p.get("H")
    _require_nonnegative(H=H)
    dh = _delta_h(p)
    if dh == 0:
        spread = max(R ** 2, C ** (-2.0 / d))
        lam = 2.0 * H ** 2 * (1.0 + (L + 2.0) ** 2 * spread) / eps
        contraction = 1.0 - eps ** 2 / (eps ** 2 + 2.0 * tau * H ** 2 * (1.0 + (L + 2.0) ** 2 * spread))
        # ε-threshold kept as displayed, with (L + 2) unsquared
        threshold = math.sqrt(2.0 * tau * H ** 2 * (1.0 + (L + 2.0) * spread))
        return lam, contraction, threshold

    spread = max(R ** 2, C ** (-2.0 / d) * (1.0 + 2.0 * dh / eps) ** (2.0 / d))
    lam = dh + 2.0 * H ** 2 * (1.0 + (L + 2.0) ** 2 * spread) / eps
    q = 2.0 / d
    num = eps ** (2.0 + q)
    den = (num + eps ** (1.0 + q) * tau * dh
           + 2.0 * tau * H ** 2 * (eps ** q + (L + 2.0) ** 2 * C ** (-q) * (eps + 2.0 * dh) ** q))
    gap = R ** d * C - 1.0
    tail_cap = dh / gap if gap > 0 else np.inf
    power_cap = (tau * dh + 2.0 * tau * H ** 2 * (1.0 + (L + 2.0) ** 2 * C ** (-q) * (1.0 + 2.0 * dh) ** q)) \
        ** (d / (2.0 + 2.0 * d))
    return lam, 1.0 - num / den, float(min(1.0, tail_cap, power_cap))


def _light_tails_quadratic(tau, eps, p):
    C, d, L, R = _light_tail_params(p)
    _require_positive(sigma_norm=p.get("sigma_norm"))
    s = p["sigma_norm"]
    spread = 1.0 + (L + 1.0) ** 2 * max(R ** 2, C ** (-2.0 / d))
    lam = 2.0 * s ** 2 * spread / eps
    contraction = 1.0 - eps ** 2 / (eps ** 2 + 2.0 * tau * s ** 2 * spread)
    return lam, contraction, s * math.sqrt(2.0 * tau * spread)


def _heavy_tails(tau, eps, p):
    K = p.get("K")
    _require_positive(K=K)
    m = min(K, eps)
    # Λ with τΛ = K reproduces the displayed form through variant i
    return K / tau, 1.0 - m / (m + K), np.inf


SETTINGS = {
    "anisotropic": (_anisotropic, "1-eps/(eps+tau*|Sigma|*sqrt(beta/alpha))"),
    "log-concave": (_log_concave, "1-eps^2*alpha/(eps^2*alpha+tau*|Sigma|^2)"),
    "weakly-log-concave": (_weakly, "1-eps^2*alpha^2/(eps^2*alpha^2+tau*(alpha+L))"),
    "compact": (_compact, "1-eps^2/(eps^2+tau*g^2)"),
    "compact-both": (_compact_both, "1-eps^2/(eps^2+tau*eps*(H-h)+tau*G^2)"),
    "lipschitz-y": (_lipschitz_y, "1-eps^2/(eps^2+eps*tau*(H-h)+tau*Lip^2)"),
    "lipschitz-x": (_lipschitz_x, "1-eps^4/(eps^4+tau*eps^3*(H-h)+2*tau*H^2*C(eps^2+4*C*Lip^2))"),
    "sphere-regular": (_sphere_regular, "1-eps^2/(eps^2+2*tau*eps+tau)"),
    "sphere-delta": (_sphere_delta, "1-eps^2/(eps^2+2*tau*eps*K1+4*pi^2*tau/(1-delta^2))"),
    "light-tails": (_light_tails, "light-tails rate (delta_H = 0 or > 0 form)"),
    "light-tails-quadratic": (_light_tails_quadratic,
                              "1-eps^2/(eps^2+2*tau*|Sigma|^2*(1+(L+1)^2*[R^2 v C^(-2/delta)]))"),
    "heavy-tails": (_heavy_tails, "1-min(K,eps)/(min(K,eps)+K)"),
}

# parameters each setting reads (τ and ε aside)
SETTING_PARAMS = {
    "anisotropic": ("sigma_norm", "alpha", "beta"),
    "log-concave": ("sigma_norm", "alpha"),
    "weakly-log-concave": ("alpha", "L"),
    "compact": ("R",),
    "compact-both": ("H", "h", "G"),
    "lipschitz-y": ("H", "h", "lip"),
    "lipschitz-x": ("H", "h", "C_rho", "lip"),
    "sphere-regular": (),
    "sphere-delta": ("delta",),
    "light-tails": ("H", "h", "C", "delta", "L", "R"),
    "light-tails-quadratic": ("sigma_norm", "C", "delta", "L", "R"),
    "heavy-tails": ("K",),
}


def rate_catalog(setting, tau, epsilon, **params):
    """RateCertificate for one setting; ε above the threshold is reported, not refused"""
    if setting not in SETTINGS:
        raise ValueError(f"unknown setting: {setting!r} (expected one of {', '.join(SETTINGS)})")
    _require_positive(tau=tau, epsilon=epsilon)
    builder, formula = SETTINGS[setting]
    lam, contraction, threshold = builder(float(tau), float(epsilon), params)
    certificate = RateCertificate(
        setting=setting,
        formula=formula,
        lam=float(lam),
        tau=float(tau),
        epsilon=float(epsilon),
        contraction=float(contraction),
        threshold=float(threshold),
        threshold_ok=bool(epsilon <= threshold),
        theorem_contraction=contraction_main(epsilon, tau, lam, "i"),
        certified=setting != "heavy-tails",
        params=dict(params),
    )
    if not certificate.threshold_ok:
        logger.debug(f"{setting}: ε = {epsilon} exceeds the threshold {threshold:.4g}")
    return certificate


DEFAULT_SWEEP = {
    "anisotropic": {"sigma_norm": 1.0, "alpha": 1.0, "beta": 1.0},
    "log-concave": {"sigma_norm": 1.0, "alpha": 1.0},
    "weakly-log-concave": {"alpha": 1.0, "L": 1.0},
    "compact": {"R": 1.0},
    "compact-both": {"H": 1.0, "h": 0.5, "G": 1.0},
    "lipschitz-y": {"H": 1.0, "h": 0.0, "lip": 1.0},
    "lipschitz-x": {"H": 1.0, "h": 0.0, "C_rho": 1.0, "lip": 1.0},
    "sphere-regular": {},
    "sphere-delta": {"delta": 0.9},
    "light-tails": {"H": 1.0, "h": 1.0, "C": 1.0, "delta": 1.0, "L": 0.0, "R": 0.0},
    "light-tails-quadratic": {"sigma_norm": 1.0, "C": 1.0, "delta": 1.0, "L": 0.0, "R": 0.0},
    "heavy-tails": {"K": 1.0},
}


def default_catalog_sweep(taus=(0.5, 1.0, 2.0), epsilons=(0.05, 0.1, 0.25, 0.5, 1.0, 2.0)):
    """Certificates for every setting over a grid of (τ, ε) at default parameters"""
    return [rate_catalog(setting, tau, eps, **params)
            for setting, params in DEFAULT_SWEEP.items()
            for tau in taus
            for eps in epsilons]
