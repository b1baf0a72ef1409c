"""Experiment configuration: one JSON file fully determines a run"""
import json
import logging
import os
from dataclasses import asdict, dataclass, field
from typing import List, Optional

import numpy as np

from costs.cost_models import COST_FAMILIES, cost_from_config
from costs.geometry import euclidean, sphere
from measures.discrete_measure import DiscreteMeasure
from measures.grids import build_grid_measure, sphere_grid_measure
from measures.models import MODEL_BUILDERS, model_from_config
from theory.rates import SETTINGS
from utils.errors import ConfigError

logger = logging.getLogger(__name__)

CELL_CHECKS = ("monotonicity", "rate", "hessian", "conditional-kl", "stability", "identity", "exact-ot",
               "heavy-tail")
GLOBAL_CHECKS = ("gaussian-recursion", "sphere-derivatives", "polynomial", "exact-ot-1d")
CHECK_IDS = CELL_CHECKS + GLOBAL_CHECKS

DEFAULT_TOLERANCES = {
    "reference": 1e-13,
    "monotonicity": 1e-9,
    "identity": 1e-8,
    "crosscheck": 1e-10,
    "hessian": 1e-4,
    "gradient": 1e-6,
    "conditional-kl": 1e-8,
    "stability": 1e-8,
    "stop_kl": 1e-12,
    "duality": 1e-9,
}


@dataclass
class MeasureSpec:
    """One of: model on a grid, explicit atoms, a CSV file, or a sphere point set"""

    raw: dict

    @property
    def kind(self):
        for key in ("model", "points", "csv", "sphere"):
            if key in self.raw:
                return key
        return None

    @property
    def dim(self):
        if self.kind == "model":
            return len(self.raw.get("grid", {}).get("box", []))
        if self.kind == "sphere":
            return int(self.raw["sphere"].get("dim", 2))
        return int(self.raw.get("dim", 1))

    @property
    def is_sphere(self):
        return self.kind == "sphere" or self.raw.get("geometry") == "sphere"

    def validate(self, where):
        problems = []
        kind = self.kind
        if kind is None:
            return [f"{where}: expected one of 'model', 'points', 'csv', 'sphere'"]
        if kind == "model":
            model = self.raw["model"]
            if model.get("type") not in MODEL_BUILDERS:
                problems.append(f"{where}: unknown model type {model.get('type')!r}")
            grid = self.raw.get("grid")
            if not grid or "box" not in grid or "resolution" not in grid:
                problems.append(f"{where}: model measures need a grid with 'box' and 'resolution'")
        elif kind == "points":
            weights = self.raw.get("weights")
            if weights is not None and len(weights) != len(self.raw["points"]):
                problems.append(f"{where}: points and weights differ in length")
        elif kind == "sphere":
            if int(self.raw["sphere"].get("count", 0)) < 1:
                problems.append(f"{where}: sphere measures need a positive 'count'")
        return problems

    def model(self):
        """Log-density model behind a grid measure, or None"""
        if self.kind != "model":
            return None
        return model_from_config(self.raw["model"], self.dim)

    def build(self, base_dir="."):
        kind = self.kind
        if kind == "model":
            grid = self.raw["grid"]
            return build_grid_measure(self.model(), grid["box"], grid["resolution"])
        if kind == "points":
            points = np.asarray(self.raw["points"], dtype=float)
            if points.ndim == 1:
                points = points[:, None]
            weights = self.raw.get("weights", np.ones(len(points)))
            geometry = sphere(points.shape[1] - 1) if self.is_sphere else euclidean(points.shape[1])
            return DiscreteMeasure(points, weights, geometry)
        if kind == "csv":
            path = self.raw["csv"]
            if not os.path.isabs(path):
                path = os.path.join(base_dir, path)
            return DiscreteMeasure.from_csv(path, sphere(self.dim) if self.is_sphere else None)
        spec = self.raw["sphere"]
        return sphere_grid_measure(int(spec["count"]), int(spec.get("dim", 2)), float(spec.get("kappa", 0.0)),
                                   spec.get("mean"))


@dataclass
class InstanceSpec:
    name: str
    rho: MeasureSpec
    nu: MeasureSpec
    cost: dict
    tau: Optional[float] = None
    setting: Optional[dict] = None

    def build_cost(self):
        return cost_from_config(self.cost)

    def resolved_tau(self):
        """Configured τ, else the closed form for a strongly log-concave ν model"""
        if self.tau is not None:
            return float(self.tau)
        model = self.nu.model()
        if model is not None and model.tag == "strongly-log-concave":
            return 1.0 / model.params["alpha"]
        return None


@dataclass
class ProbeSettings:
    hessian_points: int = 20
    gradient_points: int = 50
    lambda_samples: int = 200
    lambda_margin: float = 1e-3
    kl_pairs: int = 200
    stability_scales: List[float] = field(default_factory=lambda: [1e-4, 1e-3, 1e-2, 1e-1])
    ti_candidates: int = 200

    @classmethod
    def from_dict(cls, data):
        defaults = cls()
        return cls(
            hessian_points=int(data.get("hessian_points", defaults.hessian_points)),
            gradient_points=int(data.get("gradient_points", defaults.gradient_points)),
            lambda_samples=int(data.get("lambda_samples", defaults.lambda_samples)),
            lambda_margin=float(data.get("lambda_margin", defaults.lambda_margin)),
            kl_pairs=int(data.get("kl_pairs", defaults.kl_pairs)),
            stability_scales=[float(s) for s in data.get("stability_scales", defaults.stability_scales)],
            ti_candidates=int(data.get("ti_candidates", defaults.ti_candidates)),
        )


@dataclass
class ExperimentConfig:
    name: str = "experiment"
    seed: int = 0
    output_dir: str = "results"
    epsilons: List[float] = field(default_factory=lambda: [1.0])
    max_iter: int = 100000
    trace_iterations: int = 200
    tolerance: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    checks: List[str] = field(default_factory=list)
    instances: List[InstanceSpec] = field(default_factory=list)
    probes: ProbeSettings = field(default_factory=ProbeSettings)
    gaussian: dict = field(default_factory=lambda: {"draws": 20, "steps": 200})
    polynomial: dict = field(default_factory=lambda: {"draws": 20, "steps": 10000})
    sphere: dict = field(default_factory=lambda: {"delta": 0.9, "pairs": 100})
    exact_1d: dict = field(default_factory=lambda: {"draws": 100, "max_atoms": 12})
    slack: dict = field(default_factory=lambda: {"discretization": 0.05})
    plots: bool = False
    base_dir: str = "."

    @classmethod
    def from_file(cls, path):
        if not os.path.exists(path):
            raise ConfigError(f"config file not found: {path}")
        try:
            with open(path, "r") as f:
                data = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: invalid JSON ({e})")
        config = cls.from_dict(data, base_dir=os.path.dirname(os.path.abspath(path)))
        logger.info(f"Loaded config {config.name!r} from {path}")
        return config

    @classmethod
    def from_dict(cls, data, base_dir="."):
        """Parse and validate; every problem found is reported in one ConfigError"""
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        problems = []

        epsilons = data.get("epsilons", [1.0])
        if not isinstance(epsilons, list) or not epsilons:
            problems.append("epsilons: must be a nonempty list")
            epsilons = []
        elif not all(isinstance(e, (int, float)) and e > 0 for e in epsilons):
            problems.append("epsilons: every value must be positive")

        checks = data.get("checks", [])
        for check in checks:
            if check not in CHECK_IDS:
                problems.append(f"checks: unknown check id {check!r} (expected one of {', '.join(CHECK_IDS)})")

        tolerance = dict(DEFAULT_TOLERANCES)
        for key, value in data.get("tolerance", {}).items():
            if key not in DEFAULT_TOLERANCES:
                problems.append(f"tolerance: unknown key {key!r}")
            elif not (isinstance(value, (int, float)) and value > 0):
                problems.append(f"tolerance.{key}: must be positive")
            else:
                tolerance[key] = float(value)

        instances = []
        for k, raw in enumerate(data.get("instances", [])):
            where = f"instances[{k}]"
            name = raw.get("name", f"instance{k}")
            if "rho" not in raw or "nu" not in raw:
                problems.append(f"{where}: needs 'rho' and 'nu'")
                continue
            rho, nu = MeasureSpec(raw["rho"]), MeasureSpec(raw["nu"])
            problems += rho.validate(f"{where}.rho") + nu.validate(f"{where}.nu")
            cost = raw.get("cost", {"family": "HalfSquaredEuclidean"})
            if isinstance(cost, str):
                cost = {"family": cost}
            if cost.get("family") not in COST_FAMILIES:
                problems.append(f"{where}.cost: unknown family {cost.get('family')!r}")
            else:
                try:
                    cost_from_config(cost)
                except ConfigError as e:
                    problems += [f"{where}.cost: {d}" for d in e.diagnostics]
            setting = raw.get("setting")
            if setting is not None and setting.get("name") not in SETTINGS:
                problems.append(f"{where}.setting: unknown setting {setting.get('name')!r}")
            tau = raw.get("tau")
            if tau is not None and not (isinstance(tau, (int, float)) and tau > 0):
                problems.append(f"{where}.tau: must be positive")
            instances.append(InstanceSpec(name, rho, nu, cost, tau, setting))

        if any(c in CELL_CHECKS for c in checks) and not instances:
            problems.append("instances: per-instance checks need at least one instance")
        names = [inst.name for inst in instances]
        if len(set(names)) != len(names):
            problems.append("instances: names must be unique")

        try:
            seed = int(data.get("seed", 0))
            max_iter = int(data.get("max_iter", 100000))
            trace_iterations = int(data.get("trace_iterations", 200))
            probes = ProbeSettings.from_dict(data.get("probes", {}))
        except (TypeError, ValueError) as e:
            problems.append(f"invalid number: {e}")
            seed, max_iter, trace_iterations, probes = 0, 100000, 200, ProbeSettings()
        if trace_iterations < 1:
            problems.append("trace_iterations: must be positive")

        if problems:
            raise ConfigError(problems)

        defaults = cls()
        return cls(
            name=data.get("name", "experiment"),
            seed=seed,
            output_dir=data.get("output_dir", "results"),
            epsilons=[float(e) for e in epsilons],
            max_iter=max_iter,
            trace_iterations=trace_iterations,
            tolerance=tolerance,
            checks=list(checks),
            instances=instances,
            probes=probes,
            gaussian={**defaults.gaussian, **data.get("gaussian", {})},
            polynomial={**defaults.polynomial, **data.get("polynomial", {})},
            sphere={**defaults.sphere, **data.get("sphere", {})},
            exact_1d={**defaults.exact_1d, **data.get("exact_1d", {})},
            slack={**defaults.slack, **data.get("slack", {})},
            plots=bool(data.get("plots", False)),
            base_dir=base_dir,
        )

    def to_dict(self):
        return {
            "name": self.name,
            "seed": self.seed,
            "output_dir": self.output_dir,
            "epsilons": list(self.epsilons),
            "max_iter": self.max_iter,
            "trace_iterations": self.trace_iterations,
            "tolerance": dict(self.tolerance),
            "checks": list(self.checks),
            "instances": [
                {key: value for key, value in
                 (("name", inst.name), ("rho", inst.rho.raw), ("nu", inst.nu.raw), ("cost", inst.cost),
                  ("tau", inst.tau), ("setting", inst.setting)) if value is not None}
                for inst in self.instances
            ],
            "probes": asdict(self.probes),
            "gaussian": dict(self.gaussian),
            "polynomial": dict(self.polynomial),
            "sphere": dict(self.sphere),
            "exact_1d": dict(self.exact_1d),
            "slack": dict(self.slack),
            "plots": self.plots,
        }

    @property
    def cell_checks(self):
        return [c for c in self.checks if c in CELL_CHECKS]

    @property
    def global_checks(self):
        return [c for c in self.checks if c in GLOBAL_CHECKS]
