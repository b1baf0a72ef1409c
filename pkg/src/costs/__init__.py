"""Cost families, geometries and transport gauges"""
from .geometry import Geometry, euclidean, sphere, sphere_exp
from .cost_models import (
    CostModel, HalfSquaredEuclidean, AnisotropicQuadratic, SubspaceElastic, STVS, PCost,
    SphereRegular, SphereDelta, cost_eval, cost_grad2, cost_hess2, stvs_eval, cost_from_config,
)
from .gauges import omega_lpa, SquaredDistance, RadialGauge, lpa_gauge

__all__ = [
    'Geometry', 'euclidean', 'sphere', 'sphere_exp',
    'CostModel', 'HalfSquaredEuclidean', 'AnisotropicQuadratic', 'SubspaceElastic', 'STVS', 'PCost',
    'SphereRegular', 'SphereDelta', 'cost_eval', 'cost_grad2', 'cost_hess2', 'stvs_eval',
    'cost_from_config', 'omega_lpa', 'SquaredDistance', 'RadialGauge', 'lpa_gauge',
]
