"""Discrete measures, log-density models and their characterizations"""
from .discrete_measure import DiscreteMeasure
from .models import (
    LogDensityModel, gaussian_model, uniform_model, weakly_log_concave_model, double_well_model,
    light_tail_model, heavy_rho_model, heavy_nu_model, ti_constant, model_from_config,
)
from .grids import build_grid_measure, grid_points, sphere_grid_measure
from .profiles import convexity_profile, f_weak, weak_concavity_check

__all__ = [
    'DiscreteMeasure', 'LogDensityModel', 'gaussian_model', 'uniform_model',
    'weakly_log_concave_model', 'double_well_model', 'light_tail_model', 'heavy_rho_model',
    'heavy_nu_model', 'ti_constant', 'model_from_config', 'build_grid_measure', 'grid_points',
    'sphere_grid_measure', 'convexity_profile', 'f_weak', 'weak_concavity_check',
]
