"""Import smoke test of every package"""
import importlib

import pytest

MODULES = [
    "measures.discrete_measure", "measures.models", "measures.grids", "measures.profiles",
    "costs.geometry", "costs.cost_models", "costs.gauges",
    "transport.plans", "transport.divergences", "transport.sinkhorn", "transport.trace",
    "transport.exact_ot", "transport.inequalities",
    "diagnostics.conditionals", "diagnostics.semiconcavity", "diagnostics.identities",
    "diagnostics.stability",
    "theory.rates", "theory.gaussian", "theory.bounds",
    "experiments.config", "experiments.checks", "experiments.runner", "experiments.reporting",
    "utils.logger", "utils.errors", "utils.io", "utils.linalg", "utils.finite_diff", "utils.plotting",
    "app",
]


@pytest.mark.parametrize("name", MODULES)
def test_module_imports(name):
    assert importlib.import_module(name) is not None


@pytest.mark.parametrize("package", ["measures", "costs", "transport", "diagnostics", "theory", "experiments"])
def test_package_exports_resolve(package):
    module = importlib.import_module(package)
    for name in module.__all__:
        assert hasattr(module, name), f"{package}.{name}"
