import numpy as np
import pytest

from costs.geometry import euclidean, sphere
from measures.discrete_measure import DiscreteMeasure
from measures.grids import build_grid_measure, grid_points, sphere_grid_measure
from measures.models import (
    double_well_model, gaussian_model, light_tail_model, model_from_config, ti_constant, uniform_model,
    weakly_log_concave_model,
)
from measures.profiles import convexity_profile, f_weak, weak_concavity_check
from utils.errors import ConfigError, MeasureError


class TestDiscreteMeasure:
    def test_weights_are_normalized(self):
        mu = DiscreteMeasure([[0.0], [1.0], [2.0]], [1.0, 2.0, 1.0])
        np.testing.assert_allclose(mu.weights, [0.25, 0.5, 0.25])
        np.testing.assert_allclose(np.exp(mu.log_weights), mu.weights)

    def test_zero_weights_are_dropped_unless_kept(self):
        points = [[0.0], [1.0], [2.0]]
        assert len(DiscreteMeasure(points, [1.0, 0.0, 1.0])) == 2
        assert len(DiscreteMeasure(points, [1.0, 0.0, 1.0], drop_zero=False)) == 3

    def test_empty_support_raises(self):
        with pytest.raises(MeasureError, match="empty support"):
            DiscreteMeasure([[0.0], [1.0]], [0.0, 0.0])

    def test_negative_weights_raise(self):
        with pytest.raises(MeasureError, match="nonnegative"):
            DiscreteMeasure([[0.0], [1.0]], [1.0, -1.0])

    def test_sphere_points_must_be_unit(self):
        with pytest.raises(MeasureError, match="unit norm"):
            DiscreteMeasure([[1.0, 1.0]], [1.0], sphere(1))

    def test_from_log_weights_matches_direct(self):
        log_w = np.log([0.2, 0.3, 0.5]) + 7.0
        mu = DiscreteMeasure.from_log_weights([[0.0], [1.0], [3.0]], log_w)
        np.testing.assert_allclose(mu.weights, [0.2, 0.3, 0.5])

    def test_moments(self):
        mu = DiscreteMeasure([[-1.0, 0.0], [1.0, 0.0], [0.0, 2.0], [0.0, -2.0]], np.ones(4))
        np.testing.assert_allclose(mu.mean(), [0.0, 0.0], atol=1e-15)
        np.testing.assert_allclose(mu.covariance(), np.diag([0.5, 2.0]))

    def test_total_variation(self):
        a = DiscreteMeasure([[0.0], [1.0]], [0.5, 0.5])
        b = DiscreteMeasure([[0.0], [1.0]], [0.25, 0.75])
        assert a.total_variation(b) == pytest.approx(0.25)
        with pytest.raises(MeasureError):
            a.total_variation(DiscreteMeasure([[0.0], [2.0]], [0.5, 0.5]))

    def test_index_in(self):
        nu = DiscreteMeasure([[0.0], [1.0], [2.0]], np.ones(3))
        mu = DiscreteMeasure([[2.0], [5.0]], [0.5, 0.5])
        np.testing.assert_array_equal(mu.index_in(nu), [2, -1])

    def test_csv_round_trip(self, tmp_path):
        mu = DiscreteMeasure([[0.0, 1.0], [2.0, -1.0]], [0.25, 0.75])
        path = mu.to_csv(tmp_path / "mu.csv")
        back = DiscreteMeasure.from_csv(path)
        np.testing.assert_array_equal(back.points, mu.points)
        np.testing.assert_allclose(back.weights, mu.weights, rtol=1e-14)

    def test_dirac_and_uniform(self):
        assert len(DiscreteMeasure.dirac([1.0, 2.0])) == 1
        np.testing.assert_allclose(DiscreteMeasure.uniform([[0.0], [1.0]]).weights, [0.5, 0.5])


class TestGrids:
    def test_grid_points_order_and_size(self):
        points = grid_points([[0.0, 1.0], [0.0, 2.0]], [2, 3])
        assert points.shape == (6, 2)
        np.testing.assert_allclose(points[:3, 0], 0.0)
        np.testing.assert_allclose(points[:3, 1], [0.0, 1.0, 2.0])

    def test_grid_weights_follow_density(self):
        mu = build_grid_measure(gaussian_model(2.0, 1), [[-1.0, 1.0]], 3)
        np.testing.assert_allclose(mu.weights[0] / mu.weights[1], np.exp(-1.0))
        assert mu.geometry == euclidean(1)

    def test_degenerate_box_raises(self):
        with pytest.raises(ValueError, match="non-degenerate"):
            grid_points([[1.0, 1.0]], 4)

    def test_sphere_grid(self):
        mu = sphere_grid_measure(50, dim=2, kappa=2.0)
        np.testing.assert_allclose(np.linalg.norm(mu.points, axis=1), 1.0, atol=1e-14)
        assert mu.geometry == sphere(2)
        # von Mises–Fisher weights peak towards the default mean, the north pole
        assert mu.points[np.argmax(mu.weights), 2] > 0.9

    def test_uniform_circle(self):
        mu = sphere_grid_measure(12, dim=1)
        np.testing.assert_allclose(mu.weights, 1.0 / 12)


class TestModels:
    def test_ti_constant(self):
        assert ti_constant(gaussian_model(4.0, 2)) == pytest.approx(0.25)
        with pytest.raises(ValueError, match="no closed-form"):
            ti_constant(uniform_model(1))

    def test_light_tail_hessian_lower_bound(self, rng):
        C, delta = 1.5, 1.0
        model = light_tail_model(C, delta, 2)
        x = rng.normal(scale=2.0, size=(100, 2))
        lowest = np.linalg.eigvalsh(model.hessian(x))[:, 0]
        assert np.all(lowest >= C * np.linalg.norm(x, axis=1) ** delta - 1e-12)

    def test_model_from_config(self):
        model = model_from_config({"type": "gaussian", "alpha": 2.0}, 3)
        assert model.tag == "strongly-log-concave"
        assert model.params["alpha"] == 2.0
        with pytest.raises(ConfigError, match="unknown model type"):
            model_from_config({"type": "cauchy"}, 1)

    def test_weakly_log_concave_parameters(self):
        model = weakly_log_concave_model(lambda x: 0.5 * np.sum(x * x, axis=-1), lambda x: x, 1.0, 0.5)
        assert model.tag == "weakly-log-concave"
        assert model.params == {"alpha": 1.0, "L": 0.5}
        with pytest.raises(ValueError, match="L ≥ 0"):
            weakly_log_concave_model(lambda x: x, lambda x: x, 1.0, -1.0)


class TestProfiles:
    @pytest.mark.parametrize("r", [0.5, 1.0, 2.0])
    def test_double_well_profile(self, r):
        [(radius, kappa)] = convexity_profile(double_well_model(1.0, 1), [r], sample_count=4000)
        assert radius == r
        assert kappa >= r ** 2 - 2.0 - 1e-9
        assert kappa == pytest.approx(r ** 2 - 2.0, abs=1e-3)

    def test_gaussian_is_alpha_convex(self):
        margin = weak_concavity_check(gaussian_model(2.0, 2), 2.0, 0.0, [0.5, 1.0, 3.0])
        assert margin == pytest.approx(0.0, abs=1e-10)

    def test_wrong_alpha_is_falsified(self):
        assert weak_concavity_check(gaussian_model(1.0, 1), 1.5, 0.0, [1.0]) < 0

    def test_f_weak(self):
        assert float(f_weak(2.0, 0.0)) == 0.0
        assert float(f_weak(1.0, 4.0)) == pytest.approx(4.0 * np.tanh(1.0))
        with pytest.raises(ValueError):
            f_weak(1.0, -1.0)
