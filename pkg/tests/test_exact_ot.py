import numpy as np
import pytest

from costs.gauges import SquaredDistance, lpa_gauge
from measures.discrete_measure import DiscreteMeasure
from measures.grids import build_grid_measure
from measures.models import gaussian_model
from transport import exact_ot
from transport.exact_ot import exact_transport, monotone_coupling_1d, w2_squared, w_omega
from transport.inequalities import ti_probe
from utils.errors import ProblemSizeError


class TestNetworkSimplex:
    def test_duality_gap_and_marginals(self, gaussian_2d, shifted_gaussian_2d):
        value, result = w2_squared(gaussian_2d, shifted_gaussian_2d, method="lp")
        assert value > 0
        assert result.duality_gap <= 1e-9
        assert result.row_error(gaussian_2d.weights) <= 1e-12
        assert result.col_error(shifted_gaussian_2d.weights) <= 1e-12

    def test_translation(self):
        points = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        mu = DiscreteMeasure(points, [0.2, 0.3, 0.5])
        nu = DiscreteMeasure(points + [0.3, -0.4], [0.2, 0.3, 0.5])
        assert w2_squared(mu, nu, method="lp")[0] == pytest.approx(0.25)

    def test_identity_has_zero_cost(self, gaussian_2d):
        assert w2_squared(gaussian_2d, gaussian_2d, method="lp")[0] == pytest.approx(0.0, abs=1e-14)

    def test_size_limit(self, monkeypatch, gaussian_2d):
        monkeypatch.setattr(exact_ot, "MAX_PAIRS", 100)
        with pytest.raises(ProblemSizeError, match="subsample"):
            w2_squared(gaussian_2d, gaussian_2d)

    def test_custom_cost_matrix(self):
        M = np.array([[0.0, 1.0], [1.0, 0.0]])
        result = exact_transport([0.5, 0.5], [0.5, 0.5], M)
        assert result.objective == pytest.approx(0.0)
        np.testing.assert_allclose(result.coupling, 0.5 * np.eye(2))


class TestMonotoneCoupling:
    def test_agrees_with_linear_program(self, gaussian_1d, shifted_gaussian_1d):
        monotone, plan = w2_squared(gaussian_1d, shifted_gaussian_1d, method="monotone")
        lp, _ = w2_squared(gaussian_1d, shifted_gaussian_1d, method="lp")
        assert abs(monotone - lp) <= 1e-10
        assert plan.method == "monotone"
        assert plan.row_error(gaussian_1d.weights) <= 1e-12
        assert plan.col_error(shifted_gaussian_1d.weights) <= 1e-12

    def test_auto_uses_monotone_on_the_line(self, gaussian_1d, shifted_gaussian_1d):
        assert w2_squared(gaussian_1d, shifted_gaussian_1d)[1].method == "monotone"

    def test_unsorted_atoms(self):
        mu = DiscreteMeasure([[2.0], [0.0], [1.0]], [0.2, 0.5, 0.3])
        nu = DiscreteMeasure([[1.5], [-1.0]], [0.6, 0.4])
        value = monotone_coupling_1d(mu, nu).objective
        assert value == pytest.approx(w2_squared(mu, nu, method="lp")[0], abs=1e-12)

    def test_rejects_plane(self, gaussian_2d):
        with pytest.raises(ValueError, match="real line"):
            monotone_coupling_1d(gaussian_2d, gaussian_2d)


class TestGaugeTransport:
    def test_squared_distance_gauge_is_w2(self, gaussian_2d, shifted_gaussian_2d):
        value, _ = w_omega(gaussian_2d, shifted_gaussian_2d, SquaredDistance(gaussian_2d.geometry))
        assert value == pytest.approx(w2_squared(gaussian_2d, shifted_gaussian_2d, method="lp")[0], rel=1e-10)

    def test_lpa_gauge_is_cheaper(self):
        mu = DiscreteMeasure([[0.0]], [1.0])
        nu = DiscreteMeasure([[5.0]], [1.0])
        value, result = w_omega(mu, nu, lpa_gauge(1.5, 1.0, mu.geometry))
        assert value < 12.5
        assert result.cost_kind.startswith("omega(")

    def test_negative_gauge_rejected(self, gaussian_1d):
        with pytest.raises(ValueError, match="nonnegative"):
            w_omega(gaussian_1d, gaussian_1d, lambda y, z: -1.0)


class TestTransportInequalityProbe:
    @pytest.fixture(scope="class")
    def standard_gaussian(self):
        return build_grid_measure(gaussian_model(1.0, 1), [[-3.0, 3.0]], 21)

    def test_generous_constant_not_falsified(self, standard_gaussian):
        report = ti_probe(standard_gaussian, 2.0, candidate_count=30, rng_seed=3)
        assert report.max_violation <= 1e-12
        assert report.candidate_count == 30

    def test_small_constant_is_falsified(self, standard_gaussian):
        report = ti_probe(standard_gaussian, 0.01, candidate_count=30, rng_seed=3)
        assert report.max_violation > 0
        assert report.worst_family in ("reweight", "tilt", "bump")

    def test_gamma_form_needs_exponent(self, standard_gaussian):
        with pytest.raises(ValueError, match="γ > 0"):
            ti_probe(standard_gaussian, 1.0, form="gamma")
