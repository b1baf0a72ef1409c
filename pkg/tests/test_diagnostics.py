import numpy as np
import pytest

from costs.cost_models import SphereRegular
from costs.gauges import SquaredDistance
from diagnostics.conditionals import (
    conditional_at_point, conditional_given_y, gradient_identity_residual, hessian_identity_residual,
    weighted_mean_cov,
)
from diagnostics.identities import IdentityRecorder, entropy_difference_identity, gauge_invariance_gap
from diagnostics.semiconcavity import ProbeSpec, conditional_kl_check, estimate_lambda, semiconcavity_profile_check
from diagnostics.stability import (
    PERTURBATION_KINDS, heavy_tail_decay_fit, perturbation_family, perturbation_with_kl, stability_gap,
)
from measures.discrete_measure import DiscreteMeasure
from measures.grids import sphere_grid_measure
from transport.divergences import kl
from transport.sinkhorn import init_state, plan, sinkhorn_step, solve_reference
from transport.trace import SinkhornTrace, TraceRow, run_sinkhorn
from utils.errors import ProbeError, RunMismatchError

INTERIOR_BOX = [[-1.5, 1.5], [-1.5, 1.5]]


@pytest.fixture(scope="module")
def sphere_reference():
    rho = sphere_grid_measure(60, dim=2, kappa=1.0)
    nu = sphere_grid_measure(60, dim=2, kappa=2.0, mean=[1.0, 0.0, 0.0])
    return solve_reference(rho, nu, SphereRegular(), 1.0)


class TestConditionals:
    def test_conditional_is_normalized_plan_column(self, reference_2d):
        weights = plan(reference_2d).weights
        for j in (0, 17, 40):
            column = weights[:, j] / weights[:, j].sum()
            np.testing.assert_allclose(conditional_given_y(reference_2d, j).weights, column, atol=1e-14)

    def test_conditional_at_atom_matches_index(self, reference_2d):
        y = reference_2d.nu.points[5]
        np.testing.assert_allclose(conditional_at_point(reference_2d, y).weights,
                                   conditional_given_y(reference_2d, 5).weights, atol=1e-14)

    def test_index_out_of_range(self, reference_2d):
        with pytest.raises(IndexError):
            conditional_given_y(reference_2d, len(reference_2d.nu))

    def test_weighted_mean_cov(self, rng):
        values = rng.normal(size=(30, 2))
        weights = rng.uniform(0.1, 1.0, 30)
        mean, cov = weighted_mean_cov(weights, values)
        np.testing.assert_allclose(mean, np.average(values, axis=0, weights=weights))
        np.testing.assert_allclose(cov, np.cov(values.T, aweights=weights, bias=True), atol=1e-14)


class TestDerivativeIdentities:
    @pytest.mark.parametrize("y", [[0.2, -0.1], [1.0, 0.7], [-1.2, 0.4]])
    def test_gradient_identity(self, reference_2d, y):
        assert gradient_identity_residual(reference_2d, np.array(y), box=INTERIOR_BOX) <= 1e-6

    @pytest.mark.parametrize("y", [[0.2, -0.1], [1.0, 0.7]])
    def test_hessian_identity(self, reference_2d, y):
        residual = hessian_identity_residual(reference_2d, np.array(y), box=INTERIOR_BOX)
        assert np.linalg.norm(residual, 2) <= 1e-4

    def test_stencil_leaving_box(self, reference_2d):
        with pytest.raises(ProbeError, match="boundary"):
            hessian_identity_residual(reference_2d, np.array([1.5, 0.0]), box=INTERIOR_BOX)

    def test_identities_on_the_sphere(self, sphere_reference, rng):
        geometry = sphere_reference.nu.geometry
        for y in geometry.random_points(rng, 5):
            assert gradient_identity_residual(sphere_reference, y, fd_step=1e-5) <= 1e-6
            assert np.linalg.norm(hessian_identity_residual(sphere_reference, y), 2) <= 1e-4


class TestSemiconcavity:
    def test_quadratic_cost_estimate_is_positive(self, reference_2d):
        estimate = estimate_lambda(reference_2d, ProbeSpec(samples=40, box=INTERIOR_BOX, rng_seed=5))
        assert 0.0 < estimate.lambda_hat < np.inf
        assert estimate.probe_count == 40
        assert estimate.mode == "hessian-sup"

    def test_seed_determinism(self, reference_2d):
        spec = ProbeSpec(samples=20, box=INTERIOR_BOX, rng_seed=11)
        assert estimate_lambda(reference_2d, spec).lambda_hat == estimate_lambda(reference_2d, spec).lambda_hat

    def test_definition_probe(self, reference_2d):
        spec = ProbeSpec(samples=40, box=INTERIOR_BOX, rng_seed=5, mode="definition-probe", max_radius=0.5)
        estimate = estimate_lambda(reference_2d, spec)
        assert np.isfinite(estimate.lambda_hat)
        assert estimate.worst_triple is not None

    def test_squared_distance_gauge_reproduces_definition_probe(self, reference_2d):
        spec = ProbeSpec(samples=40, box=INTERIOR_BOX, rng_seed=5, mode="definition-probe", max_radius=0.5)
        plain = estimate_lambda(reference_2d, spec)
        gauged = semiconcavity_profile_check(reference_2d, SquaredDistance(reference_2d.nu.geometry), spec)
        assert gauged.lambda_hat == pytest.approx(plain.lambda_hat, rel=1e-9, abs=1e-12)
        assert gauged.gauge == "squared-distance"

    def test_bad_probe_spec(self):
        with pytest.raises(ValueError, match="probe mode"):
            ProbeSpec(mode="grid")

    def test_conditional_kl_bound(self, reference_2d):
        lam = estimate_lambda(reference_2d, ProbeSpec(samples=40, rng_seed=5)).lambda_hat
        assert conditional_kl_check(reference_2d, 10.0 * lam + 1.0, pair_count=50, rng_seed=2) <= 1e-12
        assert conditional_kl_check(reference_2d, 0.0, pair_count=50, rng_seed=2) > 0


class TestIdentities:
    def test_recorder_on_a_run(self, gaussian_2d, shifted_gaussian_2d, quadratic, reference_2d):
        recorder = IdentityRecorder(reference_2d)
        run_sinkhorn(gaussian_2d, shifted_gaussian_2d, quadratic, 1.0, 15, reference=reference_2d,
                     observers=[recorder])
        summary = recorder.summary()
        assert summary["steps"] == 15
        assert summary["identity"] <= 1e-10
        assert summary["crosscheck"] <= 1e-10
        assert summary["marginal"] <= 1e-12

    def test_non_consecutive_states(self, gaussian_2d, shifted_gaussian_2d, quadratic, reference_2d):
        state = sinkhorn_step(init_state(gaussian_2d, shifted_gaussian_2d, quadratic, 1.0))
        later = sinkhorn_step(sinkhorn_step(state))
        with pytest.raises(RunMismatchError):
            entropy_difference_identity(state, later, reference_2d)

    def test_gauge_invariance(self, gaussian_2d, shifted_gaussian_2d, quadratic):
        assert gauge_invariance_gap(gaussian_2d, shifted_gaussian_2d, quadratic, 1.0, 5.0) <= 1e-12


class TestStability:
    def test_zero_scale_is_identity(self, shifted_gaussian_1d):
        mu = perturbation_family(shifted_gaussian_1d, "bump", 0.0, rng_seed=2)
        np.testing.assert_allclose(mu.weights, shifted_gaussian_1d.weights, rtol=1e-12)

    def test_unknown_kind(self, shifted_gaussian_1d):
        with pytest.raises(ValueError, match="unknown perturbation kind"):
            perturbation_family(shifted_gaussian_1d, "shear", 0.1)

    @pytest.mark.parametrize("kind", PERTURBATION_KINDS)
    def test_perturbation_reaches_target_kl(self, shifted_gaussian_1d, kind):
        mu, scale = perturbation_with_kl(shifted_gaussian_1d, kind, 0.05, rng_seed=4)
        assert scale > 0
        assert mu.same_support(shifted_gaussian_1d)
        assert kl(mu, shifted_gaussian_1d) == pytest.approx(0.05, rel=1e-8)

    def test_bound_holds_and_dominates_marginal_kl(self, gaussian_1d, shifted_gaussian_1d, quadratic,
                                                   reference_1d):
        mu, _ = perturbation_with_kl(shifted_gaussian_1d, "linear-tilt", 0.05, rng_seed=1)
        lam = estimate_lambda(reference_1d, ProbeSpec(samples=40, rng_seed=3)).lambda_hat
        report = stability_gap(gaussian_1d, shifted_gaussian_1d, mu, quadratic, 0.5, 10.0 * lam + 1.0,
                               reference_nu=reference_1d)
        assert report.references_converged
        assert report.kl_plans >= report.kl_marginals - 1e-10
        assert report.slack >= -1e-9

    def test_foreign_atoms_give_infinite_slack(self, gaussian_1d, shifted_gaussian_1d, quadratic, reference_1d):
        mu = DiscreteMeasure([[10.0]], [1.0])
        report = stability_gap(gaussian_1d, shifted_gaussian_1d, mu, quadratic, 0.5, 1.0,
                               reference_nu=reference_1d)
        assert not report.absolutely_continuous
        assert report.slack == np.inf


class TestDecayFit:
    def _trace(self, values):
        rows = [TraceRow(n, v, v, 0.0, 0.0, 0.0) for n, v in enumerate(values)]
        return SinkhornTrace(1.0, None, rows)

    def test_geometric_decay(self):
        fit = heavy_tail_decay_fit(self._trace(np.exp(-0.5 * np.arange(40))))
        assert fit.slope == pytest.approx(-0.5)
        assert fit.r_squared == pytest.approx(1.0)
        assert fit.geometric
        assert fit.points == 28

    def test_floor_leaves_too_few_points(self):
        fit = heavy_tail_decay_fit(self._trace([1.0, 1e-3, 1e-13, 1e-14, 1e-15, 1e-16]))
        assert np.isnan(fit.slope)
