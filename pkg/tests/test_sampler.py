"""Tests for the hidden-variable simulation."""

import numpy as np
import pytest

from gaussian_locality.certifier import certify_isotropic, certify_separable, click_families, region_condition
from gaussian_locality.chsh import optimize_chsh
from gaussian_locality.config import OptimizerConfig, SamplerConfig
from gaussian_locality.exceptions import CertificateError, ValidationError
from gaussian_locality.models import LOCAL_BOUND, TmssParameters
from gaussian_locality.sampler import PartyResponse, build_lhv_model, simulate
from gaussian_locality.states import lossy_tmss


EPSILON = 0.02


@pytest.fixture
def local_model(local_state, families_a, families_b):
    """Model built from the isotropic certificate at eta=0.1, nu=1.05."""
    certificate = certify_isotropic(local_state, families_a, families_b)
    return build_lhv_model(certificate, local_state, families_a, families_b)


class TestPartyResponse:
    """Tests for local response functions."""

    def test_rows_are_distributions(self, local_model, rng):
        """Test that responses are normalised and nonnegative."""
        points = rng.normal(size=(500, 2))
        for setting in range(2):
            values = local_model.response_a.probabilities(setting, points)
            assert values.shape == (500, 2)
            np.testing.assert_allclose(values.sum(axis=1), 1.0)
            assert values.min() >= 0.0

    def test_isotropic_noise_is_preconvolved(self, local_model):
        """Test that isotropic splittings need no pointwise convolution."""
        assert local_model.response_a.gamma is None

    def test_anisotropic_noise_kept(self, families_a):
        """Test that anisotropic splittings are evaluated pointwise."""
        response = PartyResponse.smoothed(families_a, np.diag([1.5, 1.2]), 1e-9)
        assert response.gamma is not None
        values = response.probabilities(0, np.zeros((3, 2)))
        np.testing.assert_allclose(values.sum(axis=1), 1.0)

    def test_negative_response_raises(self):
        """Test that noise below the threshold is caught."""
        response = PartyResponse.smoothed(click_families(0.0, [0.0, 0.5]), 0.9 * np.eye(2), 1e-9)
        with pytest.raises(CertificateError) as exc_info:
            response.probabilities(0, np.zeros((1, 2)))

        assert exc_info.value.details["reason"] == "negative_response"


class TestBuildModel:
    """Tests for build_lhv_model."""

    def test_hidden_covariance_is_omega(self, local_state, local_model):
        """Test that the hidden variable carries the certificate's omega."""
        certificate = certify_isotropic(
            local_state, list(local_model.families_a), list(local_model.families_b)
        )
        np.testing.assert_allclose(local_model.hidden.covariance.matrix, certificate.omega.matrix)

    def test_wrong_state(self, local_state, violating_state, families_a, families_b):
        """Test that a certificate is not applied to another state."""
        certificate = certify_isotropic(local_state, families_a, families_b)
        with pytest.raises(CertificateError):
            build_lhv_model(certificate, violating_state, families_a, families_b)

    def test_target_table_normalised(self, local_model):
        """Test the Born-rule target rows."""
        np.testing.assert_allclose(local_model.target_table().sum(axis=1), 1.0, atol=1e-9)


class TestSimulate:
    """Tests for simulate."""

    def test_matches_born_rule(self, local_model, settings):
        """Test that sampled frequencies agree with the targets."""
        report = simulate(local_model, settings.sampler.samples, settings.sampler.seed, settings.sampler)
        assert report.counts.sum(axis=1).tolist() == [20_000] * 4
        assert report.max_abs_z < 5.0
        assert report.max_abs_deviation < 0.02

    def test_seed_reproducible(self, local_model):
        """Test that equal seeds give equal counts."""
        sampler = SamplerConfig(chunk_size=1_000, max_workers=1)
        first = simulate(local_model, 3_000, 5, sampler)
        second = simulate(local_model, 3_000, 5, sampler)
        np.testing.assert_array_equal(first.counts, second.counts)

    def test_independent_of_workers(self, local_model):
        """Test that threading does not change the counts."""
        serial = simulate(local_model, 4_500, 3, SamplerConfig(chunk_size=1_000, max_workers=1))
        threaded = simulate(local_model, 4_500, 3, SamplerConfig(chunk_size=1_000, max_workers=4))
        np.testing.assert_array_equal(serial.counts, threaded.counts)

    def test_separable_certificate(self, vacuum):
        """Test a universal certificate on the vacuum."""
        families = click_families(0.02, [0.3, -0.6])
        model = build_lhv_model(certify_separable(vacuum), vacuum, families, families)
        report = simulate(model, 5_000, 1, SamplerConfig(chunk_size=5_000))
        assert report.max_abs_z < 5.0

    def test_needs_two_settings(self, local_state):
        """Test that a single setting per party is rejected."""
        families = click_families(0.02, [0.1])
        certificate = certify_isotropic(local_state, families, families)
        model = build_lhv_model(certificate, local_state, families, families)
        with pytest.raises(ValidationError):
            simulate(model, 10, 0)

    def test_zero_samples(self, local_model):
        """Test that zero trials are rejected."""
        with pytest.raises(ValidationError):
            simulate(local_model, 0, 0)

    def test_report_json(self, local_model):
        """Test the report document and its CHSH estimate."""
        report = simulate(local_model, 2_000, 9, SamplerConfig(chunk_size=2_000))
        data = report.to_json_dict()
        assert data["samples"] == 2_000
        assert len(data["z_scores"]) == 4
        assert data["target_S"] <= 2.0

    @pytest.mark.slow
    @pytest.mark.parametrize("eta,nu", [(0.05, 1.05), (0.1, 1.05), (0.08, 1.1)])
    def test_million_trials(self, eta, nu, families_a, families_b):
        """Test one million trials at certified points of the region map."""
        state = lossy_tmss(TmssParameters(eta=eta, nu=nu))
        certificate = certify_isotropic(state, families_a, families_b)
        assert certificate is not None
        model = build_lhv_model(certificate, state, families_a, families_b)
        report = simulate(model, 1_000_000, 7, SamplerConfig(max_workers=4))
        assert report.max_abs_z < 5.0
        value, error = report.empirical_chsh()
        assert abs(value - report.target_chsh()) < 5.0 * error


class TestCertifiedRegionIsLocal:
    """Optimised quantum CHSH values inside the certified region."""

    @pytest.mark.parametrize("eta,nu", [(0.05, 1.05), (0.1, 1.05), (0.08, 1.1), (0.2, 1.02)])
    def test_optimum_within_local_bound(self, eta, nu):
        """Test that no symmetric displacement pair beats S = 2 at a certified point."""
        assert region_condition(eta, nu, EPSILON)
        _, evaluation = optimize_chsh(
            lossy_tmss(TmssParameters(eta=eta, nu=nu)), EPSILON, optimizer=OptimizerConfig(grid_step=0.1, budget=40)
        )
        assert evaluation.S <= LOCAL_BOUND + 1e-9
