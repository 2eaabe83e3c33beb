"""Tests for phase-space linear algebra."""

import numpy as np
import pytest

from gaussian_locality.exceptions import ValidationError
from gaussian_locality.symplectic import (
    CovarianceMatrix,
    GaussianDistribution,
    convolve_gaussians,
    direct_sum,
    gaussian_density,
    gaussian_expectation,
    gaussian_moment,
    is_psd_ordered,
    is_quantum_covariance,
    make_symplectic_form,
    marginal,
    sample_gaussian,
)


class TestSymplecticForm:
    """Tests for make_symplectic_form."""

    def test_single_mode(self):
        """Test the one-mode form."""
        omega = make_symplectic_form(1).matrix
        np.testing.assert_array_equal(omega, [[0.0, 1.0], [-1.0, 0.0]])

    def test_two_modes_block_diagonal(self):
        """Test that two modes give a block-diagonal 4x4 form."""
        omega = make_symplectic_form(2).matrix
        assert omega.shape == (4, 4)
        np.testing.assert_array_equal(omega[:2, 2:], np.zeros((2, 2)))
        np.testing.assert_array_equal(omega @ omega, -np.eye(4))

    def test_zero_modes_rejected(self):
        """Test that zero modes are invalid."""
        with pytest.raises(ValidationError) as exc_info:
            make_symplectic_form(0)

        assert exc_info.value.details["field"] == "modes"


class TestQuantumCovariance:
    """Tests for the uncertainty-principle check."""

    def test_vacuum_is_valid(self):
        """Test that the vacuum passes."""
        assert is_quantum_covariance(np.eye(2))

    def test_half_vacuum_is_invalid(self):
        """Test that 0.5 I violates the uncertainty principle."""
        assert not is_quantum_covariance(0.5 * np.eye(2))

    def test_squeezed_vacuum_is_valid(self):
        """Test a pure single-mode squeezed state."""
        assert is_quantum_covariance(np.diag([4.0, 0.25]))

    def test_asymmetric_rejected(self):
        """Test that a non-symmetric matrix raises."""
        with pytest.raises(ValidationError):
            is_quantum_covariance([[1.0, 0.5], [0.0, 1.0]])

    def test_odd_dimension_rejected(self):
        """Test that odd dimensions are rejected."""
        with pytest.raises(ValidationError):
            is_quantum_covariance(np.eye(3))

    def test_classical_and_quantum_flags(self):
        """Test the CovarianceMatrix validity properties."""
        classical = CovarianceMatrix.identity(1, scale=0.5)
        assert classical.classical_valid
        assert not classical.quantum_valid


class TestOrdering:
    """Tests for V >= A (+) B."""

    def test_identity_dominates_smaller(self):
        """Test that 2I dominates I (+) I."""
        assert is_psd_ordered(2.0 * np.eye(4), np.eye(2), np.eye(2))

    def test_fails_when_too_large(self):
        """Test that I does not dominate 2I (+) 0."""
        assert not is_psd_ordered(np.eye(4), 2.0 * np.eye(2), np.zeros((2, 2)))

    def test_dimension_mismatch(self):
        """Test that mismatched dimensions raise."""
        with pytest.raises(ValidationError):
            is_psd_ordered(np.eye(4), np.eye(2), np.eye(4))

    def test_direct_sum_modes(self):
        """Test the mode count of a direct sum."""
        assert direct_sum(np.eye(2), np.eye(4)).modes == 3


class TestGaussianDensity:
    """Tests for Gaussian density evaluation."""

    def test_standard_normal_at_origin(self):
        """Test the 2-d standard normal peak."""
        g = GaussianDistribution.centered(np.eye(2))
        assert gaussian_density(g, [0.0, 0.0]) == pytest.approx(1.0 / (2.0 * np.pi))

    def test_batched_points(self):
        """Test evaluation at a stack of points."""
        g = GaussianDistribution.centered(np.eye(2))
        values = gaussian_density(g, np.zeros((3, 5, 2)))
        assert values.shape == (3, 5)

    def test_singular_covariance_off_support(self):
        """Test that points off a degenerate support have zero density."""
        g = GaussianDistribution.centered(np.diag([1.0, 0.0]))
        assert gaussian_density(g, [0.0, 0.5]) == 0.0
        assert gaussian_density(g, [0.0, 0.0]) == pytest.approx(1.0 / np.sqrt(2.0 * np.pi))

    def test_wrong_dimension(self):
        """Test that a point of the wrong length raises."""
        g = GaussianDistribution.centered(np.eye(2))
        with pytest.raises(ValidationError):
            gaussian_density(g, [0.0, 0.0, 0.0])

    def test_non_psd_rejected(self):
        """Test that a distribution needs a PSD covariance."""
        with pytest.raises(ValidationError):
            GaussianDistribution.centered(np.diag([1.0, -1.0]))


class TestGaussianOperations:
    """Tests for convolution, marginals and sampling."""

    def test_convolution_adds_moments(self):
        """Test that means and covariances add."""
        g1 = GaussianDistribution(mean=[1.0, 0.0], covariance=np.eye(2))
        g2 = GaussianDistribution(mean=[0.0, 2.0], covariance=np.diag([0.5, 1.5]))
        result = convolve_gaussians(g1, g2)
        np.testing.assert_allclose(result.mean, [1.0, 2.0])
        np.testing.assert_allclose(result.covariance.matrix, np.diag([1.5, 2.5]))

    def test_marginal(self):
        """Test the marginal of the second mode."""
        cov = np.diag([1.0, 2.0, 3.0, 4.0])
        g = GaussianDistribution(mean=[0.0, 1.0, 2.0, 3.0], covariance=cov)
        second = marginal(g, 1)
        np.testing.assert_allclose(second.mean, [2.0, 3.0])
        np.testing.assert_allclose(second.covariance.matrix, np.diag([3.0, 4.0]))

    def test_sampling_is_deterministic(self):
        """Test that the same seed gives the same draws."""
        g = GaussianDistribution.centered([[2.0, 0.5], [0.5, 1.0]])
        np.testing.assert_array_equal(sample_gaussian(g, 5, 10), sample_gaussian(g, 5, 10))

    def test_sample_covariance(self):
        """Test that sampled moments approach the target."""
        cov = np.array([[2.0, 0.5], [0.5, 1.0]])
        g = GaussianDistribution(mean=[1.0, -1.0], covariance=cov)
        samples = sample_gaussian(g, 3, 200_000)
        np.testing.assert_allclose(samples.mean(axis=0), [1.0, -1.0], atol=0.02)
        np.testing.assert_allclose(np.cov(samples.T), cov, atol=0.03)

    def test_degenerate_sampling_stays_on_support(self):
        """Test that a zero-variance direction is pinned to the mean."""
        g = GaussianDistribution(mean=[0.0, 3.0], covariance=np.diag([1.0, 0.0]))
        samples = sample_gaussian(g, 1, 100)
        np.testing.assert_allclose(samples[:, 1], 3.0)


class TestGaussianMoments:
    """Tests for polynomial expectations."""

    def test_second_moment(self):
        """Test E[x^2] = m^2 + C."""
        assert gaussian_moment([1.5], [[2.0]], (2,)) == pytest.approx(1.5**2 + 2.0)

    def test_fourth_moment(self):
        """Test E[x^4] = 3 sigma^4 for a centred normal."""
        assert gaussian_moment([0.0], [[2.0]], (4,)) == pytest.approx(12.0)

    def test_isserlis_cross_moment(self):
        """Test E[x^2 y^2] = C_xx C_yy + 2 C_xy^2."""
        cov = np.array([[1.0, 0.3], [0.3, 2.0]])
        assert gaussian_moment([0.0, 0.0], cov, (2, 2)) == pytest.approx(2.0 + 2 * 0.09)

    def test_batched_means(self):
        """Test that leading batch axes on the mean are preserved."""
        means = np.array([[0.0, 0.0], [1.0, 2.0]])
        values = gaussian_expectation(means, np.eye(2), {(1, 1): 1.0, (0, 0): 1.0})
        np.testing.assert_allclose(values, [1.0, 3.0])
