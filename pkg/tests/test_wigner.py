"""Tests for Wigner forms of click detectors."""

import numpy as np
import pytest

from gaussian_locality.exceptions import ValidationError
from gaussian_locality.wigner import (
    IDENTITY_VALUE,
    GridSpec,
    WignerForm,
    WignerTerm,
    convolve_general,
    convolve_isotropic,
    evaluate_convolved,
    make_click_povm,
    minimum_of_convolved,
    minimum_of_form,
    noise_threshold,
    positivity_threshold,
    wigner_fock0,
    wigner_fock1,
    wigner_identity,
)


def click_minus(epsilon: float, alpha: complex = 0.0) -> WignerForm:
    return make_click_povm(epsilon, alpha).element(-1)


def smoothed_click(epsilon: float, t: float, x: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Closed form of the click element at alpha=0 smoothed by t I."""
    r2 = x**2 + p**2
    s = 1.0 + t
    return IDENTITY_VALUE - ((s**2 + epsilon * (r2 - 2.0 * s)) / (2.0 * np.pi * s**3)) * np.exp(-r2 / (2.0 * s))


class TestBasisForms:
    """Tests for identity and Fock projector forms."""

    def test_values_at_origin(self):
        """Test the peaks of the three basis forms."""
        assert wigner_identity()((0.0, 0.0)) == pytest.approx(1.0 / (4.0 * np.pi))
        assert wigner_fock0()((0.0, 0.0)) == pytest.approx(1.0 / (2.0 * np.pi))
        assert wigner_fock1()((0.0, 0.0)) == pytest.approx(-1.0 / (2.0 * np.pi))

    def test_fock_forms_decay(self):
        """Test that the Fock forms vanish far from the origin."""
        assert abs(wigner_fock1()((12.0, 0.0))) < 1e-20

    def test_trace_normalisation(self):
        """Test that each projector has unit trace, Tr[A] = 4 pi * integral of W_A * W_I."""
        assert wigner_fock0().gaussian_integral() == pytest.approx(1.0)
        assert wigner_fock1().gaussian_integral() == pytest.approx(1.0)

    def test_bad_point_shape(self):
        """Test that points need a trailing dimension of 2."""
        with pytest.raises(ValidationError):
            wigner_fock0()(np.zeros(3))

    def test_polynomial_degree_limit(self):
        """Test that cubic polynomials are rejected."""
        with pytest.raises(ValueError):
            WignerTerm(coefficient=1.0, polynomial={(3, 0): 1.0})


class TestClickPovm:
    """Tests for make_click_povm."""

    def test_noiseless_no_click_is_vacuum(self):
        """Test that eps=0, alpha=0 gives the vacuum projector."""
        plus = make_click_povm(0.0).element(1)
        points = np.random.default_rng(0).normal(size=(20, 2))
        np.testing.assert_allclose(plus(points), wigner_fock0()(points))

    @pytest.mark.parametrize("epsilon,alpha", [(0.0, 0.0), (0.02, 0.12), (0.3, -0.48 + 0.2j)])
    def test_completeness_on_coefficients(self, epsilon, alpha):
        """Test that the two outcomes sum to the identity exactly."""
        assert make_click_povm(epsilon, alpha).is_complete()

    def test_displaced_value(self):
        """Test the click element at its displaced centre."""
        value = click_minus(0.02, 0.12)((0.24, 0.0))
        expected = 1.0 / (4.0 * np.pi) - 0.98 / (2.0 * np.pi) + 0.02 / (2.0 * np.pi)
        assert value == pytest.approx(expected)

    def test_click_trace(self):
        """Test that the non-constant part of the click element integrates to -1."""
        assert click_minus(0.02).gaussian_integral() == pytest.approx(-1.0)

    def test_labels(self):
        """Test outcome labels."""
        family = make_click_povm(0.02, label="x1")
        assert family.label(1) == "x1:+1"
        assert family.label(-1) == "x1:-1"

    def test_unknown_outcome(self):
        """Test that outcome 0 is not an element."""
        with pytest.raises(ValidationError):
            make_click_povm(0.02).element(0)

    def test_epsilon_out_of_range(self):
        """Test that epsilon > 1 is rejected."""
        with pytest.raises(ValidationError):
            make_click_povm(1.5)

    def test_json_round_trip_of_form(self):
        """Test that a form survives its JSON representation."""
        form = click_minus(0.02, 0.3)
        restored = WignerForm.from_json_dict(form.to_json_dict())
        points = np.random.default_rng(1).normal(size=(10, 2))
        np.testing.assert_allclose(restored(points), form(points))


class TestConvolveIsotropic:
    """Tests for exact isotropic smoothing."""

    def test_zero_noise_is_identity(self):
        """Test that t=0 returns the form unchanged."""
        form = click_minus(0.02)
        assert convolve_isotropic(form, 0.0) is form

    @pytest.mark.parametrize("epsilon,t", [(0.0, 0.3), (0.02, 0.5), (0.1, 1.7)])
    def test_matches_closed_form(self, epsilon, t):
        """Test agreement with the smoothed click formula."""
        x, p = np.meshgrid(np.linspace(-4, 4, 17), np.linspace(-3, 3, 13), indexing="ij")
        smoothed = convolve_isotropic(click_minus(epsilon), t)
        np.testing.assert_allclose(
            smoothed(np.stack([x, p], axis=-1)), smoothed_click(epsilon, t, x, p), atol=1e-14
        )

    def test_noiseless_value_at_origin(self):
        """Test -1/(4 pi) at the origin for eps=0, t=0."""
        assert click_minus(0.0)((0.0, 0.0)) == pytest.approx(-1.0 / (4.0 * np.pi))

    def test_threshold_touches_zero(self):
        """Test that the smoothed click element vanishes at the origin for t = t*."""
        t_star = np.sqrt(0.92)
        assert convolve_isotropic(click_minus(0.02), t_star)((0.0, 0.0)) == pytest.approx(0.0, abs=1e-12)

    def test_completeness_preserved(self):
        """Test that smoothing every element keeps the identity."""
        assert make_click_povm(0.02, 0.3).convolved(0.7).is_complete()

    def test_negative_noise(self):
        """Test that t < 0 is rejected."""
        with pytest.raises(ValidationError):
            convolve_isotropic(click_minus(0.02), -0.1)


class TestConvolveGeneral:
    """Tests for anisotropic smoothing."""

    def test_agrees_with_isotropic(self):
        """Test gamma = t I against the exact isotropic form."""
        form = click_minus(0.02, 0.2 - 0.1j)
        grid = GridSpec(center=(0.4, -0.2), half_width=3.0, step=0.25)
        values = convolve_general(form, 0.6 * np.eye(2), grid)
        expected = convolve_isotropic(form, 0.6)(grid.points())
        assert np.max(np.abs(values - expected)) <= 1e-8

    def test_zero_noise_samples_input(self):
        """Test that gamma = 0 reproduces the form."""
        form = click_minus(0.02)
        grid = GridSpec(half_width=2.0, step=0.5)
        np.testing.assert_allclose(convolve_general(form, np.zeros((2, 2)), grid), form(grid.points()), atol=1e-14)

    def test_threshold_grid_nonnegative(self):
        """Test that the smoothed click element is nonnegative on a grid at t*."""
        grid = GridSpec.for_width(np.sqrt(0.92))
        values = convolve_general(click_minus(0.02), np.sqrt(0.92) * np.eye(2), grid)
        assert values.min() >= -1e-8

    def test_anisotropic_origin_value(self):
        """Test gamma = diag(2 t*, 0) at the origin against its one-dimensional closed form."""
        epsilon = 0.02
        a = 2.0 * np.sqrt(1.0 - 4.0 * epsilon)
        expected = 1.0 / (4.0 * np.pi) - ((1.0 - epsilon) - epsilon / (1.0 + a)) / (2.0 * np.pi * np.sqrt(1.0 + a))
        value = evaluate_convolved(click_minus(epsilon), np.diag([a, 0.0]), np.zeros(2))
        assert value == pytest.approx(expected, abs=1e-12)
        assert value == pytest.approx(-0.0111, abs=5e-4)

    def test_non_psd_gamma(self):
        """Test that a non-PSD gamma is rejected."""
        with pytest.raises(ValidationError):
            evaluate_convolved(click_minus(0.02), np.diag([1.0, -0.5]), np.zeros(2))


class TestMinimumOfForm:
    """Tests for global minima."""

    def test_noiseless_minimum(self):
        """Test -1/(4 pi) at the origin."""
        minimum = minimum_of_form(click_minus(0.0))
        assert minimum.value == pytest.approx(-1.0 / (4.0 * np.pi))
        assert minimum.point == pytest.approx((0.0, 0.0))
        assert minimum.method == "closed_form"

    def test_minimum_at_origin_after_smoothing(self):
        """Test that the smoothed click element is lowest at the origin."""
        minimum = minimum_of_form(convolve_isotropic(click_minus(0.02), 0.5))
        assert minimum.point == pytest.approx((0.0, 0.0))
        assert minimum.attained

    def test_large_epsilon_already_nonnegative(self):
        """Test that eps=0.3 needs no smoothing."""
        assert minimum_of_form(click_minus(0.3)).value >= 0.0

    def test_minimum_independent_of_displacement(self):
        """Test equal minima across displacements."""
        values = [
            minimum_of_form(convolve_isotropic(click_minus(0.02, alpha), 0.4)).value
            for alpha in (0.0, 0.5, -0.48)
        ]
        assert max(values) - min(values) <= 1e-10

    def test_heat_flow_monotone(self):
        """Test that minima never decrease as t grows."""
        values = [minimum_of_form(convolve_isotropic(click_minus(0.02), t)).value for t in np.linspace(0, 2, 21)]
        assert all(later >= earlier - 1e-15 for earlier, later in zip(values, values[1:]))

    def test_infimum_at_infinity(self):
        """Test that the no-click element's infimum is its zero constant, not attained."""
        minimum = minimum_of_form(make_click_povm(0.02).element(1))
        assert not minimum.attained
        assert minimum.point is None
        assert minimum.value == 0.0

    def test_grid_fallback(self):
        """Test two separated terms through the grid search."""
        form = wigner_fock1() + wigner_fock1().shifted((12.0, 0.0))
        minimum = minimum_of_form(form)
        assert minimum.method == "grid"
        assert minimum.value == pytest.approx(-1.0 / (2.0 * np.pi), abs=1e-8)

    def test_anisotropic_minimum(self):
        """Test that the anisotropic minimum lies at or below the origin value."""
        epsilon = 0.02
        gamma = np.diag([2.0 * np.sqrt(0.92), 0.0])
        minimum = minimum_of_convolved(click_minus(epsilon), gamma)
        origin = evaluate_convolved(click_minus(epsilon), gamma, np.zeros(2))
        assert minimum.value <= origin + 1e-12
        assert minimum.value < 0.0


class TestNoiseThreshold:
    """Tests for t*(eps)."""

    @pytest.mark.parametrize(
        "epsilon,expected",
        [
            (0.0, 1.0),
            (0.02, np.sqrt(0.92)),
            (0.25, 0.0),
            (0.5, 0.0),
            (0.6, 0.2),
            (0.8, 0.6),
            (1.0, 1.0),
        ],
    )
    def test_values(self, epsilon, expected):
        """Test the closed form on both sides of the no-smoothing window."""
        assert noise_threshold(epsilon).t_star == pytest.approx(expected)

    @pytest.mark.parametrize("epsilon", [0.0, 0.02, 0.1, 0.2])
    def test_threshold_is_sharp(self, epsilon):
        """Test nonnegativity at t* and negativity just below."""
        t_star = noise_threshold(epsilon).t_star
        assert minimum_of_form(convolve_isotropic(click_minus(epsilon), t_star)).value >= -1e-10
        assert minimum_of_form(convolve_isotropic(click_minus(epsilon), 0.99 * t_star)).value < 0.0

    @pytest.mark.parametrize("epsilon", [0.6, 0.8, 1.0])
    def test_no_click_element_sets_threshold(self, epsilon):
        """Test that above eps = 1/2 the no-click element needs t >= 2 eps - 1."""
        no_click = make_click_povm(epsilon).element(1)
        t_star = noise_threshold(epsilon).t_star
        assert minimum_of_form(convolve_isotropic(no_click, t_star)).value >= -1e-10
        assert minimum_of_form(convolve_isotropic(no_click, 0.99 * t_star)).value < 0.0
        assert minimum_of_form(convolve_isotropic(click_minus(epsilon), t_star)).value >= 0.0

    @pytest.mark.parametrize("epsilon", [0.0, 0.01, 0.02, 0.1, 0.2, 0.24])
    def test_root_finder_agrees(self, epsilon):
        """Test that the bracketed root matches sqrt(1 - 4 eps)."""
        assert positivity_threshold(epsilon) == pytest.approx(np.sqrt(1.0 - 4.0 * epsilon), abs=1e-6)

    @pytest.mark.parametrize("epsilon", [0.6, 0.8, 1.0])
    def test_root_finder_high_excitation(self, epsilon):
        """Test that the bracketed root matches 2 eps - 1 above eps = 1/2."""
        assert positivity_threshold(epsilon) == pytest.approx(2.0 * epsilon - 1.0, abs=1e-6)
        assert positivity_threshold(epsilon) == pytest.approx(noise_threshold(epsilon).t_star, abs=1e-6)

    @pytest.mark.parametrize("epsilon", [0.3, 0.5])
    def test_root_finder_no_smoothing_needed(self, epsilon):
        """Test that 1/4 <= eps <= 1/2 returns zero."""
        assert positivity_threshold(epsilon) == 0.0
