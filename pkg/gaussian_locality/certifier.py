"""Noise-transfer certificates for local-hidden-variable models.

A state with covariance V admits a local model for the given measurements
whenever V = omega + gamma_A (+) gamma_B with omega >= 0 and every POVM
element stays nonnegative after convolution with N(0, gamma) of its party.
"""

import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from gaussian_locality.config import ToleranceConfig
from gaussian_locality.exceptions import CertificateError, ValidationError
from gaussian_locality.models import LocalityCertificate
from gaussian_locality.states import GaussianStateDescriptor, is_ppt_entangled
from gaussian_locality.symplectic import (
    CovarianceLike,
    as_covariance,
    ordering_margin,
    psd_margin,
)
from gaussian_locality.validators import validate_epsilon, validate_eta, validate_nu
from gaussian_locality.wigner import (
    FormMinimum,
    PovmFamily,
    make_click_povm,
    minimum_of_convolved,
    noise_threshold,
)


logger = logging.getLogger(__name__)


RESPONSE_SCALE = 4.0 * np.pi

Candidate = Tuple[CovarianceLike, CovarianceLike]


def _require_single_mode_pair(state: GaussianStateDescriptor) -> None:
    if not state.is_bipartite_single_mode:
        raise ValidationError(
            f"Certification needs one mode per party, got partition {state.mode_partition}",
            field="partition",
            value=state.mode_partition,
        )


def click_families(epsilon: float, displacements: Sequence[complex], prefix: str = "x") -> List[PovmFamily]:
    """One click POVM per displacement, labelled ``{prefix}{index}``."""
    return [
        make_click_povm(epsilon, alpha, label=f"{prefix}{index}")
        for index, alpha in enumerate(displacements)
    ]


def max_isotropic_noise(state: GaussianStateDescriptor) -> float:
    """Largest t with V >= t I, i.e. the smallest eigenvalue of V."""
    return float(state.covariance.eigenvalues()[0])


def lossy_tmss_noise_bound(eta: float, nu: float) -> float:
    """Closed form of the largest isotropic noise for the lossy squeezed state."""
    eta = validate_eta(eta)
    nu = validate_nu(nu)
    return 1.0 + eta * (nu - 1.0 - np.sqrt(nu**2 - 1.0))


def region_condition(eta: float, nu: float, epsilon: float) -> bool:
    """Whether isotropic noise transfer certifies click detectors on the lossy squeezed state."""
    return bool(lossy_tmss_noise_bound(eta, nu) >= noise_threshold(epsilon).t_star)


def boundary_eta(nu: float, epsilon: float) -> Optional[float]:
    """Transmittance above which isotropic noise transfer stops working.

    Returns None when the condition holds for every eta in [0, 1].

    Raises:
        ValidationError: If nu < 1 or epsilon is outside [0, 1]
    """
    nu = validate_nu(nu)
    t_star = noise_threshold(epsilon).t_star
    gap = np.sqrt(nu**2 - 1.0) - (nu - 1.0)
    if gap <= 0.0:
        return None
    eta_star = (1.0 - t_star) / gap
    return float(eta_star) if eta_star <= 1.0 else None


def _check_minima(
    minima: Dict[str, FormMinimum], tolerances: ToleranceConfig
) -> Optional[Tuple[Dict[str, float], float]]:
    """Return (raw minima, margin) if every minimum is nonnegative within tolerance."""
    for label, minimum in minima.items():
        slack = tolerances.closed_form if minimum.method == "closed_form" else tolerances.grid
        if minimum.value < -slack:
            logger.debug(f"Element {label} goes negative: {minimum.value:.3e}")
            return None
    attained = [m.value for m in minima.values() if m.attained] or [m.value for m in minima.values()]
    return {label: m.value for label, m in minima.items()}, RESPONSE_SCALE * min(attained)


def _family_minima(
    party: str, families: Sequence[PovmFamily], gamma: np.ndarray
) -> Dict[str, FormMinimum]:
    return {
        f"{party}.{family.label(outcome)}": minimum_of_convolved(form, gamma)
        for family in families
        for outcome, form in family.items()
    }


def _build_certificate(
    state: GaussianStateDescriptor,
    gamma_a: np.ndarray,
    gamma_b: np.ndarray,
    families_a: Sequence[PovmFamily],
    families_b: Sequence[PovmFamily],
    tolerances: ToleranceConfig,
    noise: Optional[float] = None,
) -> Optional[LocalityCertificate]:
    minima = {**_family_minima("A", families_a, gamma_a), **_family_minima("B", families_b, gamma_b)}
    checked = _check_minima(minima, tolerances)
    if checked is None:
        return None
    min_values, margin = checked
    omega = state.covariance.matrix - np.block(
        [[gamma_a, np.zeros((2, 2))], [np.zeros((2, 2)), gamma_b]]
    )
    return LocalityCertificate(
        gamma_a=gamma_a,
        gamma_b=gamma_b,
        omega=omega,
        min_values=min_values,
        margin=margin,
        noise=noise,
        tolerance=tolerances.closed_form,
    )


def certify_isotropic(
    state: GaussianStateDescriptor,
    families_a: Sequence[PovmFamily],
    families_b: Sequence[PovmFamily],
    tolerances: Optional[ToleranceConfig] = None,
) -> Optional[LocalityCertificate]:
    """Search the splitting gamma_A = gamma_B = t I.

    Only t = t_max is tested: minima of isotropically smoothed forms never
    decrease as t grows, and omega = V - t I stays PSD for every t <= t_max.

    Args:
        state: Bipartite state with one mode per party
        families_a: Measurements of party A
        families_b: Measurements of party B
        tolerances: Nonnegativity slack; defaults to :class:`ToleranceConfig`

    Returns:
        A certificate, or None if the isotropic family does not certify

    Raises:
        ValidationError: If the state is not one mode per party
    """
    _require_single_mode_pair(state)
    tolerances = tolerances or ToleranceConfig()
    t_max = max_isotropic_noise(state)
    logger.debug(f"Largest isotropic noise t_max = {t_max:.12f}")
    if t_max < 0.0:
        logger.info("Covariance has no nonnegative isotropic splitting")
        return None

    gamma = t_max * np.eye(2)
    certificate = _build_certificate(state, gamma, gamma, families_a, families_b, tolerances, noise=t_max)
    if certificate is None:
        logger.info(f"No isotropic certificate at t_max = {t_max:.6f}")
    else:
        logger.info(f"Isotropic certificate found at t = {t_max:.6f}, margin {certificate.margin:.3e}")
    return certificate


def certify_candidates(
    state: GaussianStateDescriptor,
    families_a: Sequence[PovmFamily],
    families_b: Sequence[PovmFamily],
    candidates: Sequence[Candidate],
    tolerances: Optional[ToleranceConfig] = None,
) -> Optional[LocalityCertificate]:
    """Check user-supplied (gamma_A, gamma_B) pairs in order; return the first that certifies.

    Anisotropic pairs are checked individually on a grid, with no
    monotonicity assumed between candidates.

    Raises:
        ValidationError: If the state is not one mode per party or a candidate is malformed
    """
    _require_single_mode_pair(state)
    tolerances = tolerances or ToleranceConfig()
    for index, (raw_a, raw_b) in enumerate(candidates):
        gamma_a = np.asarray(as_covariance(raw_a).matrix)
        gamma_b = np.asarray(as_covariance(raw_b).matrix)
        for name, gamma in (("gamma_A", gamma_a), ("gamma_B", gamma_b)):
            if gamma.shape != (2, 2) or psd_margin(gamma) < -tolerances.psd:
                raise ValidationError(
                    f"Candidate {index}: {name} must be a 2x2 PSD matrix",
                    field=name,
                    value=gamma.tolist(),
                )
        margin = ordering_margin(state.covariance, gamma_a, gamma_b)
        if margin < -tolerances.psd:
            logger.debug(f"Candidate {index} exceeds the state covariance (margin {margin:.3e})")
            continue
        isotropic = np.allclose(gamma_a, gamma_a[0, 0] * np.eye(2)) and np.allclose(gamma_a, gamma_b)
        certificate = _build_certificate(
            state,
            gamma_a,
            gamma_b,
            families_a,
            families_b,
            tolerances,
            noise=float(gamma_a[0, 0]) if isotropic else None,
        )
        if certificate is not None:
            logger.info(f"Candidate {index} certifies, margin {certificate.margin:.3e}")
            return certificate
        logger.debug(f"Candidate {index} leaves a negative response")
    logger.info(f"None of {len(candidates)} candidate splittings certifies")
    return None


def certify_separable(
    state: GaussianStateDescriptor, tolerances: Optional[ToleranceConfig] = None
) -> Optional[LocalityCertificate]:
    """Universal certificate for separable states, valid for every measurement.

    Separable states are split with vacuum noise gamma_A = gamma_B = I, which
    is available whenever V >= I. A separable state without that splitting is
    reported as absent with a warning.

    Raises:
        ValidationError: If the state is not one mode per party
    """
    _require_single_mode_pair(state)
    tolerances = tolerances or ToleranceConfig()
    if is_ppt_entangled(state, tolerances.psd):
        logger.info("State is PPT-entangled; no universal certificate")
        return None
    t_max = max_isotropic_noise(state)
    if t_max < 1.0 - tolerances.psd:
        logger.warning(
            f"State is separable but V >= I fails (t_max = {t_max:.6f}); no universal certificate built"
        )
        return None
    omega = state.covariance.matrix - np.eye(4)
    return LocalityCertificate(
        gamma_a=np.eye(2),
        gamma_b=np.eye(2),
        omega=omega,
        margin=psd_margin(omega),
        universal=True,
        noise=1.0,
        tolerance=tolerances.psd,
    )


def verify_certificate(
    certificate: LocalityCertificate,
    state: GaussianStateDescriptor,
    tolerances: Optional[ToleranceConfig] = None,
) -> None:
    """Check that a certificate splits this state's covariance.

    Raises:
        CertificateError: If omega differs from V - gamma_A (+) gamma_B or is not PSD
    """
    tolerances = tolerances or ToleranceConfig()
    if certificate.omega.dimension != state.covariance.dimension:
        raise CertificateError(
            f"Certificate covers {certificate.omega.modes} modes, state has {state.modes}",
            reason="dimension",
        )
    expected = state.covariance.matrix - np.block(
        [
            [certificate.gamma_a.matrix, np.zeros((2, 2))],
            [np.zeros((2, 2)), certificate.gamma_b.matrix],
        ]
    )
    mismatch = float(np.max(np.abs(expected - certificate.omega.matrix)))
    if mismatch > tolerances.psd:
        raise CertificateError(
            f"omega differs from V - gamma_A (+) gamma_B by {mismatch:.3e}", reason="splitting"
        )
    margin = psd_margin(certificate.omega.matrix)
    if margin < -tolerances.psd:
        raise CertificateError(f"omega is not PSD (min eigenvalue {margin:.3e})", reason="omega")


def certify_click_setting(
    state: GaussianStateDescriptor,
    epsilon: float,
    alphas: Sequence[complex] = (0.0,),
    betas: Optional[Sequence[complex]] = None,
    tolerances: Optional[ToleranceConfig] = None,
) -> Optional[LocalityCertificate]:
    """Isotropic certification for click detectors at the given displacements."""
    epsilon = validate_epsilon(epsilon)
    families_a = click_families(epsilon, alphas, prefix="x")
    families_b = click_families(epsilon, alphas if betas is None else betas, prefix="y")
    return certify_isotropic(state, families_a, families_b, tolerances)
