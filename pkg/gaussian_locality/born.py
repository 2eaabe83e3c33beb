"""Born-rule probabilities evaluated in phase space.

p(ab|xy) = (4 pi)^2 * integral of W(r) A(r_A) B(r_B), where W is the state's
Gaussian Wigner function and A, B are Wigner forms. Every piece of the
integrand is a Gaussian times a polynomial, so the integral is exact:
N(r; mu, V) exp(-(r - c)^T K^-1 (r - c) / 2) collapses to
sqrt((2 pi)^d det K) N(c; mu, V + K) N(r; m, Sigma) and the polynomial is
averaged under N(m - c, Sigma) with Gaussian moments.
"""

import logging
from typing import Dict, Tuple, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import stats

from gaussian_locality.exceptions import ValidationError
from gaussian_locality.models import OUTCOME_PAIRS, SETTING_PAIRS, ChshSetting
from gaussian_locality.states import GaussianStateDescriptor
from gaussian_locality.symplectic import gaussian_expectation
from gaussian_locality.validators import validate_epsilon
from gaussian_locality.wigner import WignerForm, WignerTerm, make_click_povm


logger = logging.getLogger(__name__)


PHASE_SPACE_SCALE = 4.0 * np.pi

Monomial = Tuple[int, ...]


class _OverlapKernel:
    """Integral of N(r; mu, V) * P(r - c) * exp(-(r - c)^T K^-1 (r - c) / 2) over r.

    Prepared once for fixed (mu, V, K); evaluated for a batch of centres c.
    """

    def __init__(self, mean: NDArray[np.float64], cov: NDArray[np.float64], widths: NDArray[np.float64]) -> None:
        self.mean = np.asarray(mean, dtype=float)
        cov = np.asarray(cov, dtype=float)
        widths = np.asarray(widths, dtype=float)
        spread = cov + np.diag(widths)
        self.gain = cov @ np.linalg.inv(spread)
        self.posterior = cov - self.gain @ cov
        self.posterior = 0.5 * (self.posterior + self.posterior.T)
        self.shrink = np.eye(cov.shape[0]) - self.gain
        self.normal = stats.multivariate_normal(mean=self.mean, cov=spread)
        self.prefactor = float(np.sqrt(np.prod(2.0 * np.pi * widths)))

    def __call__(self, centers: NDArray[np.float64], polynomial: Dict[Monomial, float]) -> NDArray[np.float64]:
        centers = np.atleast_2d(np.asarray(centers, dtype=float))
        density = np.reshape(self.normal.pdf(centers), centers.shape[:-1])
        shifted_mean = (self.mean - centers) @ self.shrink.T
        expectation = gaussian_expectation(shifted_mean, self.posterior, polynomial)
        return self.prefactor * density * expectation


def _product_polynomial(first: WignerTerm, second: WignerTerm) -> Dict[Monomial, float]:
    return {
        (i, j, k, l): first.coefficient * c1 * second.coefficient * c2
        for (i, j), c1 in first.polynomial.items()
        for (k, l), c2 in second.polynomial.items()
    }


def _scaled_polynomial(term: WignerTerm) -> Dict[Monomial, float]:
    return {key: term.coefficient * c for key, c in term.polynomial.items()}


def _require_single_mode_pair(state: GaussianStateDescriptor) -> None:
    if not state.is_bipartite_single_mode:
        raise ValidationError(
            f"Phase-space probabilities need one mode per party, got partition {state.mode_partition}",
            field="partition",
            value=state.mode_partition,
        )


def gaussian_overlap(
    mean: ArrayLike,
    cov: ArrayLike,
    center: ArrayLike,
    widths: ArrayLike,
    polynomial: Dict[Monomial, float],
) -> Union[float, NDArray[np.float64]]:
    """Integral of N(r; mean, cov) P(r - center) exp(-sum_i (r - center)_i^2 / (2 w_i)).

    ``center`` may be a single point or a stack of points.
    """
    kernel = _OverlapKernel(np.asarray(mean), np.asarray(cov), np.asarray(widths))
    center = np.asarray(center, dtype=float)
    values = kernel(center, polynomial)
    return float(values[0]) if center.ndim == 1 else values


def probability_phase_space(
    state: GaussianStateDescriptor, element_a: WignerForm, element_b: WignerForm
) -> float:
    """Tr[rho A (x) B] from Wigner forms of A and B.

    Raises:
        ValidationError: If the state is not one mode per party
    """
    _require_single_mode_pair(state)
    mean = state.mean
    cov = state.covariance.matrix
    total = element_a.constant * element_b.constant

    for term in element_b.terms:
        total += element_a.constant * gaussian_overlap(
            mean[2:], cov[2:, 2:], term.center, (term.width,) * 2, _scaled_polynomial(term)
        )
    for term in element_a.terms:
        total += element_b.constant * gaussian_overlap(
            mean[:2], cov[:2, :2], term.center, (term.width,) * 2, _scaled_polynomial(term)
        )
    for term_a in element_a.terms:
        for term_b in element_b.terms:
            total += gaussian_overlap(
                mean,
                cov,
                (*term_a.center, *term_b.center),
                (term_a.width, term_a.width, term_b.width, term_b.width),
                _product_polynomial(term_a, term_b),
            )

    probability = PHASE_SPACE_SCALE**2 * float(total)
    if not -1e-9 <= probability <= 1.0 + 1e-9:
        logger.warning(f"Phase-space probability {probability:.3e} outside [0, 1]")
    return probability


def click_probability_table(state: GaussianStateDescriptor, setting: ChshSetting) -> NDArray[np.float64]:
    """4x4 table p(ab|xy) for click detectors, one probability_phase_space call per cell."""
    families_a = [make_click_povm(setting.epsilon, alpha) for alpha in setting.alpha]
    families_b = [make_click_povm(setting.epsilon, beta) for beta in setting.beta]
    table = np.empty((4, 4))
    for row, (x, y) in enumerate(SETTING_PAIRS):
        for col, (a, b) in enumerate(OUTCOME_PAIRS):
            table[row, col] = probability_phase_space(
                state, families_a[x].element(a), families_b[y].element(b)
            )
    return table


class ClickStatistics:
    """Batched click probabilities for one state and excitation probability.

    The no-click element is a single radial term, so p(+|alpha) and
    p(++|alpha, beta) are one prepared Gaussian overlap each; the remaining
    outcomes follow from completeness.
    """

    def __init__(self, state: GaussianStateDescriptor, epsilon: float) -> None:
        _require_single_mode_pair(state)
        self.state = state
        self.epsilon = validate_epsilon(epsilon)
        no_click = make_click_povm(self.epsilon, 0.0).element(1).terms[0]
        self._single_poly = _scaled_polynomial(no_click)
        self._joint_poly = _product_polynomial(no_click, no_click)
        cov = state.covariance.matrix
        self._kernel_a = _OverlapKernel(state.mean[:2], cov[:2, :2], np.ones(2))
        self._kernel_b = _OverlapKernel(state.mean[2:], cov[2:, 2:], np.ones(2))
        self._kernel_ab = _OverlapKernel(state.mean, cov, np.ones(4))

    @staticmethod
    def _centers(displacements: ArrayLike) -> NDArray[np.float64]:
        values = np.asarray(displacements, dtype=complex)
        return np.stack([2.0 * values.real, 2.0 * values.imag], axis=-1)

    def marginal_a(self, alphas: ArrayLike) -> NDArray[np.float64]:
        """p(a=+1 | alpha) for each alpha."""
        return PHASE_SPACE_SCALE * self._kernel_a(self._centers(alphas), self._single_poly)

    def marginal_b(self, betas: ArrayLike) -> NDArray[np.float64]:
        """p(b=+1 | beta) for each beta."""
        return PHASE_SPACE_SCALE * self._kernel_b(self._centers(betas), self._single_poly)

    def joint(self, alphas: ArrayLike, betas: ArrayLike) -> NDArray[np.float64]:
        """p(+1, +1 | alpha, beta) for paired arrays of displacements."""
        centers = np.concatenate([self._centers(alphas), self._centers(betas)], axis=-1)
        return PHASE_SPACE_SCALE**2 * self._kernel_ab(centers, self._joint_poly)

    def correlator(self, alphas: ArrayLike, betas: ArrayLike) -> NDArray[np.float64]:
        """<a b> = 4 p(++) - 2 p_A(+) - 2 p_B(+) + 1."""
        return (
            4.0 * self.joint(alphas, betas)
            - 2.0 * self.marginal_a(alphas)
            - 2.0 * self.marginal_b(betas)
            + 1.0
        )

    def chsh(self, alpha0: ArrayLike, alpha1: ArrayLike, beta0: ArrayLike, beta1: ArrayLike) -> NDArray[np.float64]:
        """S for batches of settings."""
        alpha0, alpha1, beta0, beta1 = np.broadcast_arrays(
            *(np.atleast_1d(np.asarray(v, dtype=complex)) for v in (alpha0, alpha1, beta0, beta1))
        )
        alphas = np.concatenate([alpha0, alpha0, alpha1, alpha1])
        betas = np.concatenate([beta0, beta1, beta0, beta1])
        correlators = self.correlator(alphas, betas).reshape(4, -1)
        return correlators[0] + correlators[1] + correlators[2] - correlators[3]

    def table(self, setting: ChshSetting) -> NDArray[np.float64]:
        """4x4 table p(ab|xy) in the row and column order of :data:`SETTING_PAIRS` and :data:`OUTCOME_PAIRS`."""
        if setting.epsilon != self.epsilon:
            raise ValidationError(
                f"Setting epsilon {setting.epsilon} differs from {self.epsilon}",
                field="epsilon",
                value=setting.epsilon,
            )
        alphas = np.array([setting.alpha[x] for x, _ in SETTING_PAIRS])
        betas = np.array([setting.beta[y] for _, y in SETTING_PAIRS])
        p_a = self.marginal_a(alphas)
        p_b = self.marginal_b(betas)
        p_ab = self.joint(alphas, betas)
        return np.stack([p_ab, p_a - p_ab, p_b - p_ab, 1.0 - p_a - p_b + p_ab], axis=-1)

