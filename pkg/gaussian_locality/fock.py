"""Brute-force probabilities in a truncated Fock basis.

An independent route to p(ab|xy) for the lossy two-mode squeezed state: the
state is kept as an ensemble of pure branches (one per pair of photons lost),
detectors are displaced projector mixtures, and probabilities are traces.
"""

import logging
from typing import Optional, Tuple

import numpy as np
from numpy.typing import NDArray
from scipy import linalg, special

from gaussian_locality.exceptions import TruncationError
from gaussian_locality.models import (
    OUTCOME_PAIRS,
    SETTING_PAIRS,
    ChshSetting,
    FockOracleConfig,
    TmssParameters,
)
from gaussian_locality.validators import validate_epsilon, validate_eta


logger = logging.getLogger(__name__)


def schmidt_coefficients(nu: float, cutoff: int) -> NDArray[np.float64]:
    """sqrt(1 - l^2) l^n for n = 0..cutoff, l^2 = (nu - 1) / (nu + 1)."""
    ratio = (nu - 1.0) / (nu + 1.0)
    return np.sqrt(1.0 - ratio) * np.sqrt(ratio) ** np.arange(cutoff + 1)


def loss_kraus(eta: float, cutoff: int) -> NDArray[np.float64]:
    """Kraus operators of pure loss, stacked as K[k] = sum_n sqrt(C(n, k)) eta^((n-k)/2) (1-eta)^(k/2) |n-k><n|."""
    eta = validate_eta(eta)
    dim = cutoff + 1
    kraus = np.zeros((dim, dim, dim))
    for k in range(dim):
        for n in range(k, dim):
            kraus[k, n - k, n] = (
                np.sqrt(special.comb(n, k)) * eta ** ((n - k) / 2.0) * (1.0 - eta) ** (k / 2.0)
            )
    return kraus


def check_truncation(nu: float, config: FockOracleConfig) -> float:
    """Discarded Schmidt weight of the cutoff.

    Raises:
        TruncationError: If it exceeds ``config.max_tail``
    """
    tail = config.tail_bound(nu)
    if tail > config.max_tail:
        raise TruncationError(
            f"Cutoff {config.cutoff} discards weight {tail:.3e} > {config.max_tail:.1e} for nu={nu}",
            cutoff=config.cutoff,
            tail_bound=tail,
        )
    return tail


def lossy_tmss_branches(params: TmssParameters, config: Optional[FockOracleConfig] = None) -> NDArray[np.float64]:
    """Pure branches M[k, l] = K_k diag(c) K_l^T of the lossy squeezed state.

    Branch (k, l) is the unnormalised state sum_mn M[k, l, m, n] |m>|n>
    after k photons leak from mode A and l from mode B.

    Raises:
        TruncationError: If the cutoff is too small for nu
    """
    config = config or FockOracleConfig()
    check_truncation(params.nu, config)
    kraus = loss_kraus(params.eta, config.cutoff)
    coefficients = schmidt_coefficients(params.nu, config.cutoff)
    return np.einsum("kmi,i,lni->klmn", kraus, coefficients, kraus, optimize=True)


def lossy_tmss_density(params: TmssParameters, config: Optional[FockOracleConfig] = None) -> NDArray[np.float64]:
    """Truncated density matrix, indexed [(m, n), (m', n')] with m for mode A."""
    branches = lossy_tmss_branches(params, config)
    dim = branches.shape[-1]
    rho = np.einsum("klmn,klpq->mnpq", branches, branches, optimize=True)
    return rho.reshape(dim * dim, dim * dim)


def displacement_operator(alpha: complex, cutoff: int, padding: int = 10) -> NDArray[np.complex128]:
    """Truncated D(alpha), exponentiated on cutoff + 1 + padding levels and cropped."""
    dim = cutoff + 1 + padding
    lowering = np.diag(np.sqrt(np.arange(1, dim)), k=1)
    generator = alpha * lowering.T - np.conj(alpha) * lowering
    return linalg.expm(generator)[: cutoff + 1, : cutoff + 1]


def displacement_operator_exact(alpha: complex, cutoff: int) -> NDArray[np.complex128]:
    """Matrix elements <m|D(alpha)|n> from the generalised Laguerre closed form."""
    alpha = complex(alpha)
    x = abs(alpha) ** 2
    dim = cutoff + 1
    matrix = np.zeros((dim, dim), dtype=complex)
    for m in range(dim):
        for n in range(dim):
            low, high = min(m, n), max(m, n)
            scale = np.exp(0.5 * (special.gammaln(low + 1) - special.gammaln(high + 1)) - x / 2.0)
            phase = alpha ** (m - n) if m >= n else (-np.conj(alpha)) ** (n - m)
            matrix[m, n] = scale * phase * special.eval_genlaguerre(low, high - low, x)
    return matrix


def click_projector(epsilon: float, alpha: complex, cutoff: int, padding: int = 10) -> NDArray[np.complex128]:
    """No-click element D(alpha) [(1 - eps) |0><0| + eps |1><1|] D(alpha)^dagger."""
    epsilon = validate_epsilon(epsilon)
    columns = displacement_operator(alpha, cutoff, padding)[:, :2]
    return columns @ np.diag([1.0 - epsilon, epsilon]) @ columns.conj().T


def click_element(outcome: int, epsilon: float, alpha: complex, cutoff: int, padding: int = 10) -> NDArray[np.complex128]:
    no_click = click_projector(epsilon, alpha, cutoff, padding)
    return no_click if outcome == 1 else np.eye(cutoff + 1) - no_click


class FockOracle:
    """Probabilities of click outcomes on one lossy squeezed state."""

    def __init__(self, params: TmssParameters, config: Optional[FockOracleConfig] = None) -> None:
        self.params = params
        self.config = config or FockOracleConfig()
        self.tail_bound = check_truncation(params.nu, self.config)
        self.branches = lossy_tmss_branches(params, self.config)
        logger.debug(
            f"Fock oracle for nu={params.nu}, eta={params.eta}: cutoff {self.config.cutoff}, "
            f"tail {self.tail_bound:.3e}"
        )

    def _element(self, outcome: int, epsilon: float, alpha: complex) -> NDArray[np.complex128]:
        return click_element(outcome, epsilon, alpha, self.config.cutoff, self.config.padding)

    def expectation(self, operator_a: NDArray[np.complex128], operator_b: NDArray[np.complex128]) -> float:
        """Tr[rho A (x) B] = sum over branches of <M| A M B^T>."""
        transformed = np.einsum("mp,klpq,nq->klmn", operator_a, self.branches, operator_b, optimize=True)
        return float(np.real(np.sum(np.conj(self.branches) * transformed)))

    def probability(self, epsilon: float, alpha: complex, beta: complex, outcome: Tuple[int, int]) -> float:
        a, b = outcome
        return self.expectation(self._element(a, epsilon, alpha), self._element(b, epsilon, beta))

    def table(self, setting: ChshSetting) -> NDArray[np.float64]:
        """4x4 table p(ab|xy)."""
        elements_a = {
            (x, a): self._element(a, setting.epsilon, setting.alpha[x]) for x in (0, 1) for a in (1, -1)
        }
        elements_b = {
            (y, b): self._element(b, setting.epsilon, setting.beta[y]) for y in (0, 1) for b in (1, -1)
        }
        return np.array(
            [
                [self.expectation(elements_a[x, a], elements_b[y, b]) for a, b in OUTCOME_PAIRS]
                for x, y in SETTING_PAIRS
            ]
        )


def probability_fock(
    state_params: TmssParameters,
    setting: Tuple[float, complex, complex],
    outcome: Tuple[int, int],
    config: Optional[FockOracleConfig] = None,
) -> float:
    """p(ab) for click detectors on the lossy squeezed state, by brute force.

    Args:
        state_params: Squeezing and loss of the state
        setting: (epsilon, alpha, beta)
        outcome: (a, b) with a, b in {+1, -1}
        config: Truncation settings

    Raises:
        TruncationError: If the cutoff discards more than ``config.max_tail``
    """
    epsilon, alpha, beta = setting
    return FockOracle(state_params, config).probability(epsilon, alpha, beta, outcome)
