"""Monte Carlo execution of a certified local-hidden-variable model.

The hidden variable is r ~ N(mean, omega). Party A answers setting x with
probabilities (4 pi) * (Q_{a|x} * N(0, gamma_A))(r_A), party B likewise with
its own half of r. One hidden sample serves every setting pair of a trial.
"""

import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import List, Optional, Sequence, Tuple

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, field_validator

from gaussian_locality.born import probability_phase_space
from gaussian_locality.certifier import verify_certificate
from gaussian_locality.config import SamplerConfig
from gaussian_locality.exceptions import CertificateError, ValidationError
from gaussian_locality.models import (
    OUTCOME_PAIRS,
    SETTING_PAIRS,
    LocalityCertificate,
    SimulationReport,
)
from gaussian_locality.states import GaussianStateDescriptor
from gaussian_locality.symplectic import GaussianDistribution, frozen_array, sample_gaussian
from gaussian_locality.validators import validate_sample_count
from gaussian_locality.wigner import PovmFamily, convolve_isotropic, evaluate_convolved


logger = logging.getLogger(__name__)


RESPONSE_SCALE = 4.0 * np.pi


def _isotropic_noise(gamma: NDArray[np.float64]) -> Optional[float]:
    t = float(gamma[0, 0])
    return t if np.allclose(gamma, t * np.eye(2), rtol=0.0, atol=1e-15) else None


class PartyResponse(BaseModel):
    """Response probabilities of one party, a function of its setting and its half of the hidden variable."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    families: Tuple[PovmFamily, ...]
    gamma: Optional[np.ndarray] = None
    tolerance: float = 1e-9

    @field_validator("gamma", mode="before")
    @classmethod
    def _freeze(cls, v: Optional[np.ndarray]) -> Optional[np.ndarray]:
        return None if v is None else frozen_array(v)

    @classmethod
    def smoothed(cls, families: Sequence[PovmFamily], gamma: NDArray[np.float64], tolerance: float) -> "PartyResponse":
        """Pre-convolve isotropic noise; keep anisotropic noise for pointwise evaluation."""
        t = _isotropic_noise(np.asarray(gamma))
        if t is not None:
            return cls(families=tuple(f.convolved(t) for f in families), tolerance=tolerance)
        return cls(families=tuple(families), gamma=gamma, tolerance=tolerance)

    @property
    def settings(self) -> int:
        return len(self.families)

    def probabilities(self, setting: int, points: NDArray[np.float64]) -> NDArray[np.float64]:
        """Array (n, outcomes) of response probabilities at hidden points of shape (n, 2).

        Raises:
            CertificateError: If a response is negative beyond tolerance
        """
        family = self.families[setting]
        if self.gamma is None:
            columns = [form.evaluate(points) for form in family.elements]
        else:
            columns = [evaluate_convolved(form, self.gamma, points) for form in family.elements]
        values = RESPONSE_SCALE * np.stack(columns, axis=-1)
        lowest = float(values.min()) if values.size else 0.0
        if lowest < -self.tolerance:
            raise CertificateError(
                f"Response of setting {family.setting_label} reaches {lowest:.3e}; "
                "the certificate does not cover these measurements",
                reason="negative_response",
            )
        if lowest < 0.0:
            logger.warning(f"Clamping responses down to {lowest:.3e}")
            values = np.clip(values, 0.0, None)
        return values / values.sum(axis=-1, keepdims=True)


class LhvModel(BaseModel):
    """Hidden-variable distribution plus local response functions."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    hidden: GaussianDistribution
    response_a: PartyResponse
    response_b: PartyResponse
    state: GaussianStateDescriptor
    families_a: Tuple[PovmFamily, ...]
    families_b: Tuple[PovmFamily, ...]

    def target_table(self) -> NDArray[np.float64]:
        """Born-rule table p(ab|xy) for two settings per party with outcomes +1/-1."""
        table = np.empty((4, 4))
        for row, (x, y) in enumerate(SETTING_PAIRS):
            for col, (a, b) in enumerate(OUTCOME_PAIRS):
                table[row, col] = probability_phase_space(
                    self.state, self.families_a[x].element(a), self.families_b[y].element(b)
                )
        return table


def build_lhv_model(
    certificate: LocalityCertificate,
    state: GaussianStateDescriptor,
    families_a: Sequence[PovmFamily],
    families_b: Sequence[PovmFamily],
    tolerance: float = 1e-9,
) -> LhvModel:
    """Turn a certificate into an executable model.

    Raises:
        CertificateError: If the certificate does not split this state's covariance
    """
    verify_certificate(certificate, state)
    gamma_a = np.asarray(certificate.gamma_a.matrix)
    gamma_b = np.asarray(certificate.gamma_b.matrix)
    return LhvModel(
        hidden=GaussianDistribution(mean=state.mean, covariance=certificate.omega),
        response_a=PartyResponse.smoothed(families_a, gamma_a, tolerance),
        response_b=PartyResponse.smoothed(families_b, gamma_b, tolerance),
        state=state,
        families_a=tuple(families_a),
        families_b=tuple(families_b),
    )


def _draw_outcomes(
    response: PartyResponse, setting: int, points: NDArray[np.float64], rng: np.random.Generator
) -> NDArray[np.int64]:
    """Outcome index per trial, sampled from the response probabilities."""
    probabilities = response.probabilities(setting, points)
    cumulative = np.cumsum(probabilities, axis=-1)
    draws = rng.random(points.shape[0])[:, None]
    return np.minimum(np.sum(draws >= cumulative, axis=-1), probabilities.shape[-1] - 1)


def _simulate_chunk(model: LhvModel, count: int, seed: np.random.SeedSequence) -> NDArray[np.int64]:
    """Counts table (4, 4) for ``count`` trials."""
    hidden_seed, outcome_seed = seed.spawn(2)
    hidden = sample_gaussian(model.hidden, hidden_seed, count)
    rng = np.random.default_rng(outcome_seed)
    outcomes_a = [_draw_outcomes(model.response_a, x, hidden[:, :2], rng) for x in range(2)]
    outcomes_b = [_draw_outcomes(model.response_b, y, hidden[:, 2:], rng) for y in range(2)]

    # Outcome index 0 is +1, index 1 is -1; column = 2 * index_a + index_b.
    counts = np.zeros((4, 4), dtype=np.int64)
    for row, (x, y) in enumerate(SETTING_PAIRS):
        cells = 2 * outcomes_a[x] + outcomes_b[y]
        counts[row] = np.bincount(cells, minlength=4)
    return counts


def _chunk_sizes(samples: int, chunk_size: int) -> List[int]:
    full, rest = divmod(samples, chunk_size)
    return [chunk_size] * full + ([rest] if rest else [])


def simulate(
    model: LhvModel,
    samples: int,
    seed: int,
    sampler: Optional[SamplerConfig] = None,
) -> SimulationReport:
    """Run the model for ``samples`` trials and compare against the Born rule.

    Trials are split into chunks with seeds spawned from ``seed``, so the
    result depends only on (samples, seed, chunk_size), not on scheduling.

    Args:
        model: Model built from a certificate
        samples: Number of trials
        seed: Root seed
        sampler: Chunking and worker settings

    Returns:
        SimulationReport with counts and targets

    Raises:
        ValidationError: If samples < 1 or the model lacks two settings per party
        CertificateError: If a response goes negative beyond tolerance
    """
    samples = validate_sample_count(samples)
    sampler = sampler or SamplerConfig()
    for name, response in (("A", model.response_a), ("B", model.response_b)):
        if response.settings != 2:
            raise ValidationError(
                f"Party {name} needs exactly two settings, got {response.settings}",
                field="families",
                value=response.settings,
            )

    sizes = _chunk_sizes(samples, sampler.chunk_size)
    seeds = np.random.SeedSequence(seed).spawn(len(sizes))
    logger.info(f"Simulating {samples} trials in {len(sizes)} chunks")

    counts = np.zeros((4, 4), dtype=np.int64)
    if len(sizes) == 1 or sampler.max_workers == 1:
        for size, chunk_seed in zip(sizes, seeds):
            counts += _simulate_chunk(model, size, chunk_seed)
    else:
        with ThreadPoolExecutor(max_workers=sampler.max_workers) as executor:
            futures = [
                executor.submit(_simulate_chunk, model, size, chunk_seed)
                for size, chunk_seed in zip(sizes, seeds)
            ]
            for future in as_completed(futures):
                counts += future.result()

    report = SimulationReport(samples=samples, seed=seed, counts=counts, target=model.target_table())
    logger.info(f"Simulation done: max deviation {report.max_abs_deviation:.3e}, max |z| {report.max_abs_z:.2f}")
    return report
