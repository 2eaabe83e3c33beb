"""Gaussian state descriptors, the squeezed state, loss and the PPT test."""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from gaussian_locality.exceptions import OutputError, ValidationError
from gaussian_locality.models import TmssParameters
from gaussian_locality.symplectic import (
    DEFAULT_TOLERANCE,
    CovarianceLike,
    CovarianceMatrix,
    GaussianDistribution,
    as_covariance,
    direct_sum,
    frozen_array,
    gaussian_density,
    make_symplectic_form,
    psd_margin,
    quantum_margin,
)
from gaussian_locality.validators import validate_eta, validate_nu


logger = logging.getLogger(__name__)


PAULI_Z = np.diag([1.0, -1.0])

Party = Union[int, str]


class GaussianStateDescriptor(BaseModel):
    """Mean vector and covariance of a Gaussian state split between parties."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    mean: np.ndarray
    covariance: CovarianceMatrix
    mode_partition: Tuple[int, ...] = (1, 1)

    @field_validator("mean", mode="before")
    @classmethod
    def _freeze_mean(cls, v: ArrayLike) -> np.ndarray:
        return frozen_array(np.ravel(np.asarray(v, dtype=float)))

    @field_validator("covariance", mode="before")
    @classmethod
    def _coerce_covariance(cls, v: CovarianceLike) -> CovarianceMatrix:
        return as_covariance(v)

    @model_validator(mode="after")
    def _check_state(self) -> "GaussianStateDescriptor":
        if any(count < 1 for count in self.mode_partition):
            raise ValidationError(
                f"Every party needs at least one mode, got partition {self.mode_partition}",
                field="partition",
                value=self.mode_partition,
            )
        if sum(self.mode_partition) != self.covariance.modes:
            raise ValidationError(
                f"Partition {self.mode_partition} does not cover {self.covariance.modes} modes",
                field="partition",
                value=self.mode_partition,
            )
        if self.mean.shape[0] != self.covariance.dimension:
            raise ValidationError(
                f"Mean of length {self.mean.shape[0]} does not match {self.covariance.modes} modes",
                field="mean",
                value=self.mean.shape[0],
            )
        margin = quantum_margin(self.covariance)
        if margin < -DEFAULT_TOLERANCE:
            raise ValidationError(
                f"Covariance violates the uncertainty principle (margin {margin:.3e})",
                field="covariance",
                value=margin,
            )
        return self

    @property
    def modes(self) -> int:
        return self.covariance.modes

    @property
    def is_bipartite_single_mode(self) -> bool:
        return self.mode_partition == (1, 1)

    @property
    def distribution(self) -> GaussianDistribution:
        """The Wigner function viewed as a classical Gaussian."""
        return GaussianDistribution(mean=self.mean, covariance=self.covariance)

    def party_slice(self, party: Party) -> slice:
        index = _party_index(party, len(self.mode_partition))
        start = sum(self.mode_partition[:index])
        return slice(2 * start, 2 * (start + self.mode_partition[index]))

    def to_json_dict(self) -> Dict[str, Any]:
        return {
            "mean": self.mean.tolist(),
            "cov": self.covariance.matrix.tolist(),
            "partition": list(self.mode_partition),
        }

    @classmethod
    def from_json_dict(cls, data: Dict[str, Any]) -> "GaussianStateDescriptor":
        """Build a state from {"mean": [...], "cov": [[...]], "partition": [1, 1]}.

        Raises:
            ValidationError: If keys are missing or the state is not physical
        """
        missing = [key for key in ("mean", "cov") if key not in data]
        if missing:
            raise ValidationError(
                f"State document is missing keys: {', '.join(missing)}",
                field=missing[0],
            )
        return cls(
            mean=data["mean"],
            covariance=data["cov"],
            mode_partition=tuple(data.get("partition", (1, 1))),
        )


def _party_index(party: Party, parties: int) -> int:
    if isinstance(party, str):
        index = "AB".find(party.upper()) if len(party) == 1 else -1
    else:
        index = int(party)
    if not 0 <= index < parties:
        raise ValidationError(f"Unknown party: {party!r}", field="party", value=party)
    return index


def _require_single_mode_pair(state: GaussianStateDescriptor) -> None:
    if not state.is_bipartite_single_mode:
        raise ValidationError(
            f"Only one mode per party is supported, got partition {state.mode_partition}",
            field="partition",
            value=state.mode_partition,
        )


def make_tmss(nu: float) -> GaussianStateDescriptor:
    """Two-mode squeezed vacuum with symplectic parameter ``nu``.

    Args:
        nu: cosh of twice the squeezing, at least 1

    Returns:
        Zero-mean state with covariance [[nu I, c Z], [c Z, nu I]], c = sqrt(nu^2 - 1)

    Raises:
        ValidationError: If nu < 1
    """
    nu = validate_nu(nu)
    c = np.sqrt(nu**2 - 1.0)
    covariance = np.block([[nu * np.eye(2), c * PAULI_Z], [c * PAULI_Z, nu * np.eye(2)]])
    return GaussianStateDescriptor(mean=np.zeros(4), covariance=covariance)


def apply_pure_loss(
    state: GaussianStateDescriptor, eta: float, eta_b: Optional[float] = None
) -> GaussianStateDescriptor:
    """Send each mode through a pure-loss channel.

    V -> X V X + (I - X^2) with X = diag(sqrt(eta_i)) per quadrature, and the
    mean scales by sqrt(eta_i). ``eta`` applies to party A and, unless
    ``eta_b`` is given, to every other party as well.

    Raises:
        ValidationError: If a transmittance is outside [0, 1]
    """
    eta_a = validate_eta(eta)
    eta_rest = eta_a if eta_b is None else validate_eta(eta_b, field="eta_b")
    per_mode = [eta_a] * state.mode_partition[0] + [eta_rest] * sum(state.mode_partition[1:])
    scale = np.sqrt(np.repeat(per_mode, 2))
    covariance = scale[:, None] * state.covariance.matrix * scale[None, :] + np.diag(1.0 - scale**2)
    return GaussianStateDescriptor(
        mean=scale * state.mean,
        covariance=covariance,
        mode_partition=state.mode_partition,
    )


def apply_additive_noise(
    state: GaussianStateDescriptor, gamma_a: CovarianceLike, gamma_b: CovarianceLike
) -> GaussianStateDescriptor:
    """Classical additive Gaussian noise V -> V + gamma_A (+) gamma_B.

    Raises:
        ValidationError: If a noise matrix is not PSD or does not fit its party
    """
    noise = direct_sum(gamma_a, gamma_b)
    margin = psd_margin(noise.matrix)
    if margin < -DEFAULT_TOLERANCE:
        raise ValidationError(
            f"Noise covariance must be positive semidefinite (min eigenvalue {margin:.3e})",
            field="gamma",
            value=margin,
        )
    if noise.dimension != state.covariance.dimension or len(state.mode_partition) != 2:
        raise ValidationError(
            f"Noise of {noise.modes} modes does not fit partition {state.mode_partition}",
            field="gamma",
            value=noise.modes,
        )
    return GaussianStateDescriptor(
        mean=state.mean,
        covariance=state.covariance.matrix + noise.matrix,
        mode_partition=state.mode_partition,
    )


def reduced_state(state: GaussianStateDescriptor, party: Party) -> GaussianStateDescriptor:
    """Marginal state of one party ("A"/"B" or 0/1)."""
    sl = state.party_slice(party)
    return GaussianStateDescriptor(
        mean=state.mean[sl],
        covariance=state.covariance.matrix[sl, sl],
        mode_partition=(state.covariance.matrix[sl, sl].shape[0] // 2,),
    )


def partial_transpose(state: GaussianStateDescriptor) -> NDArray[np.float64]:
    """Lambda V Lambda with Lambda flipping the momentum of party B."""
    _require_single_mode_pair(state)
    flip = np.diag([1.0, 1.0, 1.0, -1.0])
    return flip @ state.covariance.matrix @ flip


def ppt_margin(state: GaussianStateDescriptor) -> float:
    """Smallest eigenvalue of the partially transposed V + i Omega; negative means entangled.

    Raises:
        ValidationError: If the partition is not one mode per party
    """
    transposed = partial_transpose(state)
    omega = make_symplectic_form(2).matrix
    return psd_margin(transposed + 1j * omega)


def is_ppt_entangled(state: GaussianStateDescriptor, tol: float = DEFAULT_TOLERANCE) -> bool:
    """PPT criterion, necessary and sufficient for one mode per party."""
    margin = ppt_margin(state)
    logger.debug(f"PPT margin: {margin:.3e}")
    return margin < -tol


def state_wigner(state: GaussianStateDescriptor, point: ArrayLike) -> Union[float, NDArray[np.float64]]:
    """Wigner function of the state, accepting a single point or a stack of them."""
    return gaussian_density(state.distribution, point)


def lossy_tmss(params: TmssParameters) -> GaussianStateDescriptor:
    """Two-mode squeezed state after symmetric pure loss."""
    return apply_pure_loss(make_tmss(params.nu), params.eta)


def save_state(state: GaussianStateDescriptor, path: Path) -> None:
    """Write a state as JSON.

    Raises:
        OutputError: If the file cannot be written
    """
    try:
        path.write_text(json.dumps(state.to_json_dict(), indent=2))
    except OSError as e:
        raise OutputError(f"Cannot write state to {path}: {e}", path=path)
    logger.debug(f"Saved state to {path}")


def load_state(path: Path) -> GaussianStateDescriptor:
    """Read a JSON state document.

    Raises:
        ValidationError: If the file is missing, malformed or unphysical
    """
    if not path.is_file():
        raise ValidationError(f"State file does not exist: {path}", field="state", value=str(path))
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise ValidationError(
            f"Invalid JSON in {path} at line {e.lineno}, column {e.colno}: {e.msg}",
            field="state",
            value=str(path),
        )
    if not isinstance(data, dict):
        raise ValidationError(f"State document in {path} must be an object", field="state")
    return GaussianStateDescriptor.from_json_dict(data)
