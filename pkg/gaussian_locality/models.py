"""Data models for the gaussian-locality package."""

from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from gaussian_locality.symplectic import CovarianceMatrix, as_covariance, frozen_array


# Row order of every 4x4 probability table: settings (x, y).
SETTING_PAIRS: Tuple[Tuple[int, int], ...] = ((0, 0), (0, 1), (1, 0), (1, 1))

# Column order of every 4x4 probability table: outcomes (a, b).
OUTCOME_PAIRS: Tuple[Tuple[int, int], ...] = ((1, 1), (1, -1), (-1, 1), (-1, -1))

# Sign of each correlator in S.
CHSH_SIGNS = np.array([1.0, 1.0, 1.0, -1.0])

LOCAL_BOUND = 2.0
TSIRELSON_BOUND = 2.0 * np.sqrt(2.0)


def outcome_products() -> np.ndarray:
    """a*b for each column of a probability table."""
    return np.array([a * b for a, b in OUTCOME_PAIRS], dtype=float)


def complex_to_json(value: complex) -> List[float]:
    return [float(value.real), float(value.imag)]


def complex_from_json(value: Any) -> complex:
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ValueError(f"Complex value must be [re, im], got: {value!r}")
        return complex(float(value[0]), float(value[1]))
    return complex(value)


class VerdictStatus(str, Enum):
    """Outcome of analysing one (eta, nu) cell."""

    LHV_CERTIFIED = "lhv_certified"
    CHSH_VIOLATING = "chsh_violating"
    UNDETERMINED = "undetermined"


class ChshConstraint(str, Enum):
    """Parametrisation searched by the CHSH optimiser."""

    SYMMETRIC = "symmetric"
    FREE = "free"


class TmssParameters(BaseModel):
    """A two-mode squeezed state sent through symmetric pure loss."""

    nu: float = Field(ge=1.0, description="Symplectic parameter of the squeezed state")
    eta: float = Field(default=1.0, ge=0.0, le=1.0, description="Loss-channel transmittance")

    @property
    def schmidt_ratio(self) -> float:
        """lambda^2 = (nu - 1) / (nu + 1)."""
        return (self.nu - 1.0) / (self.nu + 1.0)


class FockOracleConfig(BaseModel):
    """Truncation settings of the Fock-space probability oracle."""

    cutoff: int = Field(default=25, ge=1, description="Highest photon number kept per mode")
    padding: int = Field(default=10, ge=0, description="Extra levels used when exponentiating displacements")
    max_tail: float = Field(default=1e-6, gt=0.0, description="Largest acceptable discarded weight")

    def tail_bound(self, nu: float) -> float:
        """Weight of the squeezed-state Schmidt tail beyond the cutoff.

        The discarded weight sum_{n > cutoff} (1 - l^2) l^(2n) equals
        l^(2 (cutoff + 1)); loss only moves weight to lower photon numbers.
        """
        ratio = (nu - 1.0) / (nu + 1.0)
        return float(ratio ** (self.cutoff + 1))


class NoiseThreshold(BaseModel):
    """Smallest isotropic noise making the convolved click element nonnegative."""

    epsilon: float = Field(ge=0.0, le=1.0)
    t_star: float = Field(ge=0.0)


class ProbabilityFixture(BaseModel):
    """One regression value for p(ab|xy)."""

    params: Dict[str, float]
    outcome: Tuple[int, int]
    probability: float
    route: str = Field(description="Which evaluation route produced the value")
    tolerance: float = Field(default=1e-6, ge=0.0)


class LocalityCertificate(BaseModel):
    """A noise splitting V = omega + gamma_A (+) gamma_B with positive responses.

    ``min_values`` holds the global minimum of every convolved POVM element,
    keyed by element label. ``margin`` is the smallest of them in response
    units (multiplied by 4 pi). Universal certificates cover every measurement
    and carry no minima; their margin is the smallest eigenvalue of omega.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    gamma_a: CovarianceMatrix
    gamma_b: CovarianceMatrix
    omega: CovarianceMatrix
    min_values: Dict[str, float] = Field(default_factory=dict)
    margin: float
    universal: bool = False
    noise: Optional[float] = Field(default=None, description="Isotropic noise t when gamma = t I")
    tolerance: float = Field(default=1e-10, ge=0.0)

    @field_validator("gamma_a", "gamma_b", "omega", mode="before")
    @classmethod
    def _coerce_matrix(cls, v: Any) -> CovarianceMatrix:
        return as_covariance(v)

    @model_validator(mode="after")
    def _check_consistency(self) -> "LocalityCertificate":
        if self.omega.modes != self.gamma_a.modes + self.gamma_b.modes:
            raise ValueError(
                f"omega has {self.omega.modes} modes, gamma_A (+) gamma_B has "
                f"{self.gamma_a.modes + self.gamma_b.modes}"
            )
        if not self.universal and not self.min_values:
            raise ValueError("A measurement-specific certificate needs per-element minima")
        return self

    @property
    def omega_eigenvalues(self) -> np.ndarray:
        return self.omega.eigenvalues()

    def to_json_dict(self) -> Dict[str, Any]:
        """Serialize to a JSON-compatible dictionary."""
        return {
            "gamma_A": self.gamma_a.matrix.tolist(),
            "gamma_B": self.gamma_b.matrix.tolist(),
            "omega": self.omega.matrix.tolist(),
            "omega_eigenvalues": self.omega_eigenvalues.tolist(),
            "min_values": dict(self.min_values),
            "margin": self.margin,
            "universal": self.universal,
            "t": self.noise,
            "tolerance": self.tolerance,
        }


class ChshSetting(BaseModel):
    """Displacements of both parties plus the detector excitation probability."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    alpha: Tuple[complex, complex]
    beta: Tuple[complex, complex]
    epsilon: float = Field(ge=0.0, le=1.0)

    @field_validator("alpha", "beta", mode="before")
    @classmethod
    def _coerce_pair(cls, v: Any) -> Tuple[complex, complex]:
        values = tuple(complex_from_json(item) for item in v)
        if len(values) != 2:
            raise ValueError(f"Expected two displacements, got {len(values)}")
        return values  # type: ignore[return-value]

    @classmethod
    def symmetric(cls, alpha0: float, alpha1: float, epsilon: float) -> "ChshSetting":
        """Real displacements with beta_y = -alpha_y."""
        return cls(alpha=(alpha0, alpha1), beta=(-alpha0, -alpha1), epsilon=epsilon)

    def to_json_dict(self) -> Dict[str, Any]:
        return {
            "alpha": [complex_to_json(a) for a in self.alpha],
            "beta": [complex_to_json(b) for b in self.beta],
            "epsilon": self.epsilon,
        }


class ChshEvaluation(BaseModel):
    """Probability table p(ab|xy), correlators <a_x b_y> and S for one setting."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    setting: ChshSetting
    probabilities: np.ndarray
    correlators: np.ndarray
    S: float

    @field_validator("probabilities", "correlators", mode="before")
    @classmethod
    def _freeze(cls, v: Any) -> np.ndarray:
        return frozen_array(v)

    @model_validator(mode="after")
    def _check_shapes(self) -> "ChshEvaluation":
        if self.probabilities.shape != (4, 4):
            raise ValueError(f"Probability table must be 4x4, got {self.probabilities.shape}")
        if self.correlators.shape != (4,):
            raise ValueError(f"Expected 4 correlators, got {self.correlators.shape}")
        return self

    @classmethod
    def from_table(cls, setting: ChshSetting, table: np.ndarray) -> "ChshEvaluation":
        """Assemble correlators and S from a 4x4 probability table."""
        table = np.asarray(table, dtype=float)
        correlators = table @ outcome_products()
        return cls(
            setting=setting,
            probabilities=table,
            correlators=correlators,
            S=float(CHSH_SIGNS @ correlators),
        )

    @property
    def violates_local_bound(self) -> bool:
        return self.S > LOCAL_BOUND

    def probability(self, a: int, b: int, x: int, y: int) -> float:
        """p(ab|xy)."""
        return float(self.probabilities[SETTING_PAIRS.index((x, y)), OUTCOME_PAIRS.index((a, b))])

    def to_json_dict(self) -> Dict[str, Any]:
        return {
            "setting": self.setting.to_json_dict(),
            "rows": [f"{x}{y}" for x, y in SETTING_PAIRS],
            "columns": [f"{'+' if a > 0 else '-'}{'+' if b > 0 else '-'}" for a, b in OUTCOME_PAIRS],
            "probabilities": self.probabilities.tolist(),
            "correlators": self.correlators.tolist(),
            "S": self.S,
        }

    def csv_rows(self) -> List[List[Any]]:
        """One row per (x, y, a, b) with its probability."""
        return [
            [x, y, a, b, float(self.probabilities[row, col])]
            for row, (x, y) in enumerate(SETTING_PAIRS)
            for col, (a, b) in enumerate(OUTCOME_PAIRS)
        ]


class RegionVerdict(BaseModel):
    """Classification of one (eta, nu) cell of the region map."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    eta: float
    nu: float
    status: VerdictStatus
    value: float = Field(description="Certificate margin, S, or best S, depending on status")
    witness: Optional[Union[LocalityCertificate, ChshEvaluation]] = None

    @model_validator(mode="after")
    def _check_witness(self) -> "RegionVerdict":
        if self.status == VerdictStatus.LHV_CERTIFIED and not isinstance(
            self.witness, LocalityCertificate
        ):
            raise ValueError("lhv_certified verdicts need a locality certificate")
        if self.status == VerdictStatus.CHSH_VIOLATING and not (
            isinstance(self.witness, ChshEvaluation) and self.witness.S > LOCAL_BOUND
        ):
            raise ValueError("chsh_violating verdicts need an evaluation with S > 2")
        return self

    def csv_row(self) -> List[Any]:
        return [self.eta, self.nu, self.status.value, self.value]


class SimulationReport(BaseModel):
    """Outcome counts of a hidden-variable simulation against Born-rule targets."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    samples: int = Field(ge=1)
    seed: int
    counts: np.ndarray
    target: np.ndarray

    @field_validator("counts", "target", mode="before")
    @classmethod
    def _freeze(cls, v: Any) -> np.ndarray:
        return frozen_array(v)

    @property
    def empirical(self) -> np.ndarray:
        return self.counts / self.samples

    @property
    def max_abs_deviation(self) -> float:
        return float(np.max(np.abs(self.empirical - self.target)))

    @property
    def standard_errors(self) -> np.ndarray:
        return np.sqrt(np.clip(self.target * (1.0 - self.target), 0.0, None) / self.samples)

    @property
    def z_scores(self) -> np.ndarray:
        """(p_hat - p) / sqrt(p (1 - p) / n); cells with p in {0, 1} score 0 unless hit."""
        deviation = self.empirical - self.target
        sigma = self.standard_errors
        with np.errstate(divide="ignore", invalid="ignore"):
            scores = np.where(sigma > 0, deviation / np.where(sigma > 0, sigma, 1.0), 0.0)
        return np.where((sigma == 0) & (np.abs(deviation) > 0), np.inf, scores)

    @property
    def max_abs_z(self) -> float:
        return float(np.max(np.abs(self.z_scores)))

    def empirical_chsh(self) -> Tuple[float, float]:
        """S estimated from the sampled table and its standard error.

        The error treats the four correlator estimates as independent.
        """
        correlators = self.empirical @ outcome_products()
        value = float(CHSH_SIGNS @ correlators)
        variance = np.sum(np.clip(1.0 - correlators**2, 0.0, None)) / self.samples
        return value, float(np.sqrt(variance))

    def target_chsh(self) -> float:
        return float(CHSH_SIGNS @ (self.target @ outcome_products()))

    def to_json_dict(self) -> Dict[str, Any]:
        empirical_s, s_error = self.empirical_chsh()
        return {
            "samples": self.samples,
            "seed": self.seed,
            "empirical": self.empirical.tolist(),
            "target": self.target.tolist(),
            "z_scores": [[float(z) for z in row] for row in self.z_scores],
            "max_abs_deviation": self.max_abs_deviation,
            "max_abs_z": self.max_abs_z,
            "empirical_S": empirical_s,
            "empirical_S_error": s_error,
            "target_S": self.target_chsh(),
        }


class SweepConfig(BaseModel):
    """Grid and optimiser settings of a region-map sweep."""

    eta_range: Tuple[float, float, int] = (0.0, 1.0, 50)
    nu_range: Tuple[float, float, int] = (1.0, 1.5, 50)
    epsilon: float = Field(default=0.02, ge=0.0, le=1.0)
    optimizer_budget: int = Field(default=200, ge=0, description="Nelder-Mead evaluations per cell")
    output_path: Optional[Path] = None
    max_workers: int = Field(default=4, ge=1, description="Worker processes for cell evaluation")

    @field_validator("eta_range")
    @classmethod
    def validate_eta_range(cls, v: Tuple[float, float, int]) -> Tuple[float, float, int]:
        low, high, steps = v
        if not 0.0 <= low <= high <= 1.0:
            raise ValueError(f"eta range must satisfy 0 <= min <= max <= 1, got ({low}, {high})")
        if steps < 2:
            raise ValueError(f"eta steps must be at least 2, got {steps}")
        return v

    @field_validator("nu_range")
    @classmethod
    def validate_nu_range(cls, v: Tuple[float, float, int]) -> Tuple[float, float, int]:
        low, high, steps = v
        if not 1.0 <= low <= high:
            raise ValueError(f"nu range must satisfy 1 <= min <= max, got ({low}, {high})")
        if steps < 2:
            raise ValueError(f"nu steps must be at least 2, got {steps}")
        return v

    def etas(self) -> np.ndarray:
        low, high, steps = self.eta_range
        return np.linspace(low, high, steps)

    def nus(self) -> np.ndarray:
        low, high, steps = self.nu_range
        return np.linspace(low, high, steps)

    @property
    def cell_count(self) -> int:
        return self.eta_range[2] * self.nu_range[2]
