"""Phase-space linear algebra for bosonic Gaussian systems.

All matrices use the quadrature ordering (q1, p1, ..., qN, pN) and the
hbar = 2 convention: the vacuum has unit quadrature variance, the identity
operator has Wigner function (4 pi)^-N and a coherent state |alpha> is centred
at (2 Re alpha, 2 Im alpha). Every downstream constant depends on this choice.
"""

import logging
from typing import Dict, Mapping, Optional, Tuple, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy import linalg

from gaussian_locality.exceptions import ValidationError


logger = logging.getLogger(__name__)


DEFAULT_TOLERANCE = 1e-9
EIGENVALUE_CLAMP = 1e-12
SUPPORT_TOLERANCE = 1e-9

# Ordered (q1, p1, ..., qN, pN), length 2N.
MeanVector = NDArray[np.float64]

Monomial = Tuple[int, ...]


def frozen_array(value: ArrayLike, dtype: type = float) -> NDArray:
    """Return a read-only copy of ``value``."""
    array = np.array(value, dtype=dtype)
    array.setflags(write=False)
    return array


class SymplecticForm(BaseModel):
    """Direct sum of [[0, 1], [-1, 0]] over the modes."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    modes: int = Field(ge=1)
    matrix: np.ndarray

    @field_validator("matrix", mode="before")
    @classmethod
    def _freeze(cls, v: ArrayLike) -> np.ndarray:
        return frozen_array(v)


class CovarianceMatrix(BaseModel):
    """Real symmetric 2N x 2N matrix in quadrature-variance units."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    modes: int = Field(ge=1)
    matrix: np.ndarray

    @field_validator("matrix", mode="before")
    @classmethod
    def _freeze(cls, v: ArrayLike) -> np.ndarray:
        return frozen_array(v)

    @model_validator(mode="after")
    def _check_shape(self) -> "CovarianceMatrix":
        dim = 2 * self.modes
        if self.matrix.shape != (dim, dim):
            raise ValidationError(
                f"Covariance of {self.modes} modes must be {dim}x{dim}, got {self.matrix.shape}",
                field="covariance",
                value=self.matrix.shape,
            )
        asymmetry = float(np.max(np.abs(self.matrix - self.matrix.T))) if dim else 0.0
        if asymmetry > DEFAULT_TOLERANCE:
            raise ValidationError(
                f"Covariance matrix is not symmetric (max asymmetry {asymmetry:.3e})",
                field="covariance",
                value=asymmetry,
            )
        return self

    @classmethod
    def from_array(cls, matrix: ArrayLike) -> "CovarianceMatrix":
        """Build a covariance matrix, inferring the mode count from its shape.

        Raises:
            ValidationError: If the matrix is not square with even dimension
        """
        array = np.atleast_2d(np.asarray(matrix, dtype=float))
        if array.ndim != 2 or array.shape[0] != array.shape[1] or array.shape[0] % 2:
            raise ValidationError(
                f"Covariance matrix must be square with even dimension, got shape {array.shape}",
                field="covariance",
                value=array.shape,
            )
        return cls(modes=array.shape[0] // 2, matrix=0.5 * (array + array.T))

    @classmethod
    def identity(cls, modes: int, scale: float = 1.0) -> "CovarianceMatrix":
        """Return ``scale`` times the identity on ``modes`` modes."""
        return cls(modes=modes, matrix=scale * np.eye(2 * modes))

    @property
    def dimension(self) -> int:
        return 2 * self.modes

    @property
    def classical_valid(self) -> bool:
        """Whether the matrix is positive semidefinite."""
        return psd_margin(self.matrix) >= -DEFAULT_TOLERANCE

    @property
    def quantum_valid(self) -> bool:
        """Whether the matrix satisfies V + i Omega >= 0."""
        return is_quantum_covariance(self)

    def eigenvalues(self) -> NDArray[np.float64]:
        """Ascending eigenvalues."""
        return np.linalg.eigvalsh(self.matrix)

    def block(self, start_mode: int, stop_mode: int) -> "CovarianceMatrix":
        """Principal sub-matrix of modes ``start_mode:stop_mode``."""
        sl = slice(2 * start_mode, 2 * stop_mode)
        return CovarianceMatrix(modes=stop_mode - start_mode, matrix=self.matrix[sl, sl])


CovarianceLike = Union[CovarianceMatrix, ArrayLike]


def as_covariance(value: CovarianceLike) -> CovarianceMatrix:
    """Coerce arrays to :class:`CovarianceMatrix`, validating symmetry."""
    if isinstance(value, CovarianceMatrix):
        return value
    array = np.atleast_2d(np.asarray(value, dtype=float))
    if array.ndim == 2 and array.shape[0] == array.shape[1]:
        asymmetry = float(np.max(np.abs(array - array.T))) if array.size else 0.0
        if asymmetry > DEFAULT_TOLERANCE:
            raise ValidationError(
                f"Matrix is not symmetric (max asymmetry {asymmetry:.3e})",
                field="covariance",
                value=asymmetry,
            )
    return CovarianceMatrix.from_array(array)


class GaussianDistribution(BaseModel):
    """Classical multivariate normal distribution, possibly degenerate."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    mean: np.ndarray
    covariance: CovarianceMatrix

    @field_validator("mean", mode="before")
    @classmethod
    def _freeze_mean(cls, v: ArrayLike) -> np.ndarray:
        return frozen_array(np.ravel(np.asarray(v, dtype=float)))

    @field_validator("covariance", mode="before")
    @classmethod
    def _coerce_covariance(cls, v: CovarianceLike) -> CovarianceMatrix:
        return as_covariance(v)

    @model_validator(mode="after")
    def _check_consistency(self) -> "GaussianDistribution":
        if self.mean.shape[0] != self.covariance.dimension:
            raise ValidationError(
                f"Mean of length {self.mean.shape[0]} does not match covariance dimension "
                f"{self.covariance.dimension}",
                field="mean",
                value=self.mean.shape[0],
            )
        margin = psd_margin(self.covariance.matrix)
        if margin < -DEFAULT_TOLERANCE:
            raise ValidationError(
                f"Gaussian covariance must be positive semidefinite (min eigenvalue {margin:.3e})",
                field="covariance",
                value=margin,
            )
        return self

    @property
    def dimension(self) -> int:
        return self.covariance.dimension

    @classmethod
    def centered(cls, covariance: CovarianceLike) -> "GaussianDistribution":
        """Zero-mean distribution with the given covariance."""
        cov = as_covariance(covariance)
        return cls(mean=np.zeros(cov.dimension), covariance=cov)


def make_symplectic_form(modes: int) -> SymplecticForm:
    """Return the symplectic form on ``modes`` modes.

    Raises:
        ValidationError: If modes < 1
    """
    if isinstance(modes, bool) or int(modes) != modes or modes < 1:
        raise ValidationError(f"modes must be a positive integer, got: {modes!r}", field="modes", value=modes)
    block = np.array([[0.0, 1.0], [-1.0, 0.0]])
    return SymplecticForm(modes=int(modes), matrix=linalg.block_diag(*([block] * int(modes))))


def psd_margin(matrix: ArrayLike) -> float:
    """Smallest eigenvalue of a symmetric (or Hermitian) matrix."""
    array = np.asarray(matrix)
    if array.size == 0:
        return 0.0
    return float(np.linalg.eigvalsh(array)[0])


def quantum_margin(V: CovarianceLike) -> float:
    """Smallest eigenvalue of the Hermitian matrix V + i Omega."""
    cov = as_covariance(V)
    omega = make_symplectic_form(cov.modes).matrix
    return psd_margin(cov.matrix + 1j * omega)


def is_quantum_covariance(V: CovarianceLike, tol: float = DEFAULT_TOLERANCE) -> bool:
    """Check the uncertainty principle V + i Omega >= 0.

    Args:
        V: Covariance matrix
        tol: Absolute tolerance on the smallest eigenvalue

    Raises:
        ValidationError: If V is not symmetric
    """
    margin = quantum_margin(V)
    logger.debug(f"Uncertainty margin: {margin:.3e}")
    return margin >= -tol


def direct_sum(A: CovarianceLike, B: CovarianceLike) -> CovarianceMatrix:
    """Block-diagonal A (+) B."""
    a = as_covariance(A)
    b = as_covariance(B)
    return CovarianceMatrix(modes=a.modes + b.modes, matrix=linalg.block_diag(a.matrix, b.matrix))


def ordering_margin(V: CovarianceLike, A: CovarianceLike, B: CovarianceLike) -> float:
    """Smallest eigenvalue of V - (A (+) B).

    Raises:
        ValidationError: If dim(V) != dim(A) + dim(B)
    """
    v = as_covariance(V)
    ab = direct_sum(A, B)
    if v.dimension != ab.dimension:
        raise ValidationError(
            f"Dimension mismatch: V is {v.dimension}-dimensional, A (+) B is {ab.dimension}-dimensional",
            field="covariance",
            value=(v.dimension, ab.dimension),
        )
    return psd_margin(v.matrix - ab.matrix)


def is_psd_ordered(
    V: CovarianceLike, A: CovarianceLike, B: CovarianceLike, tol: float = DEFAULT_TOLERANCE
) -> bool:
    """Check V >= A (+) B in the positive-semidefinite order."""
    margin = ordering_margin(V, A, B)
    logger.debug(f"Ordering margin V - A(+)B: {margin:.3e}")
    return margin >= -tol


def _check_same_dimension(g1: GaussianDistribution, g2: GaussianDistribution) -> None:
    if g1.dimension != g2.dimension:
        raise ValidationError(
            f"Dimension mismatch: {g1.dimension} vs {g2.dimension}",
            field="dimension",
            value=(g1.dimension, g2.dimension),
        )


def convolve_gaussians(g1: GaussianDistribution, g2: GaussianDistribution) -> GaussianDistribution:
    """Convolution of two Gaussian densities: means and covariances add."""
    _check_same_dimension(g1, g2)
    return GaussianDistribution(
        mean=g1.mean + g2.mean,
        covariance=CovarianceMatrix(
            modes=g1.covariance.modes, matrix=g1.covariance.matrix + g2.covariance.matrix
        ),
    )


def _factorize(covariance: CovarianceMatrix) -> Tuple[NDArray, NDArray, NDArray]:
    """Eigendecomposition with eigenvalues below the clamp treated as exact zeros."""
    eigenvalues, eigenvectors = np.linalg.eigh(covariance.matrix)
    support = eigenvalues > EIGENVALUE_CLAMP
    return np.where(support, eigenvalues, 0.0), eigenvectors, support


def gaussian_density(g: GaussianDistribution, point: ArrayLike) -> Union[float, NDArray[np.float64]]:
    """Evaluate the normal density at ``point`` (or a stack of points).

    For a singular covariance the density is taken with respect to Lebesgue
    measure on the support; points off the support evaluate to 0.

    Raises:
        ValidationError: If the point dimension does not match
    """
    points = np.asarray(point, dtype=float)
    if points.shape[-1:] != (g.dimension,):
        raise ValidationError(
            f"Point of shape {points.shape} does not match dimension {g.dimension}",
            field="point",
            value=points.shape,
        )
    eigenvalues, eigenvectors, support = _factorize(g.covariance)
    coordinates = (points - g.mean) @ eigenvectors
    on_support = np.all(np.abs(coordinates[..., ~support]) <= SUPPORT_TOLERANCE, axis=-1)
    variances = eigenvalues[support]
    exponent = -0.5 * np.sum(coordinates[..., support] ** 2 / variances, axis=-1)
    norm = np.sqrt((2.0 * np.pi) ** variances.size * np.prod(variances))
    density = np.where(on_support, np.exp(exponent) / norm, 0.0)
    return float(density) if density.ndim == 0 else density


def sample_gaussian(g: GaussianDistribution, rng_seed: Union[int, np.random.SeedSequence], count: int) -> NDArray[np.float64]:
    """Draw ``count`` samples, one per row, deterministically from ``rng_seed``.

    Degenerate directions (eigenvalue below the clamp) are pinned to the mean.

    Raises:
        ValidationError: If the covariance is not PSD or count < 1
    """
    if count < 1:
        raise ValidationError(f"count must be positive, got: {count}", field="count", value=count)
    margin = psd_margin(g.covariance.matrix)
    if margin < -DEFAULT_TOLERANCE:
        raise ValidationError(
            f"Cannot sample from a non-PSD covariance (min eigenvalue {margin:.3e})",
            field="covariance",
            value=margin,
        )
    eigenvalues, eigenvectors, _ = _factorize(g.covariance)
    rng = np.random.default_rng(rng_seed)
    standard = rng.standard_normal((count, g.dimension))
    return g.mean + (standard * np.sqrt(eigenvalues)) @ eigenvectors.T


def gaussian_expectation(
    mean: ArrayLike, cov: ArrayLike, polynomial: Mapping[Monomial, float]
) -> Union[float, NDArray[np.float64]]:
    """Expectation of a polynomial under N(mean, cov).

    ``mean`` may carry leading batch axes (shape (..., d)); the result then has
    the batch shape. Moments follow Stein's identity
    E[u_i f(u)] = m_i E[f(u)] + sum_j C_ij E[d_j f(u)], memoised per call.
    """
    mean = np.asarray(mean, dtype=float)
    cov = np.asarray(cov, dtype=float)
    batch_shape = mean.shape[:-1]
    cache: Dict[Monomial, NDArray] = {}

    def moment(powers: Monomial) -> NDArray:
        if powers in cache:
            return cache[powers]
        if not any(powers):
            value = np.ones(batch_shape)
        else:
            i = next(index for index, power in enumerate(powers) if power)
            lowered = powers[:i] + (powers[i] - 1,) + powers[i + 1:]
            value = mean[..., i] * moment(lowered)
            for j, power in enumerate(lowered):
                if power and cov[i, j] != 0.0:
                    reduced = lowered[:j] + (power - 1,) + lowered[j + 1:]
                    value = value + cov[i, j] * power * moment(reduced)
        cache[powers] = value
        return value

    total = np.zeros(batch_shape)
    for powers, coefficient in polynomial.items():
        if coefficient:
            total = total + coefficient * moment(tuple(int(p) for p in powers))
    return float(total) if total.ndim == 0 else total


def gaussian_moment(
    mean: ArrayLike, cov: ArrayLike, powers: Monomial
) -> Union[float, NDArray[np.float64]]:
    """E[prod_i u_i ** powers[i]] under N(mean, cov)."""
    return gaussian_expectation(mean, cov, {tuple(powers): 1.0})


def marginal(g: GaussianDistribution, start_mode: int, stop_mode: Optional[int] = None) -> GaussianDistribution:
    """Marginal distribution of modes ``start_mode:stop_mode``."""
    stop = g.covariance.modes if stop_mode is None else stop_mode
    sl = slice(2 * start_mode, 2 * stop)
    return GaussianDistribution(mean=g.mean[sl], covariance=g.covariance.block(start_mode, stop))
