"""Closed-form Wigner functions of single-mode POVM elements.

A :class:`WignerForm` is a constant plus Gaussian-polynomial terms
``coef * P(r - c) * exp(-|r - c|^2 / (2 s))`` with P of degree at most 2.
The family is closed under convolution with isotropic Gaussians, so the
convolved click elements stay exact and their minima have closed forms.
"""

import logging
from typing import Any, Callable, Dict, Iterator, Optional, Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, Field, field_validator
from scipy import optimize, special, stats

from gaussian_locality.exceptions import ValidationError
from gaussian_locality.models import NoiseThreshold
from gaussian_locality.symplectic import (
    DEFAULT_TOLERANCE,
    CovarianceLike,
    as_covariance,
    gaussian_expectation,
    psd_margin,
)
from gaussian_locality.validators import validate_epsilon


logger = logging.getLogger(__name__)


IDENTITY_VALUE = 1.0 / (4.0 * np.pi)
FOCK_PEAK = 1.0 / (2.0 * np.pi)
MAX_DEGREE = 2

# Grid rule: half-width max(6, 6 sqrt(scale)) and step 0.02 sqrt(scale).
GRID_SPAN = 6.0
GRID_STEP = 0.02

Polynomial = Dict[Tuple[int, int], float]


def _clean(polynomial: Polynomial) -> Polynomial:
    return {key: value for key, value in polynomial.items() if value != 0.0}


def _standard_normal_moment(order: int) -> float:
    return float(stats.norm.moment(order)) if order else 1.0


class WignerTerm(BaseModel):
    """One Gaussian-polynomial term of a Wigner form."""

    model_config = ConfigDict(frozen=True)

    coefficient: float
    center: Tuple[float, float] = (0.0, 0.0)
    width: float = Field(default=1.0, gt=0.0, description="Variance s of the Gaussian factor")
    polynomial: Polynomial = Field(default_factory=lambda: {(0, 0): 1.0})

    @field_validator("polynomial")
    @classmethod
    def validate_degree(cls, v: Polynomial) -> Polynomial:
        for i, j in v:
            if i < 0 or j < 0 or i + j > MAX_DEGREE:
                raise ValueError(f"Monomial x^{i} p^{j} is outside degree {MAX_DEGREE}")
        return v

    def evaluate(self, points: NDArray[np.float64]) -> NDArray[np.float64]:
        d = np.asarray(points, dtype=float) - np.asarray(self.center)
        dx, dp = d[..., 0], d[..., 1]
        poly = sum(c * dx**i * dp**j for (i, j), c in self.polynomial.items())
        return self.coefficient * poly * np.exp(-(dx**2 + dp**2) / (2.0 * self.width))

    def gaussian_integral(self) -> float:
        """Exact integral over phase space."""
        s = self.width
        second = self.polynomial.get((2, 0), 0.0) + self.polynomial.get((0, 2), 0.0)
        return self.coefficient * 2.0 * np.pi * s * (self.polynomial.get((0, 0), 0.0) + s * second)

    def radial_profile(self) -> Optional[Tuple[float, float]]:
        """(a, b) when the polynomial is a + b |r - c|^2, else None."""
        keys = set(self.polynomial) - {(0, 0), (2, 0), (0, 2)}
        if keys or self.polynomial.get((2, 0), 0.0) != self.polynomial.get((0, 2), 0.0):
            return None
        return self.polynomial.get((0, 0), 0.0), self.polynomial.get((2, 0), 0.0)

    def shifted(self, offset: Tuple[float, float]) -> "WignerTerm":
        return self.model_copy(
            update={"center": (self.center[0] + offset[0], self.center[1] + offset[1])}
        )

    def convolved(self, t: float) -> "WignerTerm":
        """Convolution with the isotropic Gaussian N(0, t I).

        Each monomial x^i p^j becomes E[(m x + sqrt(v) Z1)^i (m p + sqrt(v) Z2)^j]
        with m = s / (s + t) and v = s t / (s + t).
        """
        s = self.width
        m = s / (s + t)
        v = s * t / (s + t)
        polynomial: Polynomial = {}
        for (i, j), c in self.polynomial.items():
            for k in range(0, i + 1, 2):
                for l in range(0, j + 1, 2):
                    weight = (
                        special.comb(i, k, exact=True) * m ** (i - k) * v ** (k / 2) * _standard_normal_moment(k)
                        * special.comb(j, l, exact=True) * m ** (j - l) * v ** (l / 2) * _standard_normal_moment(l)
                    )
                    key = (i - k, j - l)
                    polynomial[key] = polynomial.get(key, 0.0) + c * weight
        return WignerTerm(
            coefficient=self.coefficient * m,
            center=self.center,
            width=s + t,
            polynomial=polynomial,
        )

    def to_json_dict(self) -> Dict[str, Any]:
        return {
            "coef": self.coefficient,
            "center": list(self.center),
            "width": self.width,
            "poly": [[i, j, c] for (i, j), c in sorted(self.polynomial.items())],
        }

    @classmethod
    def from_json_dict(cls, data: Dict[str, Any]) -> "WignerTerm":
        return cls(
            coefficient=data["coef"],
            center=tuple(data.get("center", (0.0, 0.0))),
            width=data.get("width", 1.0),
            polynomial={(int(i), int(j)): float(c) for i, j, c in data["poly"]},
        )


class WignerForm(BaseModel):
    """Constant plus a sum of Gaussian-polynomial terms on one mode."""

    model_config = ConfigDict(frozen=True)

    constant: float = 0.0
    terms: Tuple[WignerTerm, ...] = ()

    def __call__(self, points: ArrayLike) -> Any:
        return self.evaluate(points)

    def evaluate(self, points: ArrayLike) -> Any:
        """Value at a phase-space point (x, p) or at a stack of points of shape (..., 2)."""
        array = np.asarray(points, dtype=float)
        if array.shape[-1:] != (2,):
            raise ValidationError(
                f"Points must have trailing dimension 2, got shape {array.shape}",
                field="point",
                value=array.shape,
            )
        total = np.full(array.shape[:-1], self.constant)
        for term in self.terms:
            total = total + term.evaluate(array)
        return float(total) if total.ndim == 0 else total

    def __add__(self, other: "WignerForm") -> "WignerForm":
        return WignerForm(constant=self.constant + other.constant, terms=self.terms + other.terms)

    def __neg__(self) -> "WignerForm":
        return self.scaled(-1.0)

    def __sub__(self, other: "WignerForm") -> "WignerForm":
        return self + (-other)

    def scaled(self, factor: float) -> "WignerForm":
        return WignerForm(
            constant=factor * self.constant,
            terms=tuple(
                term.model_copy(update={"coefficient": factor * term.coefficient})
                for term in self.terms
            ),
        )

    def shifted(self, offset: Tuple[float, float]) -> "WignerForm":
        return WignerForm(constant=self.constant, terms=tuple(t.shifted(offset) for t in self.terms))

    def merged(self) -> "WignerForm":
        """Combine terms sharing center and width; coefficients move into the polynomial."""
        groups: Dict[Tuple[Tuple[float, float], float], Polynomial] = {}
        for term in self.terms:
            poly = groups.setdefault((term.center, term.width), {})
            for key, c in term.polynomial.items():
                poly[key] = poly.get(key, 0.0) + term.coefficient * c
        terms = tuple(
            WignerTerm(coefficient=1.0, center=center, width=width, polynomial=_clean(poly))
            for (center, width), poly in groups.items()
            if _clean(poly)
        )
        return WignerForm(constant=self.constant, terms=terms)

    def gaussian_integral(self) -> float:
        """Integral of the non-constant part over phase space."""
        return float(sum(term.gaussian_integral() for term in self.terms))

    @property
    def max_width(self) -> float:
        return max((term.width for term in self.terms), default=1.0)

    def to_json_dict(self) -> Dict[str, Any]:
        return {"const": self.constant, "terms": [term.to_json_dict() for term in self.terms]}

    @classmethod
    def from_json_dict(cls, data: Dict[str, Any]) -> "WignerForm":
        return cls(
            constant=data.get("const", 0.0),
            terms=tuple(WignerTerm.from_json_dict(term) for term in data.get("terms", [])),
        )


class PovmFamily(BaseModel):
    """The elements of one measurement setting, keyed by outcome."""

    model_config = ConfigDict(frozen=True)

    setting_label: str
    outcomes: Tuple[int, ...] = (1, -1)
    elements: Tuple[WignerForm, ...]

    @field_validator("elements")
    @classmethod
    def validate_elements(cls, v: Tuple[WignerForm, ...]) -> Tuple[WignerForm, ...]:
        if not v:
            raise ValueError("A POVM family needs at least one element")
        return v

    def element(self, outcome: int) -> WignerForm:
        try:
            return self.elements[self.outcomes.index(outcome)]
        except ValueError:
            raise ValidationError(
                f"Outcome {outcome} is not part of setting {self.setting_label}",
                field="outcome",
                value=outcome,
            )

    def items(self) -> Iterator[Tuple[int, WignerForm]]:
        return iter(zip(self.outcomes, self.elements))

    def label(self, outcome: int) -> str:
        return f"{self.setting_label}:{'+' if outcome > 0 else '-'}{abs(outcome)}"

    def total(self) -> WignerForm:
        total = WignerForm()
        for form in self.elements:
            total = total + form
        return total.merged()

    def is_complete(self, tol: float = 1e-12) -> bool:
        """Elements sum to the identity form, checked on coefficients."""
        total = self.total()
        residual = max(
            (abs(c) for term in total.terms for c in term.polynomial.values()), default=0.0
        )
        return abs(total.constant - IDENTITY_VALUE) <= tol and residual <= tol

    def convolved(self, t: float) -> "PovmFamily":
        return self.model_copy(update={"elements": tuple(convolve_isotropic(f, t) for f in self.elements)})


class GridSpec(BaseModel):
    """Square evaluation grid."""

    center: Tuple[float, float] = (0.0, 0.0)
    half_width: float = Field(gt=0.0)
    step: float = Field(gt=0.0)

    @classmethod
    def for_width(cls, t: float = 0.0, center: Tuple[float, float] = (0.0, 0.0)) -> "GridSpec":
        """Default grid for a unit-width form smoothed by t I."""
        scale = np.sqrt(1.0 + t)
        return cls(center=center, half_width=max(GRID_SPAN, GRID_SPAN * scale), step=GRID_STEP * scale)

    @classmethod
    def covering(cls, form: WignerForm, gamma: Optional[NDArray[np.float64]] = None) -> "GridSpec":
        """Grid covering every term of ``form`` after convolution with ``gamma``."""
        spread = 0.0 if gamma is None else max(float(np.linalg.eigvalsh(gamma)[-1]), 0.0)
        scale = np.sqrt(form.max_width + spread)
        if not form.terms:
            return cls(half_width=GRID_SPAN, step=GRID_STEP * scale)
        centers = np.array([term.center for term in form.terms])
        low, high = centers.min(axis=0), centers.max(axis=0)
        middle = 0.5 * (low + high)
        reach = float(np.max(high - low)) / 2.0
        return cls(
            center=(float(middle[0]), float(middle[1])),
            half_width=max(GRID_SPAN, GRID_SPAN * scale) + reach,
            step=GRID_STEP * scale,
        )

    def axes(self) -> Tuple[NDArray[np.float64], NDArray[np.float64]]:
        count = int(np.ceil(self.half_width / self.step))
        offsets = np.arange(-count, count + 1) * self.step
        return self.center[0] + offsets, self.center[1] + offsets

    def points(self) -> NDArray[np.float64]:
        xs, ps = self.axes()
        return np.stack(np.meshgrid(xs, ps, indexing="ij"), axis=-1)


class FormMinimum(BaseModel):
    """Global minimum (or infimum) of a phase-space function."""

    point: Optional[Tuple[float, float]] = Field(
        default=None, description="Minimiser; None when the infimum is only approached at infinity"
    )
    value: float
    attained: bool = True
    method: str = Field(default="closed_form", description="closed_form or grid")


def wigner_identity() -> WignerForm:
    """Wigner function of the identity operator, 1 / (4 pi)."""
    return WignerForm(constant=IDENTITY_VALUE)


def wigner_fock0() -> WignerForm:
    """Vacuum projector, exp(-(x^2 + p^2) / 2) / (2 pi)."""
    return WignerForm(terms=(WignerTerm(coefficient=FOCK_PEAK, polynomial={(0, 0): 1.0}),))


def wigner_fock1() -> WignerForm:
    """Single-photon projector, -(1 - x^2 - p^2) exp(-(x^2 + p^2) / 2) / (2 pi)."""
    return WignerForm(
        terms=(
            WignerTerm(
                coefficient=FOCK_PEAK,
                polynomial={(0, 0): -1.0, (2, 0): 1.0, (0, 2): 1.0},
            ),
        )
    )


def displacement_offset(alpha: complex) -> Tuple[float, float]:
    """Phase-space shift of a displacement by alpha."""
    alpha = complex(alpha)
    return 2.0 * alpha.real, 2.0 * alpha.imag


def make_click_povm(epsilon: float, alpha: complex = 0.0, label: str = "x") -> PovmFamily:
    """Noisy on/off detector preceded by a displacement.

    Outcome +1 is D(alpha) [(1 - eps) |0><0| + eps |1><1|] D(alpha)^dagger,
    outcome -1 is the identity minus outcome +1.

    Raises:
        ValidationError: If epsilon is outside [0, 1]
    """
    epsilon = validate_epsilon(epsilon)
    no_click = (wigner_fock0().scaled(1.0 - epsilon) + wigner_fock1().scaled(epsilon)).merged()
    plus = no_click.shifted(displacement_offset(alpha))
    minus = wigner_identity() - plus
    return PovmFamily(setting_label=label, outcomes=(1, -1), elements=(plus, minus))


def convolve_isotropic(form: WignerForm, t: float) -> WignerForm:
    """Exact convolution of ``form`` with N(0, t I).

    Raises:
        ValidationError: If t < 0
    """
    t = float(t)
    if not np.isfinite(t) or t < 0.0:
        raise ValidationError(f"Noise t must be nonnegative, got: {t}", field="t", value=t)
    if t == 0.0:
        return form
    return WignerForm(constant=form.constant, terms=tuple(term.convolved(t) for term in form.terms))


def _single_mode_noise(gamma: CovarianceLike) -> NDArray[np.float64]:
    matrix = as_covariance(gamma)
    if matrix.modes != 1:
        raise ValidationError(
            f"Noise matrix must be 2x2, got {matrix.dimension}x{matrix.dimension}",
            field="gamma",
            value=matrix.dimension,
        )
    margin = psd_margin(matrix.matrix)
    if margin < -DEFAULT_TOLERANCE:
        raise ValidationError(
            f"Noise matrix must be positive semidefinite (min eigenvalue {margin:.3e})",
            field="gamma",
            value=margin,
        )
    return np.asarray(matrix.matrix)


def evaluate_convolved(form: WignerForm, gamma: CovarianceLike, points: ArrayLike) -> Any:
    """Exact value of form * N(0, gamma) at points of shape (..., 2).

    For a term of width s and D = s I + gamma the convolution equals
    coef * 2 pi s * N(d; 0, D) * E[P(U)], U ~ N(s D^-1 d, s I - s^2 D^-1).

    Raises:
        ValidationError: If gamma is not a 2x2 PSD matrix
    """
    gamma_matrix = _single_mode_noise(gamma)
    array = np.asarray(points, dtype=float)
    total = np.full(array.shape[:-1], form.constant)
    for term in form.terms:
        s = term.width
        spread = s * np.eye(2) + gamma_matrix
        gain = s * np.linalg.inv(spread)
        d = array - np.asarray(term.center)
        density = stats.multivariate_normal(mean=np.zeros(2), cov=spread).pdf(d)
        expectation = gaussian_expectation(d @ gain.T, s * np.eye(2) - s * gain, term.polynomial)
        total = total + term.coefficient * 2.0 * np.pi * s * np.reshape(density, array.shape[:-1]) * expectation
    return float(total) if total.ndim == 0 else total


def convolve_general(form: WignerForm, gamma: CovarianceLike, grid: GridSpec) -> NDArray[np.float64]:
    """form * N(0, gamma) sampled on ``grid`` (array indexed [x, p]).

    Raises:
        ValidationError: If gamma is not a 2x2 PSD matrix
    """
    return np.asarray(evaluate_convolved(form, gamma, grid.points()))


def _grid_minimum(
    func: Callable[[NDArray[np.float64]], Any], grid: GridSpec, constant: float
) -> FormMinimum:
    values = np.asarray(func(grid.points()))
    index = np.unravel_index(np.argmin(values), values.shape)
    xs, ps = grid.axes()
    start = np.array([xs[index[0]], ps[index[1]]])
    result = optimize.minimize(
        lambda r: float(func(r)),
        start,
        method="Nelder-Mead",
        options={"xatol": 1e-10, "fatol": 1e-15, "maxiter": 2000},
    )
    point, value = (result.x, float(result.fun)) if result.fun < values[index] else (start, float(values[index]))
    logger.debug(f"Grid minimum {value:.6e} at ({point[0]:.4f}, {point[1]:.4f})")
    if constant < value:
        return FormMinimum(point=None, value=constant, attained=False, method="grid")
    return FormMinimum(point=(float(point[0]), float(point[1])), value=value, method="grid")


def _radial_minimum(constant: float, term: WignerTerm, a: float, b: float) -> FormMinimum:
    """Minimum of C + (a + b rho) exp(-rho / (2 w)) over rho = |r - c|^2 >= 0."""
    w = term.width
    candidates = [0.0]
    if b != 0.0 and 2.0 * w - a / b > 0.0:
        candidates.append(2.0 * w - a / b)
    values = [constant + (a + b * rho) * np.exp(-rho / (2.0 * w)) for rho in candidates]
    best = int(np.argmin(values))
    if constant < values[best]:
        return FormMinimum(point=None, value=constant, attained=False)
    radius = np.sqrt(candidates[best])
    return FormMinimum(point=(term.center[0] + radius, term.center[1]), value=float(values[best]))


def minimum_of_form(form: WignerForm) -> FormMinimum:
    """Global minimum of a Wigner form.

    Forms whose terms merge into one radial term are solved in closed form;
    anything else falls back to a grid search refined by Nelder-Mead.
    """
    merged = form.merged()
    if not merged.terms:
        return FormMinimum(point=(0.0, 0.0), value=merged.constant)
    if len(merged.terms) == 1:
        term = merged.terms[0]
        profile = term.radial_profile()
        if profile is not None:
            a, b = profile
            return _radial_minimum(merged.constant, term, term.coefficient * a, term.coefficient * b)
    logger.warning(f"No closed-form minimum for a form with {len(merged.terms)} terms; using grid search")
    return _grid_minimum(merged.evaluate, GridSpec.covering(merged), merged.constant)


def minimum_of_convolved(form: WignerForm, gamma: CovarianceLike) -> FormMinimum:
    """Global minimum of form * N(0, gamma) for any 2x2 PSD gamma."""
    gamma_matrix = _single_mode_noise(gamma)
    t = gamma_matrix[0, 0]
    if np.allclose(gamma_matrix, t * np.eye(2), rtol=0.0, atol=1e-15):
        return minimum_of_form(convolve_isotropic(form, t))
    merged = form.merged()
    return _grid_minimum(
        lambda r: evaluate_convolved(merged, gamma_matrix, r),
        GridSpec.covering(merged, gamma_matrix),
        merged.constant,
    )


def noise_threshold(epsilon: float) -> NoiseThreshold:
    """Smallest isotropic t making both smoothed click elements nonnegative.

    The click element needs t >= sqrt(1 - 4 eps) while eps < 1/4; the no-click
    element needs t >= 2 eps - 1 once eps > 1/2.

    Raises:
        ValidationError: If epsilon is outside [0, 1]
    """
    epsilon = validate_epsilon(epsilon)
    click = float(np.sqrt(1.0 - 4.0 * epsilon)) if epsilon < 0.25 else 0.0
    return NoiseThreshold(epsilon=epsilon, t_star=max(click, 2.0 * epsilon - 1.0))


def positivity_threshold(epsilon: float, alpha: complex = 0.0, xtol: float = 1e-12) -> float:
    """Smallest t making both convolved click elements nonnegative, found by Brent's method.

    Raises:
        ValidationError: If epsilon is outside [0, 1]
    """
    family = make_click_povm(epsilon, alpha)
    click, no_click = family.element(-1), family.element(1)
    center = np.asarray(displacement_offset(alpha))

    def lowest(t: float) -> float:
        return minimum_of_form(convolve_isotropic(click, t)).value

    # The no-click element dips only at its center.
    def center_value(t: float) -> float:
        return convolve_isotropic(no_click, t).evaluate(center)

    roots = [0.0]
    for func in (lowest, center_value):
        if func(0.0) < 0.0:
            roots.append(float(optimize.brentq(func, 0.0, 1.5, xtol=xtol)))
    logger.debug(f"Positivity threshold for epsilon={epsilon}: {max(roots):.12f}")
    return max(roots)
