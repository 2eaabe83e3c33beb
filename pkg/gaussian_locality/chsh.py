"""CHSH evaluation and displacement optimisation for click detectors."""

import logging
from typing import Callable, Optional, Tuple

import numpy as np
from scipy import optimize

from gaussian_locality.born import ClickStatistics, click_probability_table
from gaussian_locality.config import OptimizerConfig
from gaussian_locality.models import ChshConstraint, ChshEvaluation, ChshSetting
from gaussian_locality.states import GaussianStateDescriptor
from gaussian_locality.validators import validate_epsilon


logger = logging.getLogger(__name__)


DISPLACEMENT_BOUND = 1.0


def evaluate_chsh(state: GaussianStateDescriptor, setting: ChshSetting) -> ChshEvaluation:
    """Probability table, correlators and S for one setting.

    Raises:
        ValidationError: If the state is not one mode per party
    """
    table = click_probability_table(state, setting)
    evaluation = ChshEvaluation.from_table(setting, table)
    logger.debug(f"S = {evaluation.S:.6f} for {setting.to_json_dict()}")
    return evaluation


def displacement_grid(step: float) -> np.ndarray:
    """Points of [-1, 1] spaced by ``step``, endpoints included."""
    count = int(round(2.0 * DISPLACEMENT_BOUND / step))
    return np.linspace(-DISPLACEMENT_BOUND, DISPLACEMENT_BOUND, count + 1)


def _symmetric_grid_search(statistics: ClickStatistics, step: float) -> Tuple[np.ndarray, float]:
    """Best (alpha0, alpha1) on the grid; the first maximum in row-major order wins."""
    axis = displacement_grid(step)
    alpha0, alpha1 = (values.ravel() for values in np.meshgrid(axis, axis, indexing="ij"))
    values = statistics.chsh(alpha0, alpha1, -alpha0, -alpha1)
    best = int(np.argmax(values))
    logger.debug(f"Grid of {values.size} settings, best S = {values[best]:.6f}")
    return np.array([alpha0[best], alpha1[best]]), float(values[best])


def _refine(
    objective: Callable[[np.ndarray], float],
    start: np.ndarray,
    start_value: float,
    budget: int,
    fatol: float,
) -> Tuple[np.ndarray, float]:
    """Nelder-Mead within the displacement box; only improvements are kept."""
    if budget <= 0:
        return start, start_value
    result = optimize.minimize(
        lambda params: -float(objective(params)),
        start,
        method="Nelder-Mead",
        bounds=[(-DISPLACEMENT_BOUND, DISPLACEMENT_BOUND)] * start.size,
        options={"maxfev": budget, "fatol": fatol, "xatol": 1e-8},
    )
    refined = -float(result.fun)
    logger.debug(f"Nelder-Mead: {result.nfev} evaluations, S {start_value:.6f} -> {refined:.6f}")
    if refined > start_value:
        return np.clip(result.x, -DISPLACEMENT_BOUND, DISPLACEMENT_BOUND), refined
    return start, start_value


def optimize_chsh(
    state: GaussianStateDescriptor,
    epsilon: float,
    constraint: ChshConstraint = ChshConstraint.SYMMETRIC,
    optimizer: Optional[OptimizerConfig] = None,
) -> Tuple[ChshSetting, ChshEvaluation]:
    """Maximise S over displacements.

    The symmetric search uses real displacements with beta_y = -alpha_y: a
    coarse grid over [-1, 1]^2 followed by Nelder-Mead. The free search then
    lets all four complex displacements move, starting from the symmetric
    optimum. Both are deterministic.

    Args:
        state: Bipartite state with one mode per party
        epsilon: Detector excitation probability
        constraint: Which parametrisation to search
        optimizer: Grid step, evaluation budget and tolerance

    Returns:
        The best setting and its exact evaluation
    """
    epsilon = validate_epsilon(epsilon)
    optimizer = optimizer or OptimizerConfig()
    statistics = ClickStatistics(state, epsilon)

    start, start_value = _symmetric_grid_search(statistics, optimizer.grid_step)
    alphas, best = _refine(
        lambda p: statistics.chsh(p[0], p[1], -p[0], -p[1])[0],
        start,
        start_value,
        optimizer.budget,
        optimizer.fatol,
    )
    setting = ChshSetting.symmetric(float(alphas[0]), float(alphas[1]), epsilon)

    if constraint == ChshConstraint.FREE:

        def free_value(p: np.ndarray) -> float:
            a0, a1, b0, b1 = p[0::2] + 1j * p[1::2]
            return float(statistics.chsh(a0, a1, b0, b1)[0])

        start_free = np.array([alphas[0], 0.0, alphas[1], 0.0, -alphas[0], 0.0, -alphas[1], 0.0])
        params, best = _refine(free_value, start_free, best, optimizer.budget, optimizer.fatol)
        displacements = params[0::2] + 1j * params[1::2]
        setting = ChshSetting(
            alpha=(displacements[0], displacements[1]),
            beta=(displacements[2], displacements[3]),
            epsilon=epsilon,
        )

    evaluation = evaluate_chsh(state, setting)
    logger.info(f"Optimised S = {evaluation.S:.6f} ({constraint.value})")
    return setting, evaluation
