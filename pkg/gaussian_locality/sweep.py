"""Region map of the lossy two-mode squeezed state over (eta, nu)."""

import logging
from concurrent.futures import ProcessPoolExecutor, as_completed
from pathlib import Path
from typing import Callable, List, Optional

from gaussian_locality.certifier import certify_click_setting
from gaussian_locality.chsh import optimize_chsh
from gaussian_locality.config import Settings
from gaussian_locality.models import (
    LOCAL_BOUND,
    ChshConstraint,
    RegionVerdict,
    SweepConfig,
    TmssParameters,
    VerdictStatus,
)
from gaussian_locality.states import lossy_tmss
from gaussian_locality.utils import write_csv


logger = logging.getLogger(__name__)


CSV_HEADER = ("eta", "nu", "status", "value")


def evaluate_cell(eta: float, nu: float, epsilon: float, settings: Optional[Settings] = None) -> RegionVerdict:
    """Classify one cell: certified, CHSH-violating, or undetermined."""
    settings = settings or Settings()
    state = lossy_tmss(TmssParameters(eta=eta, nu=nu))
    certificate = certify_click_setting(state, epsilon, tolerances=settings.tolerances)
    if certificate is not None:
        return RegionVerdict(
            eta=eta, nu=nu, status=VerdictStatus.LHV_CERTIFIED, value=certificate.margin, witness=certificate
        )

    _, evaluation = optimize_chsh(state, epsilon, ChshConstraint.SYMMETRIC, settings.optimizer)
    if evaluation.S > LOCAL_BOUND + settings.optimizer.violation_threshold:
        status = VerdictStatus.CHSH_VIOLATING
    else:
        status = VerdictStatus.UNDETERMINED
    return RegionVerdict(eta=eta, nu=nu, status=status, value=evaluation.S, witness=evaluation)


def run_sweep(
    config: SweepConfig,
    settings: Optional[Settings] = None,
    on_cell: Optional[Callable[[RegionVerdict], None]] = None,
) -> List[List[RegionVerdict]]:
    """Evaluate every (eta, nu) cell and return verdicts indexed [eta][nu].

    Cells run in worker processes when ``config.max_workers`` > 1; the result
    order is row-major regardless of completion order. When
    ``config.output_path`` is set the CSV is written there.

    Raises:
        OutputError: If the CSV cannot be written
    """
    settings = settings or Settings()
    settings = settings.model_copy(
        update={"optimizer": settings.optimizer.model_copy(update={"budget": config.optimizer_budget})}
    )
    etas = [float(eta) for eta in config.etas()]
    nus = [float(nu) for nu in config.nus()]
    cells = [(i, j) for i in range(len(etas)) for j in range(len(nus))]
    grid: List[List[Optional[RegionVerdict]]] = [[None] * len(nus) for _ in etas]
    logger.info(f"Sweeping {len(cells)} cells at epsilon={config.epsilon}")

    if config.max_workers == 1:
        for i, j in cells:
            verdict = evaluate_cell(etas[i], nus[j], config.epsilon, settings)
            grid[i][j] = verdict
            if on_cell:
                on_cell(verdict)
    else:
        with ProcessPoolExecutor(max_workers=config.max_workers) as executor:
            futures = {
                executor.submit(evaluate_cell, etas[i], nus[j], config.epsilon, settings): (i, j)
                for i, j in cells
            }
            for future in as_completed(futures):
                i, j = futures[future]
                grid[i][j] = future.result()
                if on_cell:
                    on_cell(grid[i][j])

    verdicts = [[verdict for verdict in row if verdict is not None] for row in grid]
    if config.output_path is not None:
        write_sweep_csv(verdicts, config.output_path)
    return verdicts


def write_sweep_csv(verdicts: List[List[RegionVerdict]], path: Path) -> None:
    """Row-major CSV with header eta,nu,status,value."""
    rows = [verdict.csv_row() for row in verdicts for verdict in row]
    write_csv(CSV_HEADER, rows, path)
    logger.info(f"Wrote {len(rows)} cells to {path}")


def summarize(verdicts: List[List[RegionVerdict]]) -> dict:
    """Cell count per status."""
    counts = {status.value: 0 for status in VerdictStatus}
    for row in verdicts:
        for verdict in row:
            counts[verdict.status.value] += 1
    return counts
