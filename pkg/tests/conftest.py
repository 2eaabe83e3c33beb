"""Pytest configuration and fixtures."""

import tempfile
from pathlib import Path
from typing import Generator, List

import numpy as np
import pytest

from gaussian_locality.certifier import click_families
from gaussian_locality.config import OptimizerConfig, SamplerConfig, Settings, ToleranceConfig
from gaussian_locality.models import TmssParameters
from gaussian_locality.states import GaussianStateDescriptor, lossy_tmss, make_tmss
from gaussian_locality.wigner import PovmFamily


EPSILON = 0.02
REFERENCE_ALPHAS = (0.12, -0.48)


@pytest.fixture
def temp_dir() -> Generator[Path, None, None]:
    """Create a temporary directory for tests."""
    with tempfile.TemporaryDirectory() as tmpdir:
        yield Path(tmpdir)


@pytest.fixture
def vacuum() -> GaussianStateDescriptor:
    """Two-mode vacuum."""
    return make_tmss(1.0)


@pytest.fixture
def violating_state() -> GaussianStateDescriptor:
    """Lossy squeezed state at eta=0.95, nu=1.4, where CHSH is violated."""
    return lossy_tmss(TmssParameters(eta=0.95, nu=1.4))


@pytest.fixture
def local_state() -> GaussianStateDescriptor:
    """Lossy squeezed state at eta=0.1, nu=1.05, inside the certified region."""
    return lossy_tmss(TmssParameters(eta=0.1, nu=1.05))


@pytest.fixture
def families_a() -> List[PovmFamily]:
    """Click detectors of party A at the reference displacements."""
    return click_families(EPSILON, REFERENCE_ALPHAS, prefix="x")


@pytest.fixture
def families_b() -> List[PovmFamily]:
    """Click detectors of party B with beta_y = -alpha_y."""
    return click_families(EPSILON, [-alpha for alpha in REFERENCE_ALPHAS], prefix="y")


@pytest.fixture
def settings() -> Settings:
    """Create test settings with small budgets."""
    return Settings(
        tolerances=ToleranceConfig(),
        optimizer=OptimizerConfig(grid_step=0.1, budget=60),
        sampler=SamplerConfig(samples=20_000, seed=11, chunk_size=5_000, max_workers=2),
        sweep={"max_workers": 1},
        logging={"level": "DEBUG"},
    )


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator for property-style checks."""
    return np.random.default_rng(2024)
