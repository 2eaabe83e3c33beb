"""
Gaussian Locality - local hidden-variable certificates for Gaussian states.

This package splits the covariance of a bipartite Gaussian state into local
Gaussian noise plus a classical hidden-variable distribution, checks that the
smoothed measurement operators stay nonnegative, and runs the resulting model.
It also evaluates CHSH statistics for displaced click detectors.
"""

from gaussian_locality.__version__ import (
    __author__,
    __email__,
    __license__,
    __title__,
    __version__,
)
from gaussian_locality.born import ClickStatistics, probability_phase_space
from gaussian_locality.certifier import (
    certify_click_setting,
    certify_isotropic,
    certify_separable,
    click_families,
    verify_certificate,
)
from gaussian_locality.chsh import evaluate_chsh, optimize_chsh
from gaussian_locality.exceptions import (
    CertificateError,
    ConfigError,
    LocalityError,
    OutputError,
    TruncationError,
    ValidationError,
)
from gaussian_locality.fock import FockOracle, probability_fock
from gaussian_locality.models import (
    ChshConstraint,
    ChshEvaluation,
    ChshSetting,
    LocalityCertificate,
    RegionVerdict,
    SimulationReport,
    SweepConfig,
    TmssParameters,
    VerdictStatus,
)
from gaussian_locality.sampler import build_lhv_model, simulate
from gaussian_locality.states import GaussianStateDescriptor, apply_pure_loss, lossy_tmss, make_tmss
from gaussian_locality.sweep import run_sweep
from gaussian_locality.wigner import PovmFamily, WignerForm, make_click_povm, noise_threshold

__all__ = [
    "__title__",
    "__version__",
    "__author__",
    "__email__",
    "__license__",
    "LocalityError",
    "ValidationError",
    "TruncationError",
    "CertificateError",
    "OutputError",
    "ConfigError",
    "GaussianStateDescriptor",
    "make_tmss",
    "apply_pure_loss",
    "lossy_tmss",
    "WignerForm",
    "PovmFamily",
    "make_click_povm",
    "noise_threshold",
    "click_families",
    "certify_isotropic",
    "certify_separable",
    "certify_click_setting",
    "verify_certificate",
    "probability_phase_space",
    "ClickStatistics",
    "FockOracle",
    "probability_fock",
    "evaluate_chsh",
    "optimize_chsh",
    "build_lhv_model",
    "simulate",
    "run_sweep",
    "ChshConstraint",
    "ChshEvaluation",
    "ChshSetting",
    "LocalityCertificate",
    "RegionVerdict",
    "SimulationReport",
    "SweepConfig",
    "TmssParameters",
    "VerdictStatus",
]
