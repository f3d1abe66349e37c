"""Monte Carlo simulation of QND-measurement feedback that stabilizes a cavity Fock state."""

from .config import ExperimentConfig, validate_config
from .engine import run_ensemble, run_trajectory
from .fock import Outcome
from .lyapunov import ControlParams, sigma_table

__all__ = [
    "ControlParams",
    "ExperimentConfig",
    "Outcome",
    "run_ensemble",
    "run_trajectory",
    "sigma_table",
    "validate_config",
]
__version__ = "0.1.0"
