"""Nonlocal dispersal operators with Neumann coupling: principal eigenvalues,
KPP steady states, time evolution and rate fits in the dispersal spread."""

__version__ = "0.1.0"

from .evolution import Trajectory, evolve, logistic_reference, logistic_trajectory, sup_error
from .exceptions import (
    ConfigurationError,
    DomainError,
    FitError,
    NlkppError,
    NumericalError,
    RegimeError,
    ResolutionError,
    ShapeError,
)
from .experiments import SweepConfig, SweepRecord, parse_config, records_to_csv, run_sweep
from .grid import Field, Grid, build_grid, norm, sample
from .kernel import Kernel, eval_scaled, make_kernel, scaled_second_moment
from .operator import NonlocalOperator, apply, assemble
from .ratefit import RateFit, fit_rate
from .spectral import (
    EigenPair,
    limit_targets,
    local_neumann_eigenpair,
    local_reference_eigenvalue,
    principal_eigenpair,
    rayleigh_quotient,
)
from .stationary import StationarySolution, limit_profile, solve_stationary
