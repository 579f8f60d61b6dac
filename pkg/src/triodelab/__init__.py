"""Numerical laboratory for the vector Allen-Cahn triple junction on the disk."""

__version__ = "0.1.0"

from .potential import (  # noqa: F401
    PotentialSpec,
    PotentialConstants,
    WellSet,
    cubic_wells,
    estimate_constants,
    eval_w,
    grad_w,
    hess_w,
    perturbed_cubic,
)
from .connection1d import (  # noqa: F401
    ConnectionProfile,
    check_equal_actions,
    connect_all,
    fit_decay,
    minimize_action,
)
from .disk import (  # noqa: F401
    DiskGrid,
    Field,
    boundary_g_eps,
    build_test_function,
    el_residual,
    energy,
    energy_gradient,
    u0_field,
)
from .minimize2d import SolveConfig, SolveReport, continuation_sweep, minimize  # noqa: F401
from .config import ExperimentConfig  # noqa: F401
