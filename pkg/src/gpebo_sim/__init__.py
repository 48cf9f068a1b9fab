"""State-affine immersion observers (GPEBO) with LS+DREM parameter estimation.

The package turns a general nonlinear plant into a state-affine system via an
algebraic immersion z = (x, phi(x)), runs a generalized parameter
estimation-based observer (xi, Phi) on the lifted dynamics, reduces state
observation to estimating the constant theta = xi(0) - z(0), and estimates
theta with a least-squares + DREM scheme.  A catalog of benchmark systems,
a scenario runner, an HTTP service and a thin CLI client sit on top.
"""

__version__ = "0.1.0"

from .linalg import DivergenceError, adjugate, determinant, rk4_step
from .system import InputPolicy, NonlinearSystem, plant_step, readout
from .immersion import Immersion, affine_field, lift, matching_residual, selector
from .gpebo import (
    GpeboState,
    LreSample,
    build_lre,
    excitation_grammian,
    gpebo_step,
    parameterize_state,
    rank_identifiable,
)
from .estimator import (
    DremSignals,
    EstimatorError,
    LsDremGains,
    LsDremState,
    drem_mix,
    gradient_baseline_step,
    lsdrem_init,
    lsdrem_step,
)
from .benchmarks import list_benchmarks, make_benchmark

__all__ = [
    "DivergenceError",
    "DremSignals",
    "EstimatorError",
    "GpeboState",
    "Immersion",
    "InputPolicy",
    "LreSample",
    "LsDremGains",
    "LsDremState",
    "NonlinearSystem",
    "adjugate",
    "affine_field",
    "build_lre",
    "determinant",
    "drem_mix",
    "excitation_grammian",
    "gpebo_step",
    "gradient_baseline_step",
    "lift",
    "list_benchmarks",
    "lsdrem_init",
    "lsdrem_step",
    "make_benchmark",
    "matching_residual",
    "parameterize_state",
    "plant_step",
    "rank_identifiable",
    "readout",
    "rk4_step",
    "selector",
]
